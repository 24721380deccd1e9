"""Anchor pyramid designs and deterministic anchor-grid generation.

Two stock designs are provided: the five-level detector pyramid (square
anchors, sizes 4..512 on a sqrt(2) ladder over strides 4..64) and the
single-level high-recall ladder used for ideal-placement analysis, where
spatial stride is irrelevant and only the size ladder matters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .geometry import Box

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class PyramidLevel:
    """One pyramid level: grid spacing plus the anchor side lengths tiled on it."""

    name: str
    stride: float
    sizes: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(float(s) for s in self.sizes))
        if self.stride <= 0:
            raise ValueError(f"level {self.name!r}: stride must be positive")
        if not self.sizes:
            raise ValueError(f"level {self.name!r}: sizes must be non-empty")
        if any(s <= 0 for s in self.sizes):
            raise ValueError(f"level {self.name!r}: sizes must be positive")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError(f"level {self.name!r}: sizes must be strictly increasing")


@dataclass(frozen=True)
class AnchorDesign:
    """A pyramid of levels sharing a single anchor aspect ratio (height/width)."""

    levels: tuple[PyramidLevel, ...]
    aspect_ratio: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if not self.levels:
            raise ValueError("design needs at least one level")
        if self.aspect_ratio <= 0:
            raise ValueError("aspect_ratio must be positive")
        pooled = sorted(s for lv in self.levels for s in lv.sizes)
        if any(b <= a for a, b in zip(pooled, pooled[1:])):
            raise ValueError("anchor sizes must be distinct across levels")

    @property
    def sizes(self) -> tuple[float, ...]:
        """All anchor side lengths across levels, ascending."""
        return tuple(sorted(s for lv in self.levels for s in lv.sizes))

    def to_json_dict(self) -> dict:
        return {
            "levels": [
                {"name": lv.name, "stride": lv.stride, "sizes": list(lv.sizes)}
                for lv in self.levels
            ],
            "aspect_ratio": self.aspect_ratio,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "AnchorDesign":
        levels = tuple(
            PyramidLevel(lv["name"], float(lv["stride"]), tuple(lv["sizes"]))
            for lv in data["levels"]
        )
        return cls(levels=levels, aspect_ratio=float(data["aspect_ratio"]))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "AnchorDesign":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class Anchor:
    """A concrete anchor: its box, the level it came from, and its side length."""

    box: Box
    level_index: int
    size: float


def detector_design() -> AnchorDesign:
    """The five-level detector pyramid with square anchors."""
    s = SQRT2
    return AnchorDesign(
        levels=(
            PyramidLevel("P2", 4.0, (4.0, 4.0 * s, 8.0)),
            PyramidLevel("P3", 8.0, (8.0 * s, 16.0, 16.0 * s)),
            PyramidLevel("P4", 16.0, (32.0, 32.0 * s, 64.0)),
            PyramidLevel("P5", 32.0, (64.0 * s, 128.0, 128.0 * s)),
            PyramidLevel("P6", 64.0, (256.0, 256.0 * s, 512.0)),
        ),
        aspect_ratio=1.0,
    )


def ladder_design(
    aspect_ratio: float,
    scale_step: float = SQRT2,
    min_size: float = 4.0,
    max_size: float = 512.0,
) -> AnchorDesign:
    """Single-level geometric scale ladder, min_size up to max_size.

    Spatial stride is irrelevant for ideal-placement analysis; it is set to 1
    so the design can still be instantiated on a grid when needed.
    """
    if aspect_ratio <= 0:
        raise ValueError("aspect_ratio must be positive")
    if scale_step <= 1:
        raise ValueError("scale_step must be greater than 1")
    if min_size <= 0 or max_size < min_size:
        raise ValueError("need 0 < min_size <= max_size")
    count = math.floor(math.log(max_size / min_size) / math.log(scale_step) + 1e-9) + 1
    if scale_step == SQRT2:
        # Half-power-of-two rungs keep the integer sizes (4, 8, ..., 512)
        # exact; the accumulated power form would drift by a few ulps.
        base = math.log2(min_size)
        sizes = tuple(2.0 ** (base + 0.5 * k) for k in range(count))
    else:
        sizes = tuple(min_size * scale_step**k for k in range(count))
    return AnchorDesign(
        levels=(PyramidLevel("L0", 1.0, sizes),), aspect_ratio=aspect_ratio
    )


def ams_design(aspect_ratio: float) -> AnchorDesign:
    """The high-recall analysis ladder: sizes 4..512 stepped by sqrt(2)."""
    return ladder_design(aspect_ratio)


def _level_cells(level: PyramidLevel, image_w: float, image_h: float) -> tuple[int, int]:
    nx = math.floor(image_w / level.stride)
    ny = math.floor(image_h / level.stride)
    if nx <= 0 or ny <= 0:
        raise ValueError(
            f"level {level.name!r}: stride {level.stride} leaves no grid cells "
            f"in a {image_w}x{image_h} image"
        )
    return nx, ny


def generate_anchor_boxes(
    design: AnchorDesign, image_w: float, image_h: float
) -> np.ndarray:
    """(N, 4) float64 xywh anchor array.

    Rows are ordered by (level, row-major grid cell, size); anchors are
    centered at ((i+0.5)*stride, (j+0.5)*stride) and are not clipped to the
    image (clipping would change IoU values).
    """
    if image_w <= 0 or image_h <= 0:
        raise ValueError("image dimensions must be positive")
    blocks = []
    for level in design.levels:
        nx, ny = _level_cells(level, image_w, image_h)
        xs = (np.arange(nx, dtype=np.float64) + 0.5) * level.stride
        ys = (np.arange(ny, dtype=np.float64) + 0.5) * level.stride
        sizes = np.asarray(level.sizes, dtype=np.float64)
        k = sizes.size
        cx = np.repeat(np.tile(xs, ny), k)
        cy = np.repeat(np.repeat(ys, nx), k)
        w = np.tile(sizes, nx * ny)
        h = w * design.aspect_ratio
        blocks.append(np.column_stack([cx - w / 2.0, cy - h / 2.0, w, h]))
    return np.concatenate(blocks, axis=0)


def generate_anchors(
    design: AnchorDesign, image_w: float, image_h: float
) -> list[Anchor]:
    """Anchor objects in the same deterministic order as generate_anchor_boxes."""
    if image_w <= 0 or image_h <= 0:
        raise ValueError("image dimensions must be positive")
    out: list[Anchor] = []
    for li, level in enumerate(design.levels):
        nx, ny = _level_cells(level, image_w, image_h)
        for j in range(ny):
            cy = (j + 0.5) * level.stride
            for i in range(nx):
                cx = (i + 0.5) * level.stride
                for s in level.sizes:
                    w = s
                    h = s * design.aspect_ratio
                    out.append(Anchor(Box(cx - w / 2.0, cy - h / 2.0, w, h), li, s))
    return out


def anchor_count(design: AnchorDesign, image_w: float, image_h: float) -> int:
    """Number of anchors generate_anchors would produce, without generating them."""
    total = 0
    for level in design.levels:
        nx, ny = _level_cells(level, image_w, image_h)
        total += nx * ny * len(level.sizes)
    return total


def load_design(source: str | IO[str]) -> AnchorDesign:
    """Load an AnchorDesign from a JSON file path or open text stream."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            return AnchorDesign.from_json(fh.read())
    return AnchorDesign.from_json(source.read())
