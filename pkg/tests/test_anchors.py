import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from anchorkit.anchors import (
    AnchorDesign,
    PyramidLevel,
    ams_design,
    anchor_count,
    detector_design,
    generate_anchor_boxes,
    generate_anchors,
    ladder_design,
)

SQRT2 = math.sqrt(2.0)


class TestDetectorDesign:
    def test_fifteen_sizes_min_max(self):
        d = detector_design()
        assert len(d.sizes) == 15
        assert d.sizes[0] == 4.0
        assert d.sizes[-1] == 512.0

    def test_consecutive_size_ratio_is_sqrt2(self):
        sizes = detector_design().sizes
        for a, b in zip(sizes, sizes[1:]):
            assert b / a == pytest.approx(SQRT2, abs=1e-9)

    def test_square_anchors(self):
        assert detector_design().aspect_ratio == 1.0

    def test_level_layout(self):
        d = detector_design()
        assert [lv.name for lv in d.levels] == ["P2", "P3", "P4", "P5", "P6"]
        assert [lv.stride for lv in d.levels] == [4, 8, 16, 32, 64]
        assert all(len(lv.sizes) == 3 for lv in d.levels)


class TestLadderDesign:
    def test_default_ladder(self):
        d = ams_design(1.0)
        assert len(d.sizes) == 15
        assert d.sizes[0] == pytest.approx(4.0, abs=1e-9)
        assert d.sizes[-1] == pytest.approx(512.0, abs=1e-9)

    def test_aspect_ratio_carried(self):
        d = ams_design(1.25)
        assert d.aspect_ratio == 1.25
        assert len(d.sizes) == 15

    def test_mid_rung_closed_form(self):
        # 4 * (sqrt 2)^7 = 2^5.5
        assert ams_design(1.0).sizes[7] == pytest.approx(2.0**5.5, abs=1e-9)

    def test_custom_step(self):
        d = ladder_design(1.0, scale_step=2.0)
        assert d.sizes == (4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0)

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            ams_design(0.0)
        with pytest.raises(ValueError):
            ladder_design(1.0, scale_step=1.0)
        with pytest.raises(ValueError):
            ladder_design(1.0, min_size=0)


class TestGenerateAnchors:
    def test_detector_count_at_640(self):
        # 3 sizes x (160^2 + 80^2 + 40^2 + 20^2 + 10^2) cells
        anchors = generate_anchors(detector_design(), 640, 640)
        assert len(anchors) == 102300
        assert anchor_count(detector_design(), 640, 640) == 102300

    def test_p2_contribution(self):
        anchors = generate_anchors(detector_design(), 640, 640)
        assert sum(1 for a in anchors if a.level_index == 0) == 76800

    def test_single_cell(self):
        design = AnchorDesign(levels=(PyramidLevel("L", 64, (64.0,)),))
        anchors = generate_anchors(design, 64, 64)
        assert len(anchors) == 1
        a = anchors[0]
        assert (a.box.cx, a.box.cy) == (32.0, 32.0)
        assert (a.box.w, a.box.h) == (64.0, 64.0)

    def test_count_formula(self):
        design = detector_design()
        for w, h in [(640, 640), (512, 384), (129, 65)]:
            expected = sum(
                math.floor(w / lv.stride) * math.floor(h / lv.stride) * len(lv.sizes)
                for lv in design.levels
            )
            assert len(generate_anchors(design, w, h)) == expected

    def test_zero_cells_rejected(self):
        design = AnchorDesign(levels=(PyramidLevel("L", 64, (64.0,)),))
        with pytest.raises(ValueError):
            generate_anchors(design, 63, 64)
        with pytest.raises(ValueError):
            generate_anchor_boxes(design, 64, 63)

    def test_bad_image_dims_rejected(self):
        with pytest.raises(ValueError):
            generate_anchors(detector_design(), 0, 640)

    def test_aspect_ratio_invariant(self):
        design = ladder_design(1.3, min_size=8, max_size=64)
        design = AnchorDesign(levels=(PyramidLevel("L", 16, design.sizes),), aspect_ratio=1.3)
        for a in generate_anchors(design, 128, 96):
            assert a.box.h / a.box.w == pytest.approx(1.3, abs=1e-12)

    def test_deterministic_regeneration(self):
        a1 = generate_anchors(detector_design(), 256, 192)
        a2 = generate_anchors(detector_design(), 256, 192)
        assert a1 == a2

    def test_array_matches_objects_exactly(self):
        design = detector_design()
        objs = generate_anchors(design, 256, 192)
        arr = generate_anchor_boxes(design, 256, 192)
        assert arr.shape == (len(objs), 4)
        obj_arr = np.array([[a.box.x, a.box.y, a.box.w, a.box.h] for a in objs])
        assert np.array_equal(arr, obj_arr)

    def test_ordering_contract(self):
        # level, then row-major cell, then size
        design = AnchorDesign(
            levels=(PyramidLevel("A", 32, (8.0, 16.0)), PyramidLevel("B", 64, (32.0,))),
        )
        anchors = generate_anchors(design, 64, 64)
        centers = [(a.box.cx, a.box.cy, a.size, a.level_index) for a in anchors]
        assert centers == [
            (16.0, 16.0, 8.0, 0),
            (16.0, 16.0, 16.0, 0),
            (48.0, 16.0, 8.0, 0),
            (48.0, 16.0, 16.0, 0),
            (16.0, 48.0, 8.0, 0),
            (16.0, 48.0, 16.0, 0),
            (48.0, 48.0, 8.0, 0),
            (48.0, 48.0, 16.0, 0),
            (32.0, 32.0, 32.0, 1),
        ]


class TestDesignValidation:
    def test_level_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            PyramidLevel("L", 8, ())
        with pytest.raises(ValueError):
            PyramidLevel("L", 8, (8.0, 8.0))
        with pytest.raises(ValueError):
            PyramidLevel("L", 8, (8.0, 4.0))
        with pytest.raises(ValueError):
            PyramidLevel("L", 0, (8.0,))

    def test_design_rejects_duplicate_sizes_across_levels(self):
        with pytest.raises(ValueError):
            AnchorDesign(
                levels=(
                    PyramidLevel("A", 8, (8.0, 16.0)),
                    PyramidLevel("B", 16, (16.0, 32.0)),
                ),
            )

    def test_design_needs_levels_and_positive_ar(self):
        with pytest.raises(ValueError):
            AnchorDesign(levels=())
        with pytest.raises(ValueError):
            AnchorDesign(levels=(PyramidLevel("A", 8, (8.0,)),), aspect_ratio=-1)


class TestDesignJson:
    def test_round_trip(self):
        d = detector_design()
        assert AnchorDesign.from_json(d.to_json()) == d

    def test_field_names(self):
        data = detector_design().to_json_dict()
        assert set(data) == {"levels", "aspect_ratio"}
        assert set(data["levels"][0]) == {"name", "stride", "sizes"}

    @given(st.floats(min_value=0.25, max_value=4.0, allow_nan=False))
    def test_round_trip_any_ar(self, ar):
        d = ams_design(ar)
        assert AnchorDesign.from_json(d.to_json()) == d
