from hypothesis import HealthCheck, settings

# Keep the randomized suite reproducible and avoid timing flakiness from
# array-heavy examples.
settings.register_profile(
    "ci",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")
