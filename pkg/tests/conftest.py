from hypothesis import HealthCheck, settings

# numeric property tests run LAPACK under the hood; don't let wall-clock
# noise on loaded machines turn theorems into flaky tests
settings.register_profile(
    "anomalyid",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("anomalyid")
