import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "enbcds",
    deadline=None,
    max_examples=int(os.environ.get("ENBCDS_HYPOTHESIS_EXAMPLES", "40")),
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("enbcds")
