import os

from hypothesis import HealthCheck, settings

# reproducible property runs; the example database would make reruns differ
settings.register_profile("repo", derandomize=True, deadline=None, database=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))
