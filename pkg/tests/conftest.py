import os
import sys

from hypothesis import HealthCheck, settings

# keep `pytest` working from a fresh checkout without an install
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

settings.register_profile(
    "drbm",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("drbm")
