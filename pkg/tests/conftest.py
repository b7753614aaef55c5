"""Shared fixtures and hypothesis profile.

The 200-term coefficient table costs about a minute of CPU, so it is
built once and persisted across sessions through the pytest cache as
exact fraction strings.
"""

import os
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from doublewell.perturbation import RationalSeries, bender_wu_coefficients

settings.register_profile(
    "numeric",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numeric")

_CACHE_KEY = "doublewell/e0-series-200"


def extended_enabled() -> bool:
    return os.environ.get("DOUBLEWELL_EXTENDED", "").lower() in (
        "1", "true", "yes")


@pytest.fixture(scope="session")
def series200(request) -> RationalSeries:
    """Ground-level perturbation series through g^200, exact."""
    raw = request.config.cache.get(_CACHE_KEY, None)
    if raw is not None and len(raw) == 201:
        return RationalSeries("g", tuple(Fraction(c) for c in raw))
    series = bender_wu_coefficients(0, 200)
    request.config.cache.set(_CACHE_KEY, [str(c) for c in series.coeffs])
    return series
