import numpy as np
import pytest

from fracount.paths import RngStream


@pytest.fixture
def rng():
    return RngStream(20260810, 0)


def assert_close(actual, expected, atol=0.0, rtol=1e-12, msg=""):
    a, e = float(actual), float(expected)
    tol = atol + rtol * abs(e)
    assert abs(a - e) <= tol, f"{msg} |{a:.15g} - {e:.15g}| = {abs(a - e):.3g} > {tol:.3g}"
