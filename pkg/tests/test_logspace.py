import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from minmodlab.errors import MinModError
from minmodlab.logspace import (LogReal, iterated_exp, iterated_log, log_abs_expm1, log_abs_one_minus,
                                log_softplus, signed_log_abs_expm1, signed_log_abs_one_minus, softplus,
                                weighted_sum)

finite = st.floats(min_value=-700, max_value=700, allow_nan=False)


def test_logreal_rejects_nonfinite():
    with pytest.raises(MinModError) as exc:
        LogReal(math.inf)
    assert exc.value.code == "NONPOSITIVE_RADIUS"
    with pytest.raises(MinModError):
        LogReal.of(0.0)


def test_logreal_arithmetic():
    r = LogReal.of(3.0)
    assert (r ** 2).log_value == pytest.approx(math.log(9.0))
    assert (r * LogReal.of(2.0)).value == pytest.approx(6.0)
    assert LogReal(1e6).value == math.inf


@given(finite)
def test_softplus_matches_mpmath(x):
    want = float(mpmath.log1p(mpmath.exp(mpmath.mpf(x))))
    assert softplus(x) == pytest.approx(want, rel=1e-14, abs=1e-300)


@given(finite)
def test_log_softplus_matches_mpmath(x):
    want = float(mpmath.log(mpmath.log1p(mpmath.exp(mpmath.mpf(x)))))
    assert log_softplus(x) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_softplus_extremes():
    assert softplus(1e6) == 1e6
    assert softplus(-1e6) == 0.0
    assert log_softplus(-1e6) == -1e6


@given(st.floats(min_value=-700, max_value=700).filter(lambda v: abs(v) > 1e-9))
def test_log_abs_expm1(x):
    want = float(mpmath.log(abs(mpmath.expm1(mpmath.mpf(x)))))
    assert log_abs_expm1(x) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_log_abs_expm1_at_zero():
    assert log_abs_expm1(0.0) == -math.inf


@given(st.floats(min_value=-30, max_value=30), st.floats(min_value=0, max_value=2 * math.pi))
def test_log_abs_one_minus(x, psi):
    z = mpmath.exp(mpmath.mpf(x) + 1j * mpmath.mpf(psi))
    mag = abs(1 - z)
    if mag < 1e-12:
        return
    assert log_abs_one_minus(x, psi) == pytest.approx(float(mpmath.log(mag)), rel=1e-9, abs=1e-9)


def test_signed_forms_deep_underflow():
    # ln|e^x - 1| for x far below the binary64 range: sign -1, magnitude ~ e^x
    sgn, lg = signed_log_abs_expm1(-1e5)
    assert sgn == -1 and lg == pytest.approx(-1e5 + 0.5 * math.exp(-1e5), abs=1e-12)
    sgn, lg = signed_log_abs_one_minus(-1e5, math.pi)
    assert sgn == 1 and lg == pytest.approx(-1e5, abs=1e-12)
    sgn, lg = signed_log_abs_one_minus(-1e5, 0.0)
    assert sgn == -1 and lg == pytest.approx(-1e5, abs=1e-12)


def test_weighted_sum_huge_weight_times_tiny_term():
    # e^{1000} * e^{-999} = e, which neither factor can represent alone
    w = np.array([math.inf, 2.0])
    terms = np.array([[0.0, 1.0]])
    out = weighted_sum(w, terms, log_weights=np.array([1000.0, math.log(2.0)]),
                       signed_log=lambda: (np.array([[1.0, 1.0]]), np.array([[-999.0, 0.0]])))
    assert out[0] == pytest.approx(math.e + 2.0, rel=1e-12)


def test_iterated_log_and_exp():
    assert iterated_log(math.exp(math.e), 2) == pytest.approx(1.0)
    assert iterated_exp(0.0, 2) == pytest.approx(math.e)
    assert math.isnan(iterated_log(0.5, 2))
    assert iterated_log(10.0, 0) == 10.0
