import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from minmodlab.errors import MinModError
from minmodlab.fatou import (ConditionId, CriterionReport, HinkkanenSpec, StopReason, Theorem1Spec, Theorem3Spec,
                             Theorem4Spec, Verdict, chain_witness, check_condition, check_lemma21,
                             check_regularity, check_theorem6_growth, log_derivative_probe, m_orbit, ratio_probe,
                             regularity_threshold, reverify_lemma21, theorem4_threshold, theorem6_psi, zeros_log_M)
from minmodlab.growth import counting_B, growth_profile
from minmodlab.logspace import LogReal
from minmodlab.zeros import single_zero

from oracles import mp_log_max_modulus_ray

ORBIT_EM120 = (100.0, 615.693147186921, 9876.635623281842, 649436.9267049022)
WITNESS_EM120 = (156.78219184382507, 973.2022984381485, 15684.115445081707)
EPS_N_EM120 = (0.06422748701738155, 0.014939141763744038, 0.0013551032467259327)


@pytest.fixture(scope="module")
def orbit120(em120):
    return m_orbit(em120, 100.0, 4)


def quarter_order(s):
    """ln M(r) = r^{1/4}, as a map ln r -> ln M(r)."""
    return math.exp(s / 4.0)


def test_orbit_one_plus_z():
    o = m_orbit(single_zero(1.0, 1, math.pi), 0.0, 6)
    assert np.allclose(np.exp(o.log_R), [1, 2, 3, 4, 5, 6], rtol=1e-13)
    assert o.stopped_reason is StopReason.STEPS_DONE and o.increasing


def test_orbit_em120_against_summation(em120, orbit120):
    assert orbit120.log_R == pytest.approx(ORBIT_EM120, rel=1e-13)
    for a, b in zip(orbit120.log_R, orbit120.log_R[1:]):
        assert b == pytest.approx(mp_log_max_modulus_ray(em120, a), rel=1e-12)


def test_orbit_can_decrease_below_first_zero():
    o = m_orbit(single_zero(math.exp(10.0), 1, math.pi), 5.0, 3)
    assert o.stopped_reason is StopReason.STEPS_DONE
    assert not o.increasing


def test_orbit_overflow_cap():
    o = m_orbit(single_zero(1.0, 5, math.pi), 1e307, 5)
    assert o.stopped_reason is StopReason.LOG_OVERFLOW
    # 5e307 still fits under MAX_LOG/2; the next step would not
    assert o.log_R == (1e307, 5e307)


def test_lemma21_em120(em120, orbit120):
    rep = check_lemma21(em120, orbit120, [2.0] * 5)
    assert rep.passed
    assert rep.witnesses == pytest.approx(WITNESS_EM120, rel=1e-12)
    assert all(reverify_lemma21(em120, orbit120, [2.0] * 5, rep))


def test_lemma21_target_above_ceiling(em120, orbit120):
    # c(2) large enough that c(2) ln R_2 exceeds B(R_1^{c(1)}) >= ln m
    ceiling = float(counting_B(em120, 2.0 * orbit120.log_R[0])[0])
    c2 = 1.01 * ceiling / orbit120.log_R[1]
    rep = check_lemma21(em120, orbit120, [2.0, c2, 2.0, 2.0, 2.0])
    assert not rep.passed and rep.failed_step == 1


def test_lemma21_polynomial_fails():
    f = single_zero(1.0, 1, math.pi)
    rep = check_lemma21(f, m_orbit(f, math.log(2.0), 3), [2.0] * 4)
    assert not rep.passed and rep.failed_step == 1
    # starting at R_1 = 1 the annulus (1, 1) is empty
    rep = check_lemma21(f, m_orbit(f, 0.0, 3), [2.0] * 4)
    assert not rep.passed and rep.failed_step == 1


def test_lemma21_parameter_errors(em120, orbit120):
    with pytest.raises(MinModError):
        check_lemma21(em120, orbit120, [1.0] * 5)
    with pytest.raises(MinModError):
        check_lemma21(em120, orbit120, [2.0])


def test_theorem3_em120(em120, orbit120):
    rep = check_condition(em120, orbit120, Theorem3Spec())
    assert rep.condition_id is ConditionId.THEOREM3
    assert rep.details["epsilon_n"] == pytest.approx(EPS_N_EM120, rel=1e-12)
    sums = np.cumsum(np.sqrt(EPS_N_EM120))
    assert rep.partial_sums == pytest.approx(tuple(sums), rel=1e-12)
    assert all(rep.details["log_R_exceeds_2_pow_n"])
    assert rep.details["chain_a_n"][0] > 0
    # eps_1 is attained at the left endpoint ln R_1 = 100
    assert EPS_N_EM120[0] == pytest.approx(growth_profile(em120, LogReal(100.0), 0.5).epsilon, rel=1e-13)


def test_theorem1_em120(em120, orbit120):
    rep = check_condition(em120, orbit120, Theorem1Spec(L=2.0))
    assert rep.condition_id is ConditionId.THEOREM1
    assert len(rep.partial_sums) == 3
    assert all(a >= 0 for a in rep.details["a_n"])
    assert rep.verdict is not Verdict.VIOLATED


def test_hinkkanen_polynomial_report():
    f = single_zero(1.0, 1, math.pi)
    rep = check_condition(f, m_orbit(f, math.log(2.0), 3), HinkkanenSpec(L=2.0, C=1.0, delta=1.0))
    assert rep.condition_id is ConditionId.HINKKANEN
    assert rep.witnesses


def test_hinkkanen_em120(em120, orbit120):
    rep = check_condition(em120, orbit120, HinkkanenSpec(L=2.0, C=1.0, delta=1.0))
    assert rep.verdict is Verdict.SATISFIED_ON_WINDOW


@pytest.mark.parametrize("m,threshold", [(1, 1.5), (2, 2.721814267246517), (3, 15.166273953115011)])
def test_theorem4_threshold_em120(em120, orbit120, m, threshold):
    assert theorem4_threshold(em120, m, 1.5, orbit120.log_R[-1]) == pytest.approx(threshold, rel=1e-12)
    rep = check_condition(em120, orbit120, Theorem4Spec(m=m))
    assert rep.verdict is Verdict.SATISFIED_ON_WINDOW


def test_theorem4_rejects_bad_m(em120, orbit120):
    with pytest.raises(MinModError):
        check_condition(em120, orbit120, Theorem4Spec(m=0))


def test_violated_report_needs_witness():
    with pytest.raises(MinModError):
        CriterionReport(ConditionId.THEOREM4, Verdict.VIOLATED)


def test_chain_witness_em120(em120):
    w = chain_witness(em120, LogReal(1e4))
    assert w.holds
    assert w.ratio > 1 - 230 * math.sqrt(w.epsilon_n)
    assert w.log_R - math.log(4) <= w.log_t <= w.log_R - math.log(2)


def test_regularity_quarter_order():
    grid = np.linspace(0.5, 20.0, 400)
    rep = check_regularity(quarter_order, lambda s: 2.0 * s, 2.0, grid)
    assert rep.verdict is Verdict.VIOLATED
    thr = regularity_threshold(rep, grid)
    # e^{s/2} >= 4 e^{s/4} exactly when s >= 4 ln 4
    assert thr >= 4 * math.log(4) and thr - 4 * math.log(4) <= grid[1] - grid[0]
    tail = check_regularity(quarter_order, lambda s: 2.0 * s, 2.0, grid[grid >= thr])
    assert tail.verdict is Verdict.SATISFIED_ON_WINDOW


def test_regularity_identity_psi_violated(em120):
    rep = check_regularity(zeros_log_M(em120), lambda s: s, 1.5, [10.0, 100.0, 1000.0])
    assert rep.verdict is Verdict.VIOLATED and len(rep.witnesses) == 3


def test_regularity_psi_below_identity():
    with pytest.raises(MinModError) as exc:
        check_regularity(quarter_order, lambda s: 0.5 * s, 2.0, [4.0])
    assert exc.value.code == "PSI_BELOW_IDENTITY"


@given(st.floats(1.01, 4.0), st.floats(0.0, 3.0))
def test_regularity_monotone_in_m(m, extra):
    grid = np.linspace(1.0, 30.0, 60)
    lo = check_regularity(quarter_order, lambda s: 2.0 * s, m, grid)
    hi = check_regularity(quarter_order, lambda s: 2.0 * s, m + extra, grid)
    if lo.verdict is Verdict.VIOLATED:
        assert hi.verdict is Verdict.VIOLATED


def test_theorem6_builder():
    psi = theorem6_psi(1, 3.0, 0.5)
    assert psi(2.0) == pytest.approx(8.0)
    with pytest.raises(MinModError):
        theorem6_psi(1, 1.5, 0.5)
    rep = check_theorem6_growth(lambda s: math.exp(s ** 0.6), 1, 0.5, np.linspace(1.0, 50.0, 50))
    assert rep.verdict is Verdict.SATISFIED_ON_WINDOW


def test_ratio_probe_quarter_order():
    rep = ratio_probe(quarter_order, np.linspace(10.0, 40.0, 30))
    assert rep.verdict is Verdict.SATISFIED_ON_WINDOW
    assert rep.details["limit_estimate"] == pytest.approx(2 ** 0.25, rel=1e-12)


def test_log_derivative_probe():
    x = np.linspace(1.0, 40.0, 79)
    rep = log_derivative_probe(quarter_order, x, 1.0)
    assert rep.verdict is Verdict.VIOLATED
    assert all(w[0] < 8.0 + 1e-6 for w in rep.witnesses)
    ok = log_derivative_probe(quarter_order, x[x > 8.0], 1.0)
    assert ok.verdict is Verdict.SATISFIED_ON_WINDOW
    assert ok.details["spacing"] == 1e-3
