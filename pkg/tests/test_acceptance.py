"""Acceptance criteria, one test per criterion.

Each test prints a single ``[criterion N] PASS|FAIL`` line with its measured
values and then asserts. Run ``python3 tests/test_acceptance.py`` to get the
lines without pytest.
"""

import math
import sys
import time
from pathlib import Path

import mpmath
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from minmodlab.cartan import cartan_discs, check_outside, exceptional_intervals, verify_cover  # noqa: E402
from minmodlab.cli import render  # noqa: E402
from minmodlab.counterexamples import Check, EpsRule, build_family, verify_counterexample  # noqa: E402
from minmodlab.escape import escape_grid  # noqa: E402
from minmodlab.fatou import (HinkkanenSpec, Theorem3Spec, Theorem4Spec, Verdict, chain_witness,  # noqa: E402
                             check_condition, check_lemma21, m_orbit, reverify_lemma21, theorem4_threshold)
from minmodlab.growth import counting_B, growth_profile, growth_quantities, log_max_modulus, max_epsilon  # noqa: E402
from minmodlab.logspace import LogReal  # noqa: E402
from minmodlab.minmod import find_annulus_min_ge, find_good_radius, verify_theorem2  # noqa: E402
from minmodlab.zeros import ZeroEntry, ZeroSet, e_m_squared, single_zero  # noqa: E402

from oracles import quadrature_quantities, random_zeroset  # noqa: E402

SEED = 20240611


def report(capsys, number, passed, detail):
    line = f"[criterion {number}] {'PASS' if passed else 'FAIL'}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return passed


def random_common_ray(rng, max_entries=20):
    return random_zeroset(rng, max_entries=max_entries, angle=float(rng.uniform(0, 2 * math.pi)))


# -- criteria ----------------------------------------------------------------------


def criterion_1():
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        z = random_zeroset(rng, max_entries=50, decades=6.0)
        s = float(rng.uniform(-1.0, 6 * math.log(10) + 1.0))
        oracle = quadrature_quantities(z, s)
        q = growth_quantities(z, LogReal(s))
        for name, val in oracle.items():
            got = getattr(q, name)
            worst = max(worst, abs(got - val) / abs(val) if val else abs(got))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10.0
    return ok, f"max relative deviation {worst:.3e} (tol 1e-9), {elapsed:.2f} s (limit 10 s)"


def criterion_2():
    rng = np.random.default_rng(SEED + 1)
    failures = 0
    for i in range(1000):
        common = i % 2 == 0
        z = random_common_ray(rng) if common else random_zeroset(rng, max_entries=20)
        s = float(rng.uniform(-3.0, 6 * math.log(10) + 3.0))
        q = growth_quantities(z, LogReal(s))
        failures += bool(q.violations(1e-12))
        if common:
            if s > z.log_radii[0] and not q.N < log_max_modulus(z, LogReal(s)):
                failures += 1  # (a)
            if not q.n < float(counting_B(z, s + math.log(3.0))[0]):
                failures += 1  # (b) with log M(3r) = B(3r) on a ray
    return failures == 0, f"{failures} failures over 1000 (zeroset, r) pairs, slack 1e-12*(1+magnitude)"


def mp_log_abs_f(z: ZeroSet, s: float, phi: float) -> float:
    with mpmath.workdps(40):
        w = mpmath.exp(mpmath.mpf(s) + 1j * mpmath.mpf(phi))
        return float(mpmath.fsum(k * mpmath.log(abs(1 - w / mpmath.exp(lr + 1j * mpmath.mpf(a))))
                                 for k, lr, a in zip(z.mults, z.log_radii, z.angles)))


def criterion_3():
    rng = np.random.default_rng(SEED + 2)
    fixtures = [e_m_squared(30), e_m_squared(30, angle=1.0)] + [random_common_ray(rng) for _ in range(3)]
    worst = 0.0
    for i in range(500):
        z = fixtures[i % len(fixtures)]
        s = float(rng.uniform(-2.0, 40.0))
        B = float(counting_B(z, s)[0])
        lM = log_max_modulus(z, LogReal(s))
        # direct evaluation at the antipode of the common ray
        direct = mp_log_abs_f(z, s, z.common_angle + math.pi)
        worst = max(worst, abs(B - lM) / B, abs(B - direct) / B)
    return worst <= 1e-12, f"max |B - ln M|/B = {worst:.3e} over 500 radii (tol 1e-12)"


def criterion_4():
    rng = np.random.default_rng(SEED + 3)
    start = time.perf_counter()
    bad = []
    for i in range(200):
        m = int(rng.integers(1, 13))
        pts = rng.uniform(-1, 1, m) + 1j * rng.uniform(-1, 1, m)
        h = float(rng.uniform(0.01, 1.0))
        c = cartan_discs(pts, h)
        ok = len(c.discs) <= m and c.radius_sum <= 2 * math.e * h * (1 + 1e-12)
        ok = ok and verify_cover(pts, h, c, h / 50).passed
        if not ok:
            bad.append(i)
    elapsed = time.perf_counter() - start
    return not bad and elapsed < 60.0, f"{len(bad)} of 200 sets failed, {elapsed:.1f} s (limit 60 s)"


def criterion_5():
    z = e_m_squared(30)
    parts, ok = [], True
    for S in (10.0, 20.0):
        res = exceptional_intervals(z, LogReal(S), 0.125)
        chk = check_outside(z, res, samples=10_000)
        ok = ok and res.within_budget and chk.passed and chk.samples == 10_000
        parts.append(f"R=e^{S:g}: length/R {res.intervals.total_fraction:.5f} <= 0.125, bound {res.bound:.6f}, "
                     f"min margin {chk.min_margin:.4f} at 1e4 radii")
    return ok, "; ".join(parts)


def criterion_6():
    z = e_m_squared(120)
    r = LogReal(1e4)
    eps = growth_profile(z, r, 0.5).epsilon
    mu, nu = math.sqrt(eps), 3 * math.sqrt(eps)
    rep = find_good_radius(z, r, 0.5, mu, nu)
    thm = verify_theorem2(z, r, 0.5, 0.125, mu, nu, samples=100_000)
    ok = nu <= 0.25 and rep.ratio_aB <= nu and rep.ratio_QN <= 8 * nu and thm.passed
    tag = "vacuous" if thm.vacuous else "non-vacuous"
    return ok, (f"nu={nu:.6f}<=1/4, ln R={rep.R.log_value:.6f}, a/B={rep.ratio_aB:.4e}<=nu, "
                f"Q/N={rep.ratio_QN:.4e}<=8nu, violating length/R={thm.violating_fraction:.2e}<=1/8, "
                f"threshold factor {thm.threshold_factor!r} ({tag})")


def criterion_7():
    z = e_m_squared(120)
    orbit = m_orbit(z, 100.0, 3)
    c = [2.0] * 4
    rep = check_lemma21(z, orbit, c)
    rechecked = reverify_lemma21(z, orbit, c, rep) if rep.passed else []
    w = chain_witness(z, LogReal(1e4))
    chain = w.ratio > 1 - 230 * math.sqrt(w.epsilon_n)
    ok = rep.passed and len(rep.witnesses) == 2 and all(rechecked) and chain
    return ok, (f"ln rho = {', '.join(f'{v:.6f}' for v in rep.witnesses)} re-verified {rechecked}; "
                f"ln m(t)/ln M(t) = {w.ratio:.15f} > 1 - 230 sqrt(eps) = {1 - 230 * math.sqrt(w.epsilon_n):.4f}")


def criterion_8():
    spec = build_family(4.0, EpsRule.inv_sqrt(), 3)
    t1, t2 = spec.terms[0], spec.terms[1]
    terms_ok = (t1.k_exact == 2 and t1.eps == 0.5 and t2.k_exact == 55 and abs(t2.log_r - 11.3345) <= 1e-3)
    order = verify_counterexample(spec, Check.ORDER_ZERO, samples=64)
    l62 = verify_counterexample(spec, Check.LEMMA_6_2, k=2, L=2.0)
    sums = verify_counterexample(spec, Check.SUM_DIVERGES, sum_terms=10).values["partial_sums"]
    v = l62.values
    clauses = {
        "terms": terms_ok,
        "certificates": spec.all_certified,
        "order_zero": order.passed,
        "max_lower@k=2": v["max_lower"],
        "min_upper@k=2": v["min_upper"],
        "sum>1.5@K=10": sums[-1] > 1.5,
    }
    failed = [k for k, ok in clauses.items() if not ok]
    detail = (f"clauses {clauses}; max_lower margin {v['max_lower_margin']:.4f}, min_upper margin {v['min_upper_margin']:.4f}, "
              f"side conditions {v['side_conditions']}, max ratio {v['max_ratio']:.4f} <= bound {v['bound']:.4f}, "
              f"partial sum {sums[-1]:.4f}")
    if failed:
        detail += f"; failing: {', '.join(failed)}"
    return not failed, detail


def criterion_9():
    z = e_m_squared(120)
    orbit = m_orbit(z, 100.0, 4)
    thr = theorem4_threshold(z, 1, 1.5, orbit.log_R[-1])
    em = check_condition(z, orbit, Theorem4Spec(m=1, s_lo=thr, s_hi=orbit.log_R[-1]))
    spec = build_family(4.0, EpsRule.inv_sqrt(), 3)
    fam = spec.to_zeroset()
    r2 = spec.terms[1].log_r
    at_r2 = check_condition(fam, m_orbit(fam, r2, 1), Theorem4Spec(m=1, s_lo=r2, s_hi=r2))
    margin = at_r2.witnesses[0][1] if at_r2.witnesses else math.nan
    ok = em.verdict is Verdict.SATISFIED_ON_WINDOW and at_r2.verdict is Verdict.VIOLATED
    return ok, (f"e^(m^2) above threshold ln r={thr:g}: {em.verdict.value}; "
                f"family at ln r_2={r2:.6f}: {at_r2.verdict.value} (margin {margin:.6f}, expected VIOLATED)")


def criterion_10():
    square = single_zero(1.0, 2, 0.0)
    em = e_m_squared(120)
    pts = np.exp(2j * np.pi * np.arange(7) / 7) * np.linspace(0.5, 1.5, 7)
    eps = growth_profile(em, LogReal(1e4), 0.5).epsilon
    mu, nu = math.sqrt(eps), 3 * math.sqrt(eps)
    orbit = m_orbit(em, 100.0, 4)
    jobs = {
        "escape_grid": lambda w: escape_grid(square, (-2, 2, -2, 2), (120, 90), 40, workers=w).to_csv(),
        "verify_cover": lambda w: render(verify_cover(pts, 0.1, cartan_discs(pts, 0.1), 0.002, workers=w).__dict__),
        "check_condition": lambda w: render([check_condition(em, orbit, spec, workers=w).__dict__
                                             for spec in (HinkkanenSpec(2.0, 1.0, 1.0), Theorem3Spec(),
                                                          Theorem4Spec(m=1))]),
        "find_good_radius": lambda w: render(find_good_radius(em, LogReal(1e4), 0.5, mu, nu).__dict__),
        "verify_theorem2": lambda w: render(verify_theorem2(em, LogReal(1e4), 0.5, 0.125, mu, nu, 20_000).__dict__),
        "find_annulus": lambda w: render(find_annulus_min_ge(em, LogReal(150.0), 700.0, 2.0)),
        "max_epsilon": lambda w: render(max_epsilon(em, 100.0, 200.0)),
    }
    bad = []
    for name, job in jobs.items():
        outs = {job(w) for w in (1, 4, 8) for _ in range(3)}
        if len(outs) != 1:
            bad.append(name)
    return not bad, f"{len(jobs) - len(bad)} of {len(jobs)} outputs byte-identical over 3 runs x workers 1/4/8" + (
        f"; differing: {bad}" if bad else "")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("number", range(1, 11))
def test_criterion(capsys, number):
    passed, detail = CRITERIA[number - 1]()
    report(capsys, number, passed, detail)
    assert passed, detail


if __name__ == "__main__":
    results = [report(None, i, *fn()) for i, fn in enumerate(CRITERIA, start=1)]
    sys.exit(0 if all(results) else 1)
