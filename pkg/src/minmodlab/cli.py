"""Command-line interface: ``minmodlab <subcommand> ...``.

Results are printed as JSON-like text with reals at 17 significant digits.
Exit codes: 0 PASS/OK, 1 FAIL/VIOLATED, 2 usage or input error,
3 INCONCLUSIVE/NOT_FOUND.
"""

from __future__ import annotations

import argparse
import enum
import math
import sys
from pathlib import Path

import numpy as np

from . import cartan, counterexamples as cx, escape, fatou, growth, io, minmod
from .errors import MinModError, NotFoundError
from .logspace import LogReal

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


def render(obj, indent: int = 0) -> str:
    """JSON-like text; floats at 17 significant digits, non-finite as strings."""
    pad = "  " * (indent + 1)
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return '"%s"' % x if not math.isfinite(x) else "%.17g" % x
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, enum.Enum):
        return '"%s"' % obj.value
    if isinstance(obj, LogReal):
        return render(obj.log_value, indent)
    if isinstance(obj, complex):
        return render([obj.real, obj.imag], indent)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}{render(str(k))}: {render(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(render(v, indent + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + render(v, indent + 1) for v in seq) + "\n" + "  " * indent + "]"
    return render(str(obj))


def _emit(obj) -> None:
    sys.stdout.write(render(obj) + "\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from None


def _zeros(path: str):
    return io.parse_zeroset(Path(path).read_text())


# -- subcommands ---------------------------------------------------------------------


def cmd_quantities(a) -> int:
    z = _zeros(a.zeros)
    r = LogReal(a.log_r)
    q = growth.growth_quantities(z, r)
    lM, fM = growth.log_max_modulus(z, r, with_flag=True)
    lm, fm = growth.log_min_modulus(z, r, with_flag=True)
    _emit({"log_r": a.log_r, "n": q.n, "N": q.N, "Q": q.Q, "B": q.B, "a": q.a,
           "log_M": lM, "log_M_kind": fM, "log_m": lm, "log_m_kind": fm})
    return EXIT_OK


def cmd_profile(a) -> int:
    p = growth.growth_profile(_zeros(a.zeros), LogReal(a.log_r), a.alpha)
    _emit({"epsilon": p.epsilon, "delta": p.delta, "delta_at": p.delta_at,
           "order_estimate": p.order_estimate, "type_class": p.type_class, "window": p.window})
    return EXIT_OK


def cmd_cartan(a) -> int:
    pts = io.parse_points(Path(a.points).read_text())
    cov = cartan.cartan_discs(pts, a.h)
    out = {"h": a.h, "point_count": cov.point_count, "radius_sum": cov.radius_sum,
           "bound_2eh": 2 * math.e * a.h,
           "discs": [{"center": d.center, "radius": d.radius} for d in cov.discs]}
    code = EXIT_OK
    if a.verify:
        rep = cartan.verify_cover(pts, a.h, cov, a.grid_step if a.grid_step else a.h / 50)
        out["verify"] = {"passed": rep.passed, "log_min_product": rep.log_min_product,
                         "log_level": rep.log_level, "grid_points": rep.grid_points,
                         "witness": rep.witness}
        code = EXIT_OK if rep.passed else EXIT_FAIL
    _emit(out)
    return code


def cmd_exceptional(a) -> int:
    res = cartan.exceptional_intervals(_zeros(a.zeros), LogReal(a.log_R), a.eta)
    _emit({"log_R": a.log_R, "eta": a.eta, "intervals_over_R": res.intervals.intervals,
           "total_fraction": res.intervals.total_fraction, "within_budget": res.within_budget,
           "bound": res.bound, "N": res.N, "Q": res.Q, "point_count": res.point_count})
    return EXIT_OK if res.within_budget else EXIT_FAIL


def _good_radius_dict(rep: minmod.GoodRadiusReport) -> dict:
    return {"log_r": rep.r, "log_R": rep.R, "ratio_aB": rep.ratio_aB, "ratio_QN": rep.ratio_QN,
            "interval": rep.interval, "epsilon": rep.epsilon, "delta": rep.delta,
            "mu": rep.mu, "nu": rep.nu, "alpha": rep.alpha}


def cmd_good_radius(a) -> int:
    rep = minmod.find_good_radius(_zeros(a.zeros), LogReal(a.log_r), a.alpha, a.mu, a.nu)
    _emit(_good_radius_dict(rep))
    return EXIT_OK


def cmd_verify_thm2(a) -> int:
    rep = minmod.verify_theorem2(_zeros(a.zeros), LogReal(a.log_r), a.alpha, a.eta, a.mu, a.nu, a.samples)
    _emit({"passed": rep.passed, "log_R": rep.R, "threshold_factor": rep.threshold_factor,
           "vacuous": rep.vacuous, "violating_fraction": rep.violating_fraction,
           "log_violating_length": rep.log_violating_length, "eta": rep.eta,
           "samples": rep.sampled_points, "cell_bounds_certified": rep.rigorous,
           "good_radius": _good_radius_dict(rep.good_radius)})
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_orbit(a) -> int:
    z = _zeros(a.zeros)
    orb = fatou.m_orbit(z, a.log_r0, a.steps)
    out = {"log_R": orb.log_R, "stopped_reason": orb.stopped_reason, "increasing": orb.increasing}
    code = EXIT_OK
    if a.lemma21:
        c = a.c if a.c else [2.0]
        if len(c) == 1:
            c = c * len(orb.log_R)
        rep = fatou.check_lemma21(z, orb, c)
        out["lemma21"] = {"passed": rep.passed, "log_rho": rep.witnesses, "targets": rep.targets,
                          "failed_step": rep.failed_step, "diagnostic": rep.diagnostic}
        code = EXIT_OK if rep.passed else EXIT_FAIL
    _emit(out)
    return code


def _verdict_code(v: fatou.Verdict) -> int:
    return {fatou.Verdict.SATISFIED_ON_WINDOW: EXIT_OK, fatou.Verdict.VIOLATED: EXIT_FAIL,
            fatou.Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}[v]


def cmd_check(a) -> int:
    z = _zeros(a.zeros)
    cond = a.condition
    if cond in ("thm1", "hinkkanen", "thm3", "thm4"):
        orb = fatou.m_orbit(z, a.log_r0, a.steps)
        spec = {
            "thm1": lambda: fatou.Theorem1Spec(L=a.L, points_per_window=a.points),
            "hinkkanen": lambda: fatou.HinkkanenSpec(L=a.L, C=a.C, delta=a.delta, points_per_window=a.points),
            "thm3": lambda: fatou.Theorem3Spec(per_decade=a.per_decade),
            "thm4": lambda: fatou.Theorem4Spec(m=int(a.m), s_lo=a.s_lo, s_hi=a.s_hi, per_decade=a.per_decade),
        }[cond]()
        rep = fatou.check_condition(z, orb, spec, workers=a.workers)
    else:
        logM = fatou.zeros_log_M(z)
        lo = a.s_lo if a.s_lo is not None else 2.0
        hi = a.s_hi if a.s_hi is not None else 100.0
        grid = list(np.linspace(lo, hi, a.points))
        if cond == "thm5":
            p = a.p
            rep = fatou.check_regularity(logM, lambda s: p * s, a.m, grid)
        elif cond == "thm6":
            fatou.theorem6_psi(a.n, a.p, a.q)
            rep = fatou.check_theorem6_growth(logM, a.n, a.q, grid)
        elif cond == "c72":
            rep = fatou.ratio_probe(logM, grid)
        else:
            rep = fatou.log_derivative_probe(logM, grid, a.c)
    _emit({"condition": rep.condition_id, "verdict": rep.verdict, "witnesses": rep.witnesses[:64],
           "witness_count": len(rep.witnesses), "partial_sums": rep.partial_sums, "details": rep.details})
    return _verdict_code(rep.verdict)


def cmd_build_cex(a) -> int:
    rule = cx.EpsRule.inv_sqrt() if a.rule == "invsqrt" else cx.EpsRule.inv_linear(a.c)
    spec = cx.build_family(float(a.r1), rule, a.terms)
    Path(a.output).write_text(io.write_counterexample(spec))
    _emit({"rule": rule.label(), "terms": [{"log_r": t.log_r, "log_k": t.log_k, "eps": t.eps,
                                            "k_exact": t.k_exact} for t in spec.terms],
           "certificates": spec.certificates, "truncated": spec.truncated, "output": a.output})
    return EXIT_OK if spec.all_certified else EXIT_FAIL


CHECKS = {"order0": cx.Check.ORDER_ZERO, "l62": cx.Check.LEMMA_6_2, "l63": cx.Check.LEMMA_6_3,
          "sum": cx.Check.SUM_DIVERGES, "c610": cx.Check.COND_6_10}


def cmd_verify_cex(a) -> int:
    spec = io.parse_counterexample(Path(a.spec).read_text())
    rep = cx.verify_counterexample(spec, CHECKS[a.check], k=a.k, L=a.L)
    _emit({"check": rep.check, "passed": rep.passed, "values": rep.values})
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_escape_grid(a) -> int:
    if len(a.window) != 4 or len(a.res) != 2:
        raise MinModError("INVALID_PARAMETER", "--window needs 4 values and --res needs 2")
    g = escape.escape_grid(_zeros(a.zeros), a.window, [int(v) for v in a.res], a.nmax,
                           a.escape_log_radius, a.budget, a.workers)
    Path(a.out).write_text(g.to_pgm() if a.pgm else g.to_csv())
    _emit({"out": a.out, "format": "pgm" if a.pgm else "csv", "escape_log_radius": g.escape_log_radius,
           "certified": g.certified, "truncation_error": g.truncation_error, "terms_used": g.terms_used,
           "escaped": int(np.count_nonzero(g.escape_iteration >= 0)),
           "not_escaped": int(np.count_nonzero(g.escape_iteration < 0))})
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="minmodlab", description="Growth and minimum-modulus laboratory.")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("quantities", help="n, N, Q, B, a and ln M, ln m at one radius")
    s.add_argument("--zeros", required=True)
    s.add_argument("--log-r", type=float, required=True)
    s.set_defaults(fn=cmd_quantities)

    s = sub.add_parser("profile", help="epsilon, delta and order/type estimates")
    s.add_argument("--zeros", required=True)
    s.add_argument("--log-r", type=float, required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.set_defaults(fn=cmd_profile)

    s = sub.add_parser("cartan", help="constructive disc cover of a point set")
    s.add_argument("--points", required=True)
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--verify", action="store_true")
    s.add_argument("--grid-step", type=float)
    s.set_defaults(fn=cmd_cartan)

    s = sub.add_parser("exceptional", help="exceptional radii in [0, R/2]")
    s.add_argument("--zeros", required=True)
    s.add_argument("--log-R", type=float, required=True)
    s.add_argument("--eta", type=float, required=True)
    s.set_defaults(fn=cmd_exceptional)

    s = sub.add_parser("good-radius", help="radius R with a(R)/B(R) <= nu")
    for flag in ("--log-r", "--alpha", "--mu", "--nu"):
        s.add_argument(flag, type=float, required=True)
    s.add_argument("--zeros", required=True)
    s.set_defaults(fn=cmd_good_radius)

    s = sub.add_parser("verify-thm2", help="violating length of the min/max inequality")
    for flag in ("--log-r", "--alpha", "--eta", "--mu", "--nu"):
        s.add_argument(flag, type=float, required=True)
    s.add_argument("--zeros", required=True)
    s.add_argument("--samples", type=int, default=100_000)
    s.set_defaults(fn=cmd_verify_thm2)

    s = sub.add_parser("orbit", help="M-orbit and the annulus witnesses")
    s.add_argument("--zeros", required=True)
    s.add_argument("--log-r0", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--lemma21", action="store_true")
    s.add_argument("--c", type=_floats)
    s.set_defaults(fn=cmd_orbit)

    s = sub.add_parser("check", help="evaluate a growth condition on a finite window")
    s.add_argument("--zeros", required=True)
    s.add_argument("--condition", required=True,
                   choices=["thm1", "hinkkanen", "thm3", "thm4", "thm5", "thm6", "c72", "c73"])
    s.add_argument("--log-r0", type=float, default=100.0, help="orbit start (orbit-based conditions)")
    s.add_argument("--steps", type=int, default=4)
    s.add_argument("--L", type=float, default=2.0)
    s.add_argument("--C", type=float, default=1.0)
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--m", type=float, default=1.0)
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--q", type=float, default=0.5)
    s.add_argument("--c", type=float, default=0.5)
    s.add_argument("--s-lo", type=float)
    s.add_argument("--s-hi", type=float)
    s.add_argument("--points", type=int, default=32)
    s.add_argument("--per-decade", type=int, default=64)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("build-cex", help="build the order-zero counterexample family")
    s.add_argument("--r1", type=float, required=True)
    s.add_argument("--rule", choices=["invsqrt", "invlinear"], required=True)
    s.add_argument("--c", type=float, default=0.9, help="constant for invlinear")
    s.add_argument("--terms", type=int, required=True)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(fn=cmd_build_cex)

    s = sub.add_parser("verify-cex", help="verify a counterexample property")
    s.add_argument("--spec", required=True)
    s.add_argument("--check", choices=sorted(CHECKS), required=True)
    s.add_argument("--L", type=float, default=2.0)
    s.add_argument("--k", type=int, default=2)
    s.set_defaults(fn=cmd_verify_cex)

    s = sub.add_parser("escape-grid", help="escape-time grid of the truncated product")
    s.add_argument("--zeros", required=True)
    s.add_argument("--window", type=_floats, required=True)
    s.add_argument("--res", type=_floats, required=True)
    s.add_argument("--nmax", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--pgm", action="store_true")
    s.add_argument("--escape-log-radius", type=float)
    s.add_argument("--budget", type=float, default=1e-6)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(fn=cmd_escape_grid)
    return p


VALUE_FLAGS = ("--window",)


def _join_negative_values(argv: list[str]) -> list[str]:
    """Let ``--window -2,2,-2,2`` through: argparse would read the value as a flag."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        return args.fn(args)
    except NotFoundError as exc:
        sys.stderr.write(render({"error": exc.code, "message": str(exc), "diagnostic": exc.diagnostic}) + "\n")
        return EXIT_INCONCLUSIVE
    except (MinModError, OSError) as exc:
        sys.stderr.write(render({"error": getattr(exc, "code", "IO_ERROR"), "message": str(exc)}) + "\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
