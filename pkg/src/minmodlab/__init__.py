"""Numerical laboratory for entire functions of small growth given by their zeros."""

from .cartan import cartan_discs, check_outside, exceptional_intervals, verify_cover
from .counterexamples import Check, EpsRule, build_family, verify_counterexample
from .errors import MinModError, NotFoundError, ParseError, PreconditionError
from .escape import escape_grid
from .fatou import (
    HinkkanenSpec,
    Theorem1Spec,
    Theorem3Spec,
    Theorem4Spec,
    Verdict,
    check_condition,
    check_lemma21,
    check_regularity,
    m_orbit,
)
from .growth import (
    growth_profile,
    growth_quantities,
    log_log_max_modulus,
    log_max_modulus,
    log_min_modulus,
    tail_bound,
)
from .io import parse_points, parse_zeroset, write_points, write_zeroset
from .logspace import LogReal
from .minmod import find_annulus_min_ge, find_good_radius, verify_theorem2
from .zeros import ZeroEntry, ZeroSet

__version__ = "0.1.0"
