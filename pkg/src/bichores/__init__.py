"""Fair and efficient allocation of bivalued chores via Fisher-market dynamics."""
from .ef1_solver import EF1Solution, make_init_groups, solve_ef1_fpo
from .ef_divisible import DivisibleSolution, make_init_groups_div, solve_ef_fpo, take_fractional_subset
from .errors import (
    BichoresError,
    DegenerateAllZero,
    InstanceError,
    InsufficientSpend,
    InternalBoundViolation,
    InvariantViolation,
    MalformedMarket,
    NotBivalued,
    ReplayDivergence,
    TooLarge,
)
from .flow import FlowNetwork, balanced_flow, max_flow
from .instance import NormalizedInstance, RawInstance, Regime, generate_random, normalize, parse_instance
from .market import FractionalAllocation, IntegralAllocation
from .verify import (
    AuditReport,
    Verdict,
    audit,
    brute_force_po,
    check_ef1,
    check_ef_fractional,
    check_fpo_certificate,
    check_pef,
    check_pef1,
)

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "BichoresError",
    "DegenerateAllZero",
    "DivisibleSolution",
    "EF1Solution",
    "FlowNetwork",
    "FractionalAllocation",
    "InstanceError",
    "InsufficientSpend",
    "IntegralAllocation",
    "InternalBoundViolation",
    "InvariantViolation",
    "MalformedMarket",
    "NormalizedInstance",
    "NotBivalued",
    "RawInstance",
    "Regime",
    "ReplayDivergence",
    "TooLarge",
    "Verdict",
    "audit",
    "balanced_flow",
    "brute_force_po",
    "check_ef1",
    "check_ef_fractional",
    "check_fpo_certificate",
    "check_pef",
    "check_pef1",
    "generate_random",
    "make_init_groups",
    "make_init_groups_div",
    "max_flow",
    "normalize",
    "parse_instance",
    "solve_ef1_fpo",
    "solve_ef_fpo",
    "take_fractional_subset",
]
