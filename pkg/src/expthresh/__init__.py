"""Random covers for uniform weighted hypergraphs and the numeric checks around them."""

from .core import (
    Instance,
    REmpty,
    SubsetFamily,
    TooLarge,
    UpsetSummary,
    covers,
    load_instance,
    mask_of,
    members,
    minimal_elements,
    solve_p,
    upset_contains,
    weight_family,
    weight_g,
)
from .numerics import HypergeomLaw, LogReal, falling_factorial, hypergeom, log_binomial
from .report import ConditionReport, Verdict

__version__ = "0.1.0"
