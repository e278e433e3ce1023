"""Whitney extension of C^m jets on finite point sets.

Library layout:

- ``jets``       multi-index arithmetic and truncated Taylor polynomials
- ``fields``     Whitney fields over finite E, the C^m(E) norm, generators
- ``cutoff``     smooth step, interval/cube cutoffs and their derivatives
- ``cubes``      dyadic Whitney decomposition queries with shifted origin
- ``extension``  the single-origin extension operator and its derivatives
- ``averaging``  the origin-averaged operator (seeded Monte Carlo)
- ``harness``    experiment drivers, invariant suites, report emission
- ``plots``      figure rendering for the report path
- ``cli``        the ``whitney`` command-line front end
"""

from .jets import Jet, MultiIndex, diff_jet, eval_jet, recenter_jet, sum_reciprocal_factorials
from .fields import SmoothTestFunction, WhitneyField, cm_norm, restrict
from .cutoff import CutoffParams, SigmaProfile, psi
from .cubes import DistanceOracle, DyadicCube, whitney_cube_at
from .extension import ExtensionConfig, eval_extension, eval_extension_deriv
from .averaging import AveragingPlan, averaged_extension, period_at

__all__ = [
    "Jet", "MultiIndex", "diff_jet", "eval_jet", "recenter_jet",
    "sum_reciprocal_factorials",
    "SmoothTestFunction", "WhitneyField", "cm_norm", "restrict",
    "CutoffParams", "SigmaProfile", "psi",
    "DistanceOracle", "DyadicCube", "whitney_cube_at",
    "ExtensionConfig", "eval_extension", "eval_extension_deriv",
    "AveragingPlan", "averaged_extension", "period_at",
]

__version__ = "0.1.0"
