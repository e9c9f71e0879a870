"""Four routes to metric regularity relative to Theta, compared on one instance."""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..coderivative import kernel, mirror_coderivative
from ..multifunction import PolyMultimap, invert
from ..polyhedra import Polyhedron
from ..rational import as_vector
from ..wellposedness import certify_lipschitz_like
from .sampling import SampleConfig, grid_linear_openness, grid_metric_regularity

# grid constant used when the exact bound is infinite: any finite value must be refuted
FAIL_KAPPA = 1e3


@dataclass(frozen=True)
class EquivalenceReport:
    inverseLipschitz: str  # verdict of the inverse map's Lipschitz-like certificate relative to Theta
    mirrorKernelTrivial: bool
    gridRegularity: bool
    gridOpenness: bool
    kappa: float
    agree: bool
    witness: dict | None = None


def regularity_equivalence(S: PolyMultimap, Theta: Polyhedron | None, base, cfg: SampleConfig | None = None,
                           margin: float = 1.05) -> EquivalenceReport:
    cfg = cfg or SampleConfig()
    x, y = as_vector(base[0]), as_vector(base[1])
    inv = certify_lipschitz_like(invert(S), Theta, (y, x))
    mirror = kernel(mirror_coderivative(S, Theta, (x, y))).isTrivial
    bound = inv.bound.value
    kappa = bound * margin if math.isfinite(bound) else FAIL_KAPPA
    reg, w1 = grid_metric_regularity(S, Theta, (x, y), kappa, cfg)
    opn, w2 = grid_linear_openness(S, Theta, (x, y), kappa, cfg)
    if inv.verdict == "inconclusive":
        agree = False
    else:
        agree = len({inv.holds, mirror, reg, opn}) == 1
    return EquivalenceReport(inv.verdict, mirror, reg, opn, kappa, agree, w1 or w2)
