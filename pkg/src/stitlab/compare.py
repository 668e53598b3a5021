"""Poisson hyperplane tessellation in a window and the model comparison
table (Poisson-Voronoi / iteration-stable / Poisson hyperplane variance
growth).  Cells of the Poisson model are never constructed; all statistics
used here are functions of the individual hyperplane sections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import ConvexPolytope, NoIntersection, section
from .measures import HyperplaneMeasureSpec, measure_hitting, sample_hitting
from . import formulas


@dataclass
class PoissonTessellation:
    window: ConvexPolytope
    t: float
    hyperplanes: list
    sections: list  # FacetPolygon per hyperplane
    total_surface: float = field(default=None)

    def __post_init__(self):
        if self.total_surface is None:
            self.total_surface = float(sum(s.area for s in self.sections))


def run_pht(
    spec: HyperplaneMeasureSpec,
    t: float,
    W: ConvexPolytope,
    rng: np.random.Generator,
) -> PoissonTessellation:
    """N ~ Poisson(t Lambda([W])) hyperplanes drawn independently from the
    normalized hitting measure."""
    lam = measure_hitting(spec, W)
    n = int(rng.poisson(t * lam))
    planes, secs = [], []
    while len(planes) < n:
        H = sample_hitting(spec, W, rng)
        try:
            F = section(W, H)
        except NoIntersection:
            continue  # tangential draw, measure zero
        planes.append(H)
        secs.append(F)
    return PoissonTessellation(W, t, planes, secs)


def pht_campbell_variance_mc(
    spec: HyperplaneMeasureSpec,
    t: float,
    W: ConvexPolytope,
    rng: np.random.Generator,
    n_samples: int = 2000,
):
    """Campbell formula for the Poisson model:
    Var(total surface) = t int_[W] Vol_{d-1}(H cap W)^2 Lambda(dH),
    evaluated by importance sampling H ~ Lambda(.)/Lambda([W]).
    Returns (estimate, standard_error)."""
    lam = measure_hitting(spec, W)
    vals = np.empty(n_samples)
    i = 0
    while i < n_samples:
        H = sample_hitting(spec, W, rng)
        try:
            F = section(W, H)
        except NoIntersection:
            continue
        vals[i] = F.area**2
        i += 1
    est = t * lam * float(vals.mean())
    se = t * lam * float(vals.std(ddof=1) / math.sqrt(n_samples))
    return est, se


def comparison_table(d: int, t: float, R_grid) -> list:
    """Asymptotic variance of the total (d-1)-surface in the ball B_R for
    the three models; rows (model, R, value, provenance)."""
    if d not in (2, 3):
        raise ValueError("d must be 2 or 3")
    rows = []
    for R in R_grid:
        if d == 2:
            rows.append(
                ("PVT", R, formulas.pvt_variance_asymptotic_planar(R),
                 "literature-constant")
            )
            rows.append(("STIT", R, formulas.variance_asymptotic(2, t, R), "analytic"))
            rows.append(
                ("PHT", R, formulas.pht_variance_asymptotic_planar(t, R), "analytic")
            )
        else:
            rows.append(("STIT", R, formulas.variance_asymptotic(3, t, R), "analytic"))
            # Var(PHT) ~ t * J(B_R) with J from the chord-square integral
            rows.append(("PHT", R, t * formulas.pht_J_ball(3, R), "analytic"))
    return rows
