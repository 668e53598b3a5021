"""Closed-form first- and second-order quantities for the stationary
isotropic tessellation with surface intensity t, plus the exact variance
integral, the scaling-limit variance factors and the Poisson-hyperplane
comparison formulas.

Everything here is a pure function of (d, k, j, t, ...) evaluated through
Gamma functions; divergent moments are reported as +inf through
FormulaResult rather than raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    ConvexPolytope,
    exp_integral_Ei_neg,
    lower_incomplete_gamma,
    quad_1d,
    segment_measure_constant,
    set_covariance_ball,
    unit_ball_volume,
)
from .measures import HyperplaneMeasureSpec, segment_measure

EULER_GAMMA = float(np.euler_gamma)

# Literature constants quoted to the published precision (not derived here).
TAU1_PVT_2D = 1.0445685  # planar Poisson-Voronoi variance constant
I2_UNIT_CUBE_3D = 3.7557  # chord-square integral of the unit cube


@dataclass(frozen=True)
class FormulaResult:
    value: float
    exists: bool = True

    def __float__(self):
        return self.value

    @staticmethod
    def finite(v: float) -> "FormulaResult":
        return FormulaResult(float(v), True)

    @staticmethod
    def divergent() -> "FormulaResult":
        return FormulaResult(math.inf, False)


def kappa(j: int) -> float:
    return unit_ball_volume(j)


def lambda_k(d: int, k: int) -> float:
    """Intensity factor of k-dimensional sections: Gamma((k+1)/2)Gamma(d/2)
    / (Gamma(k/2)Gamma((d+1)/2)); lambda_d = 1."""
    if not 1 <= k <= d:
        raise ValueError("need 1 <= k <= d")
    return (
        math.gamma((k + 1) / 2.0)
        * math.gamma(d / 2.0)
        / (math.gamma(k / 2.0) * math.gamma((d + 1) / 2.0))
    )


def _beta(d: int) -> float:
    """kappa_{d-1} / (d kappa_d): the per-length factor of the isotropic
    segment measure divided by 2."""
    return kappa(d - 1) / (d * kappa(d))


def surface_to_length_rate(d: int) -> float:
    """d kappa_d / kappa_{d-1}: reciprocal scale appearing in all mean
    face sizes (equals pi for d=2 and 4 for d=3)."""
    return 1.0 / _beta(d)


# ---------------------------------------------------------------------------
# First-order face statistics
# ---------------------------------------------------------------------------


def intensity_NkI(d: int, k: int, t: float) -> float:
    """Intensity of k-dimensional I-faces."""
    if not 0 <= k <= d - 1:
        raise ValueError("need 0 <= k <= d-1")
    return (
        (d - k)
        * 2.0 ** (d - k - 1)
        * (kappa(d) / d)
        * math.comb(d, k)
        * _beta(d) ** d
        * t**d
    )


def intensity_SV(d: int, k: int, t: float) -> float:
    """Specific k-volume of the union of k-dimensional I-faces."""
    if not 0 <= k <= d - 1:
        raise ValueError("need 0 <= k <= d-1")
    return (
        2.0 ** (d - k - 1)
        * math.comb(d, k)
        * (kappa(d) / kappa(k))
        * _beta(d) ** (d - k)
        * t ** (d - k)
    )


def mean_vol_Ik(d: int, k: int, t: float) -> float:
    """Mean k-volume of the typical k-dimensional I-face, S_V / N_{k,I}."""
    return intensity_SV(d, k, t) / intensity_NkI(d, k, t)


def f_vector(k: int) -> list:
    """Mean f-vector (f_0, ..., f_{k-1}) of the typical k-dimensional
    I-face: f_j = 2^{k-j} C(k, j)."""
    return [2 ** (k - j) * math.comb(k, j) for j in range(k)]


def mean_intrinsic(d: int, k: int, j: int, t: float) -> float:
    """Mean j-th intrinsic volume of the typical k-dimensional I-face."""
    if not 0 <= j <= k <= d:
        raise ValueError("need 0 <= j <= k <= d")
    return (
        d
        / ((d - j) * kappa(j))
        * math.comb(k, j)
        * surface_to_length_rate(d) ** j
        * t ** (-j)
    )


# ---------------------------------------------------------------------------
# Typical I-segment length law and moments
# ---------------------------------------------------------------------------


def isegment_density(d: int, t: float, x: float) -> float:
    """Density of the typical I-segment length."""
    a = lambda_k(d, 1) * t
    if x < 0.0:
        return 0.0
    if x < 1e-12:
        # continuous limit at 0 (gamma(d+1, ax) ~ (ax)^{d+1}/(d+1)); the
        # naive expression is 0/0 and a jump here stalls adaptive quadrature
        return d * a / (d + 1)
    return d * lower_incomplete_gamma(d + 1, a * x) / (a**d * x ** (d + 1))


def isegment_density_planar(t: float, x: float) -> float:
    """Closed form of isegment_density for d=2."""
    if x <= 0.0:
        return 0.0
    tx = t * x
    return (1.0 / (t**2 * x**3)) * (
        math.pi**2
        - (math.pi**2 + 2.0 * math.pi * tx + 2.0 * tx**2)
        * math.exp(-2.0 * tx / math.pi)
    )


def isegment_cdf(d: int, t: float, x: float, tol: float = 1e-10) -> float:
    if x <= 0.0:
        return 0.0
    return quad_1d(lambda s: isegment_density(d, t, s), 0.0, x, tol)


def isegment_moment(d: int, n: int, t: float) -> FormulaResult:
    """n-th moment of the typical I-segment length; finite iff n < d."""
    if n >= d:
        return FormulaResult.divergent()
    a = lambda_k(d, 1) * t
    return FormulaResult.finite(d * math.factorial(n) / ((d - n) * a**n))


def moments_volk(d: int, k: int, n: int, t: float) -> FormulaResult:
    """Second or third moment of Vol_k of the typical k-dimensional I-face;
    finite iff d > n*k."""
    if n not in (2, 3):
        raise ValueError("only n in {2,3}")
    if d <= n * k:
        return FormulaResult.divergent()
    c = surface_to_length_rate(d)
    if n == 2:
        val = d / (d - 2 * k) * (math.factorial(k) / 2.0**k) * c ** (2 * k) * t ** (-2 * k)
    else:
        gammas = (
            math.gamma(1.0 + k / 2.0)
            * math.gamma(k + 1.5)
            * math.gamma((k + 1) / 2.0) ** 3
            / math.gamma(3.0 * (k + 1) / 2.0)
        )
        val = (
            d
            / (d - 3 * k)
            * 2.0 ** (2 * k)
            * math.pi ** ((k - 3) / 2.0)
            * gammas
            * c ** (3 * k)
            * t ** (-3 * k)
        )
    return FormulaResult.finite(val)


def perimeter_second_moment_3d(t: float) -> float:
    """Second moment of the perimeter of the typical planar I-facet in d=3."""
    return 0.75 * (1.0 + math.pi**2 / 4.0) / t**2


# ---------------------------------------------------------------------------
# J-face relations
# ---------------------------------------------------------------------------


def jface_relations(d: int, k: int, j: int, t: float) -> dict:
    """Closed forms tying I-faces to J-faces (cell faces counted with
    incident-cell multiplicity)."""
    NkI = intensity_NkI(d, k, t)
    out = {
        "N_kJ": d * (d - k + 1) / (d - k) * NkI,
        "N_Jk0": 2.0**k / ((d - k + 1) * math.comb(d, k)),
        "N_Ikj": (d - j) * math.comb(d, j) * 2.0 ** (k - j) / ((d - k) * math.comb(d, k)),
        "EVj_Jk": (d - j) / d * mean_intrinsic(d, k, j, t),
    }
    return out


# ---------------------------------------------------------------------------
# Variance of the total surface in a ball window
# ---------------------------------------------------------------------------


def variance_exact(d: int, t: float, R: float, tol: float = 1e-9) -> float:
    """Variance of the total facet (d-1)-volume in the ball B_R, computed
    by quadrature of the set-covariance integral."""
    if d not in (2, 3):
        raise ValueError("d must be 2 or 3")
    two_beta = 2.0 * _beta(d)

    def integrand(r):
        # r^{d-3} (1 - e^{-cr}) written as r^{d-2} c (1-e^{-cr})/(cr) to
        # remove the r=0 singularity for d=2
        c = two_beta * t
        x = c * r
        ratio = 1.0 if x == 0.0 else -math.expm1(-x) / x
        return set_covariance_ball(d, R, r) * r ** (d - 2) * c * ratio

    integral = quad_1d(integrand, 0.0, 2.0 * R, tol)
    return d * (d - 1) * kappa(d) / 2.0 * integral


def variance_exact_3d_closed(t: float, R: float) -> float:
    """Closed form of variance_exact for d=3."""
    tR = t * R
    return (4.0 * math.pi**2 / (3.0 * t**4)) * (
        tR**2 * (12.0 - 8.0 * tR + 3.0 * tR**2)
        + 24.0 * (1.0 + tR) * math.exp(-tR)
        - 24.0
    )


def chord_power_integral_ball(d: int, p: int) -> float:
    """I_p(B_1^d) for p = d-1: d 2^{d-2} kappa_d kappa_{2d-2} / kappa_{d-1}."""
    if p != d - 1:
        raise ValueError("only the (d-1)-st chord power integral is tabulated")
    return d * 2.0 ** (d - 2) * kappa(d) * kappa(2 * d - 2) / kappa(d - 1)


def two_energy_ball(d: int) -> float:
    """E_2(B_1^d) = 2 I_{d-1}(B_1^d) / ((d-1)(d-2)), d >= 3."""
    if d < 3:
        raise ValueError("2-energy diverges for d < 3")
    return 2.0 * chord_power_integral_ball(d, d - 1) / ((d - 1) * (d - 2))


def variance_asymptotic(d: int, t: float, R: float, window: str = "ball",
                        vol_W: float = None) -> float:
    """Leading-order variance of the total surface in R*W as R grows.

    d=2: pi Vol_2(W) R^2 log R (t-free leading term); d>=3:
    R^{2(d-1)} I_{d-1}(W) / (d-2) with the tabulated chord power integral.
    """
    if d == 2:
        if vol_W is None:
            vol_W = math.pi if window == "ball" else 1.0
        return math.pi * vol_W * R**2 * math.log(R)
    if window == "ball":
        I = chord_power_integral_ball(d, d - 1)
    elif window == "cube" and d == 3:
        I = I2_UNIT_CUBE_3D
    else:
        raise ValueError("window must be 'ball', or 'cube' with d=3")
    return R ** (2 * (d - 1)) * I / (d - 2)


# ---------------------------------------------------------------------------
# Second-order functions of the random surface
# ---------------------------------------------------------------------------


def pair_correlation(d: int, t: float, r: float) -> float:
    if r <= 0.0:
        raise ValueError("r must be positive")
    return 1.0 + (d - 1) / (2.0 * t**2 * r**2) * (
        1.0 - math.exp(-2.0 * _beta(d) * t * r)
    )


def K_function(d: int, t: float, r: float) -> float:
    if r <= 0.0:
        raise ValueError("r must be positive")
    if d == 2:
        x = 2.0 * t * r / math.pi
        return math.pi * r**2 + (math.pi / t**2) * (
            EULER_GAMMA + math.log(x) + exp_integral_Ei_neg(x)
        )
    if d == 3:
        return (4.0 * math.pi / 3.0) * r**3 + (4.0 * math.pi / (3.0 * t**3)) * (
            3.0 * t * r - 6.0 + 6.0 * math.exp(-t * r / 2.0)
        )
    raise ValueError("K_function supports d in {2,3}")


# ---------------------------------------------------------------------------
# Scaling-limit variance factors
# ---------------------------------------------------------------------------


def clt_variance_factor(d: int, vol_W: float) -> float:
    """V_W for the isotropic measure and weight 1: Vol_d(W) times
    2^{d-1} pi^{d-3/2} Gamma((d+1)/2)^{d-1} Gamma(d/2)^{2-d}."""
    return (
        vol_W
        * 2.0 ** (d - 1)
        * math.pi ** (d - 1.5)
        * math.gamma((d + 1) / 2.0) ** (d - 1)
        * math.gamma(d / 2.0) ** (2 - d)
    )


def increment_variance(d: int, vol_W: float, s0: float) -> float:
    """Limit variance of the centered surface increment over [s0, 1]:
    V_W * int_{s0}^1 s^{1-d} ds."""
    if d == 2:
        integral = -math.log(s0)
    else:
        integral = (s0 ** (2 - d) - 1.0) / (d - 2)
    return clt_variance_factor(d, vol_W) * integral


# ---------------------------------------------------------------------------
# Xi variance (the t -> infinity martingale limit)
# ---------------------------------------------------------------------------


def xi_variance_isotropic_ball(d: int = 3, R: float = 1.0) -> float:
    """(d-1)/2 * E_2(B_R^d); E_2 is homogeneous of degree 2d-2."""
    return (d - 1) / 2.0 * two_energy_ball(d) * R ** (2 * d - 2)


def xi_variance_axis_cube(tol: float = 1e-9) -> float:
    """Var Xi([0,1]^3) under the axis counting measure, by direct quadrature.

    A hyperplane {x_i = r} meets the cube in a unit square for every
    r in [0, 1]; on the section only the two transverse coordinates vary, so
    Lambda([xy]) = |x_j - y_j| + |x_k - y_k|.  With the triangular density
    2(1 - g) of each coordinate gap the variance collapses (3 axes, unit
    r-range) to 3 * int_0^1 int_0^1 4(1-u)(1-v) / (u+v) du dv.  The inner
    integral is elementary, int_0^1 (1-v)/(u+v) dv = (1+u) log((1+u)/u) - 1,
    and the remaining logarithmic endpoint singularity is removed by the
    substitution u = x^2.
    """

    def inner(u):
        return 4.0 * (1.0 - u) * ((1.0 + u) * math.log((1.0 + u) / u) - 1.0)

    def integrand(x):
        if x == 0.0:
            return 0.0
        return 2.0 * x * inner(x * x)

    return 3.0 * quad_1d(integrand, 0.0, 1.0, tol)


def _sample_on_facet(facet, rng: np.random.Generator) -> np.ndarray:
    """Uniform point on a section polygon (d=3) or segment (d=2)."""
    v = facet.vertices
    if len(v) == 2:
        return v[0] + rng.random() * (v[1] - v[0])
    v0 = v[0]
    tris = []
    areas = []
    for i in range(1, len(v) - 1):
        tris.append((v0, v[i], v[i + 1]))
        areas.append(0.5 * np.linalg.norm(np.cross(v[i] - v0, v[i + 1] - v0)))
    areas = np.asarray(areas)
    a, b, c = tris[int(rng.choice(len(tris), p=areas / areas.sum()))]
    r1, r2 = rng.random(), rng.random()
    if r1 + r2 > 1.0:
        r1, r2 = 1.0 - r1, 1.0 - r2
    return a + r1 * (b - a) + r2 * (c - a)


def xi_variance_mc(
    spec: HyperplaneMeasureSpec,
    W: ConvexPolytope,
    rng: np.random.Generator,
    n_hyperplanes: int = 200,
    n_pairs: int = 200,
):
    """Monte Carlo evaluation of the Xi variance integral
    int_[W] int_{W cap H} int_{W cap H} 1 / Lambda([xy]) dx dy Lambda(dH).

    H ~ Lambda(.)/Lambda([W]) carries importance weight Lambda([W]); the pair
    (x, y) is uniform on the section, weight Vol_{d-1}(W cap H)^2.  Returns
    (estimate, standard_error) over the hyperplane draws.
    """
    from .geometry import NoIntersection, section
    from .measures import measure_hitting, sample_hitting

    lam_W = measure_hitting(spec, W)
    vals = np.empty(n_hyperplanes)
    i = 0
    while i < n_hyperplanes:
        H = sample_hitting(spec, W, rng)
        try:
            F = section(W, H)
        except NoIntersection:
            continue  # grazing hit, measure-zero fringe
        acc = 0.0
        for _ in range(n_pairs):
            x = _sample_on_facet(F, rng)
            y = _sample_on_facet(F, rng)
            m = segment_measure(spec, x, y)
            if m > 0.0:
                acc += 1.0 / m
        vals[i] = lam_W * F.area**2 * acc / n_pairs
        i += 1
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n_hyperplanes))
    return est, se


# ---------------------------------------------------------------------------
# Poisson hyperplane / line comparison formulas
# ---------------------------------------------------------------------------


def pht_K_function(d: int, t: float, r: float) -> float:
    return kappa(d - 1) / t * r ** (d - 1) + kappa(d) * r**d


def pht_pair_correlation(d: int, t: float, r: float) -> float:
    return 1.0 + (d - 1) * kappa(d - 1) / (d * kappa(d) * t * r)


def pht_J_ball(d: int, R: float) -> float:
    """J(B_R^d) = ((d-1)! kappa_{d-1})^2 (2R)^{2d-1} / (2d-1)!."""
    return (
        (math.factorial(d - 1) * kappa(d - 1)) ** 2
        * (2.0 * R) ** (2 * d - 1)
        / math.factorial(2 * d - 1)
    )


def pht_variance_asymptotic_planar(t: float, R: float) -> float:
    """Var(total length of the Poisson line tessellation in B_R) to leading
    order: (16/3) t R^3."""
    return 16.0 / 3.0 * t * R**3


def pvt_variance_asymptotic_planar(R: float) -> float:
    """Planar Poisson-Voronoi: pi tau_1 R^2 with the literature constant."""
    return math.pi * TAU1_PVT_2D * R**2


# ---------------------------------------------------------------------------
# Catalog dump
# ---------------------------------------------------------------------------


def catalog(t: float = 1.0) -> list:
    """The formula catalog as (formula_id, params, value, provenance) rows."""
    rows = []

    def add(fid, params, value, tag="analytic"):
        rows.append((fid, params, value, tag))

    for j in range(5):
        add("kappa", f"j={j}", kappa(j))
    for d in (2, 3):
        add("lambda_1", f"d={d}", lambda_k(d, 1))
        for k in range(d):
            add("N_kI", f"d={d} k={k} t={t}", intensity_NkI(d, k, t))
            add("S_V", f"d={d} k={k} t={t}", intensity_SV(d, k, t))
            add("E_Vol_Ik", f"d={d} k={k} t={t}", mean_vol_Ik(d, k, t))
        for n in (1, 2):
            m = isegment_moment(d, n, t)
            add("isegment_moment", f"d={d} n={n} t={t}", m.value)
        add("g", f"d={d} t={t} r=1", pair_correlation(d, t, 1.0))
        add("K", f"d={d} t={t} r=1", K_function(d, t, 1.0))
        add("V_factor_unit_ball", f"d={d}", clt_variance_factor(d, kappa(d)))
        add("pht_K", f"d={d} t={t} r=1", pht_K_function(d, t, 1.0))
        add("pht_g", f"d={d} t={t} r=1", pht_pair_correlation(d, t, 1.0))
        add("pht_J_unit_ball", f"d={d}", pht_J_ball(d, 1.0))
    for k in (2, 3):
        add("f_vector", f"k={k}", str(tuple(f_vector(k))))
    add("perimeter_second_moment_3d", f"t={t}", perimeter_second_moment_3d(t))
    add("variance_exact_3d", f"t={t} R=1", variance_exact_3d_closed(t, 1.0))
    add("E2_unit_ball_3d", "d=3", two_energy_ball(3))
    add("xi_var_unit_ball_3d", "d=3", xi_variance_isotropic_ball())
    add("I2_unit_cube_3d", "d=3", I2_UNIT_CUBE_3D, "literature-constant")
    add("tau1_pvt_2d", "d=2", TAU1_PVT_2D, "literature-constant")
    return rows
