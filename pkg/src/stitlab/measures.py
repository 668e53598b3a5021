"""Driving hyperplane measures: evaluation of the hitting measure Lambda([K])
and sampling from its normalized restriction to the hyperplanes meeting K.

Three kinds are supported:
  * Isotropic       -- uniform directions, Lambda([K]) = mean width b(K)
  * DiscreteDirectional -- finitely many directions u_i with weights p_i
  * AxisCounting    -- one unit-weight atom per coordinate axis (counting
                       measure per unit offset per axis, not normalized)

The isotropic normalization b(K) gives a unit segment the measure
2 kappa_{d-1} / (d kappa_d) and makes the construction-time parameter t equal
to the mean surface density, which is what the analytic catalog assumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    ConvexPolytope,
    GeometryError,
    Hyperplane,
    mean_width,
    segment_measure_constant,
    support_width,
)

MAX_REJECTIONS = 10**6


class RejectionOverflow(GeometryError):
    """Isotropic direction sampling rejected too often; the envelope is
    diam(K) >= w_K(u), so this signals broken geometry, not bad luck."""


@dataclass(frozen=True)
class HyperplaneMeasureSpec:
    kind: str  # "isotropic" | "discrete" | "axis"
    d: int
    directions: tuple = None  # discrete: ((u_i, p_i), ...)

    def __post_init__(self):
        if self.kind not in ("isotropic", "discrete", "axis"):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.d not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2 or 3")
        if self.kind == "discrete":
            if not self.directions:
                raise ValueError("discrete measure needs directions")
            dirs = []
            total = 0.0
            for u, p in self.directions:
                u = np.asarray(u, dtype=float)
                n = np.linalg.norm(u)
                if n == 0.0 or p <= 0.0:
                    raise ValueError("directions must be nonzero, weights positive")
                dirs.append((tuple(u / n), float(p)))
                total += p
            if abs(total - 1.0) > 1e-9:
                raise ValueError("discrete weights must sum to 1")
            mat = np.array([u for u, _ in dirs])
            if np.linalg.matrix_rank(mat) < self.d:
                raise ValueError("directions must span the space")
            object.__setattr__(self, "directions", tuple(dirs))

    @staticmethod
    def isotropic(d: int) -> "HyperplaneMeasureSpec":
        return HyperplaneMeasureSpec("isotropic", d)

    @staticmethod
    def discrete(d: int, directions) -> "HyperplaneMeasureSpec":
        return HyperplaneMeasureSpec("discrete", d, tuple(directions))

    @staticmethod
    def axis(d: int) -> "HyperplaneMeasureSpec":
        return HyperplaneMeasureSpec("axis", d)


@dataclass(frozen=True)
class TimeScaledMeasure:
    """t * Lambda, the actual driving measure of a construction run."""

    spec: HyperplaneMeasureSpec
    t: float

    def __post_init__(self):
        if not self.t > 0.0:
            raise ValueError("t must be positive")


def _axis_extents(K: ConvexPolytope) -> np.ndarray:
    v = K.vertices
    return v.max(axis=0) - v.min(axis=0)


def measure_hitting(spec: HyperplaneMeasureSpec, K: ConvexPolytope) -> float:
    """Lambda([K]) for the hyperplanes meeting K."""
    if spec.kind == "isotropic":
        return mean_width(K)
    if spec.kind == "discrete":
        return sum(p * support_width(K, u) for u, p in spec.directions)
    return float(_axis_extents(K).sum())


def segment_measure(spec: HyperplaneMeasureSpec, x, y) -> float:
    """Lambda([xy]) for the segment between x and y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if spec.kind == "isotropic":
        if spec.d == 1:
            return float(abs(y - x).max())
        return segment_measure_constant(spec.d) * float(np.linalg.norm(y - x))
    if spec.kind == "axis":
        return float(np.abs(y - x).sum())
    e = y - x
    return sum(p * abs(float(e @ np.asarray(u))) for u, p in spec.directions)


def _uniform_sphere(d: int, rng: np.random.Generator) -> np.ndarray:
    if d == 1:
        return np.array([1.0])
    v = rng.standard_normal(d)
    n = np.linalg.norm(v)
    while n < 1e-12:
        v = rng.standard_normal(d)
        n = np.linalg.norm(v)
    return v / n


def sample_hitting(
    spec: HyperplaneMeasureSpec, K: ConvexPolytope, rng: np.random.Generator
) -> Hyperplane:
    """Draw H ~ Lambda(. cap [K]) / Lambda([K]).

    Isotropic directions are sampled by rejection with the envelope
    w_K(u) <= diam(K); the offset is then uniform on K's projection interval.
    """
    if spec.kind == "isotropic":
        if spec.d == 1:
            u = np.array([1.0])
        else:
            diam = K.diameter
            for _ in range(MAX_REJECTIONS):
                u = _uniform_sphere(spec.d, rng)
                if rng.random() * diam <= support_width(K, u):
                    break
            else:
                raise RejectionOverflow("isotropic direction sampling stalled")
    elif spec.kind == "discrete":
        widths = np.array([p * support_width(K, u) for u, p in spec.directions])
        i = int(rng.choice(len(widths), p=widths / widths.sum()))
        u = np.asarray(spec.directions[i][0])
    else:
        ext = _axis_extents(K)
        i = int(rng.choice(spec.d, p=ext / ext.sum()))
        u = np.zeros(spec.d)
        u[i] = 1.0
    proj = K.vertices @ u
    r = rng.uniform(float(proj.min()), float(proj.max()))
    return Hyperplane.make(u, r)
