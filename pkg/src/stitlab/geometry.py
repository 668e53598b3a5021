"""Convex geometry in dimensions 1-3: polytopes, hyperplane clipping, widths,
ball set covariance, scalar quadrature and the special functions the analytic
formulas need.

Polytopes are stored as explicit vertex lists (plus face loops for d=3) so the
combinatorics stays available for f-vector statistics; all predicates use a
fixed absolute tolerance derived from the object scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as _sp

# Absolute tolerances are EPS_REL times the relevant scale (window diameter
# for on-plane tests, window volume for degeneracy tests).
EPS_REL = 1e-12


class GeometryError(Exception):
    pass


class NoIntersection(GeometryError):
    """The hyperplane misses the interior of the polytope."""


class DegenerateSplit(GeometryError):
    """One of the split pieces fell below the volume tolerance."""


class NonConvergence(GeometryError):
    """Adaptive quadrature hit its depth limit."""


def unit_ball_volume(j: int) -> float:
    """Volume of the j-dimensional unit ball, pi^(j/2) / Gamma(1 + j/2)."""
    return math.pi ** (j / 2.0) / math.gamma(1.0 + j / 2.0)


def segment_measure_constant(d: int) -> float:
    """2 kappa_{d-1} / (d kappa_d): hitting measure of a unit segment under
    the isotropic normalization used throughout."""
    return 2.0 * unit_ball_volume(d - 1) / (d * unit_ball_volume(d))


@dataclass(frozen=True)
class Hyperplane:
    """Affine hyperplane {x : <x, u> = r} with unit normal u.

    Canonical form: r >= 0, and for r == 0 the first nonzero coordinate of u
    is positive, so each geometric hyperplane has a unique representation.
    """

    normal: tuple
    offset: float

    @staticmethod
    def make(normal, offset: float) -> "Hyperplane":
        u = np.asarray(normal, dtype=float)
        n = np.linalg.norm(u)
        if not math.isfinite(n) or abs(n - 1.0) > 1e-9:
            if n == 0.0:
                raise GeometryError("zero normal vector")
            u = u / n
            offset = offset / n
        if offset < 0.0 or (offset == 0.0 and _first_nonzero_negative(u)):
            u = -u
            offset = -offset
        return Hyperplane(tuple(float(x) for x in u), float(offset))

    @property
    def dim(self) -> int:
        return len(self.normal)

    def signed_distance(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ np.asarray(self.normal) - self.offset


def _first_nonzero_negative(u) -> bool:
    for x in u:
        if x != 0.0:
            return x < 0.0
    return False


@dataclass
class FacetPolygon:
    """The (d-1)-dimensional section P cap H: a point (d=1), a segment (d=2)
    or a planar convex polygon (d=3)."""

    dimension: int
    vertices: np.ndarray  # (m, d); m=1 for d=1, 2 for d=2, >=3 for d=3
    carrier: Hyperplane
    area: float = field(default=None)  # Vol_{d-1}

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        if self.area is None:
            self.area = _facet_area(self.dimension, self.vertices)


def _facet_area(d: int, verts: np.ndarray) -> float:
    if d == 1:
        return 1.0  # counting measure for 0-dimensional facets
    if d == 2:
        return float(np.linalg.norm(verts[1] - verts[0]))
    # planar polygon via fan triangulation
    v0 = verts[0]
    cross = np.zeros(3)
    for i in range(1, len(verts) - 1):
        cross = cross + np.cross(verts[i] - v0, verts[i + 1] - v0)
    return 0.5 * float(np.linalg.norm(cross))


class ConvexPolytope:
    """Bounded convex cell in d in {1,2,3}.

    d=1: two endpoints; d=2: vertices in counterclockwise order;
    d=3: vertex array plus faces as vertex-index loops.
    """

    __slots__ = ("d", "vertices", "faces", "_volume", "_diameter")

    def __init__(self, vertices, faces=None):
        self.vertices = np.asarray(vertices, dtype=float)
        self.d = self.vertices.shape[1]
        self.faces = faces
        if self.d == 3 and faces is None:
            raise GeometryError("d=3 polytope needs face loops")
        self._volume = None
        self._diameter = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def interval(a: float, b: float) -> "ConvexPolytope":
        if not b > a:
            raise GeometryError("empty interval")
        return ConvexPolytope(np.array([[a], [b]]))

    @staticmethod
    def box(lo, hi) -> "ConvexPolytope":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        d = len(lo)
        if d == 1:
            return ConvexPolytope.interval(lo[0], hi[0])
        if d == 2:
            verts = np.array(
                [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]
            )
            return ConvexPolytope(verts)
        verts = np.array(
            [
                [lo[0], lo[1], lo[2]],
                [hi[0], lo[1], lo[2]],
                [hi[0], hi[1], lo[2]],
                [lo[0], hi[1], lo[2]],
                [lo[0], lo[1], hi[2]],
                [hi[0], lo[1], hi[2]],
                [hi[0], hi[1], hi[2]],
                [lo[0], hi[1], hi[2]],
            ]
        )
        faces = [
            (0, 3, 2, 1),
            (4, 5, 6, 7),
            (0, 1, 5, 4),
            (1, 2, 6, 5),
            (2, 3, 7, 6),
            (3, 0, 4, 7),
        ]
        return ConvexPolytope(verts, faces)

    @staticmethod
    def regular_polygon(n: int, radius: float, center=(0.0, 0.0)) -> "ConvexPolytope":
        ang = 2.0 * math.pi * np.arange(n) / n
        verts = np.stack(
            [center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)], axis=1
        )
        return ConvexPolytope(verts)

    @staticmethod
    def ball_approx(d: int, radius: float, refinement: int = 2) -> "ConvexPolytope":
        """Polytopal stand-in for B_R: regular 128-gon (d=2) or a subdivided
        icosahedron (d=3), rescaled to match the exact ball volume."""
        if d == 1:
            return ConvexPolytope.interval(-radius, radius)
        if d == 2:
            n = 128
            P = ConvexPolytope.regular_polygon(n, radius)
            scale = (math.pi * radius**2 / P.volume) ** 0.5
            return ConvexPolytope(P.vertices * scale)
        verts, faces = _icosphere(refinement)
        P = ConvexPolytope(verts * radius, faces)
        scale = (unit_ball_volume(3) * radius**3 / P.volume) ** (1.0 / 3.0)
        return ConvexPolytope(P.vertices * scale, faces)

    @staticmethod
    def segment(x, y) -> "ConvexPolytope":
        """Degenerate segment [x, y] embedded in d >= 2 (only width/measure
        queries are meaningful)."""
        return ConvexPolytope(np.array([x, y], dtype=float), faces=[])

    # -- basic quantities --------------------------------------------------

    @property
    def is_segment(self) -> bool:
        return self.d >= 2 and len(self.vertices) == 2

    @property
    def volume(self) -> float:
        if self._volume is None:
            self._volume = self._compute_volume()
        return self._volume

    def _compute_volume(self) -> float:
        v = self.vertices
        if self.d == 1:
            return float(v[:, 0].max() - v[:, 0].min())
        if self.is_segment:
            return 0.0
        if self.d == 2:
            x, y = v[:, 0], v[:, 1]
            return 0.5 * float(
                abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
            )
        c = v.mean(axis=0)
        vol = 0.0
        for loop in self.faces:
            fv = v[list(loop)]
            n, a = _face_normal_area(fv)
            if a <= 0.0:
                continue
            h = abs(float(np.dot(n, fv[0] - c)))
            vol += a * h / 3.0
        return vol

    @property
    def diameter(self) -> float:
        if self._diameter is None:
            v = self.vertices
            if len(v) > 60:
                # hull diameter upper bound is fine for rejection envelopes
                c = v.mean(axis=0)
                self._diameter = 2.0 * float(np.linalg.norm(v - c, axis=1).max())
            else:
                d2 = ((v[:, None, :] - v[None, :, :]) ** 2).sum(axis=2)
                self._diameter = float(np.sqrt(d2.max()))
        return self._diameter

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def contains(self, point, tol: float = 0.0) -> bool:
        p = np.asarray(point, dtype=float)
        if self.d == 1:
            return self.vertices[:, 0].min() - tol <= p[0] <= self.vertices[:, 0].max() + tol
        if self.d == 2:
            v = self.vertices
            w = np.roll(v, -1, axis=0)
            edge = w - v
            rel = p[None, :] - v
            cross = edge[:, 0] * rel[:, 1] - edge[:, 1] * rel[:, 0]
            return bool((cross >= -tol * np.linalg.norm(edge, axis=1)).all())
        c = self.centroid()
        for loop in self.faces:
            fv = self.vertices[list(loop)]
            n, a = _face_normal_area(fv)
            if a <= 0.0:
                continue
            if np.dot(n, c - fv[0]) > 0:
                n = -n
            if np.dot(n, p - fv[0]) > tol:
                return False
        return True

    def distance_to_boundary(self, point) -> float:
        """Distance from an interior point to the boundary (negative outside
        up to facet-plane distances)."""
        p = np.asarray(point, dtype=float)
        if self.d == 1:
            a, b = self.vertices[:, 0].min(), self.vertices[:, 0].max()
            return min(p[0] - a, b - p[0])
        if self.d == 2:
            v = self.vertices
            w = np.roll(v, -1, axis=0)
            edge = w - v
            ln = np.linalg.norm(edge, axis=1)
            rel = p[None, :] - v
            cross = edge[:, 0] * rel[:, 1] - edge[:, 1] * rel[:, 0]
            return float((cross / ln).min())
        dist = math.inf
        c = self.centroid()
        for loop in self.faces:
            fv = self.vertices[list(loop)]
            n, a = _face_normal_area(fv)
            if a <= 0.0:
                continue
            if np.dot(n, c - fv[0]) > 0:
                n = -n
            dist = min(dist, -float(np.dot(n, p - fv[0])))
        return dist

    def scaled(self, m: float) -> "ConvexPolytope":
        return ConvexPolytope(self.vertices * m, self.faces)

    def translated(self, shift) -> "ConvexPolytope":
        return ConvexPolytope(self.vertices + np.asarray(shift, dtype=float), self.faces)

    def edges(self):
        """Unique vertex-index edges (d=3)."""
        seen = set()
        for loop in self.faces:
            m = len(loop)
            for i in range(m):
                a, b = loop[i], loop[(i + 1) % m]
                seen.add((a, b) if a < b else (b, a))
        return sorted(seen)


def _face_normal_area(fv: np.ndarray):
    """Unit normal and area of a planar polygon given by its vertices."""
    v0 = fv[0]
    cross = np.zeros(3)
    for i in range(1, len(fv) - 1):
        cross = cross + np.cross(fv[i] - v0, fv[i + 1] - v0)
    nrm = float(np.linalg.norm(cross))
    if nrm == 0.0:
        return np.zeros(3), 0.0
    return cross / nrm, 0.5 * nrm


def _icosphere(refinement: int):
    """Subdivided icosahedron on the unit sphere; triangular faces."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    raw = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in raw]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    for _ in range(refinement):
        cache = {}

        def midpoint(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return np.array(verts), faces


# ---------------------------------------------------------------------------
# Clipping / splitting
# ---------------------------------------------------------------------------


def split_polytope(P: ConvexPolytope, H: Hyperplane, eps_geom: float = None,
                   eps_vol: float = None):
    """Split P along H into (P_plus, P_minus, facet).

    P_plus lies on the side <x,u> > r. Raises NoIntersection when H misses
    the interior of P and DegenerateSplit when a piece falls below eps_vol
    (the caller resamples; probability-zero event under a diffuse measure).
    """
    if eps_geom is None:
        eps_geom = EPS_REL * max(P.diameter, 1.0)
    if eps_vol is None:
        eps_vol = EPS_REL * max(P.volume, 1.0)
    sd = H.signed_distance(P.vertices)
    if sd.max() <= eps_geom or sd.min() >= -eps_geom:
        raise NoIntersection("hyperplane does not cut the interior")
    if P.d == 1:
        return _split_1d(P, H)
    if P.d == 2:
        plus, minus, cut = _split_polygon(P.vertices, sd, eps_geom)
        if len(cut) < 2:
            raise DegenerateSplit("section degenerate")
        Pp, Pm = ConvexPolytope(plus), ConvexPolytope(minus)
        facet = FacetPolygon(2, np.array(cut[:2]), H)
    else:
        Pp, Pm, facet = _split_polyhedron(P, H, sd, eps_geom)
    if Pp.volume < eps_vol or Pm.volume < eps_vol or facet.area <= 0.0:
        raise DegenerateSplit("piece below volume tolerance")
    return Pp, Pm, facet


def section(P: ConvexPolytope, H: Hyperplane) -> FacetPolygon:
    """P cap H without building the half polytopes (used by the Poisson
    hyperplane simulator); raises NoIntersection if H misses int(P)."""
    _, _, facet = split_polytope(P, H, eps_vol=0.0)
    return facet


def _split_1d(P: ConvexPolytope, H: Hyperplane):
    a, b = float(P.vertices[:, 0].min()), float(P.vertices[:, 0].max())
    u = H.normal[0]
    r = H.offset * u  # point coordinate; u is +-1
    Pp = ConvexPolytope.interval(r, b) if u > 0 else ConvexPolytope.interval(a, r)
    Pm = ConvexPolytope.interval(a, r) if u > 0 else ConvexPolytope.interval(r, b)
    facet = FacetPolygon(1, np.array([[r]]), H)
    return Pp, Pm, facet


def _split_polygon(verts: np.ndarray, sd: np.ndarray, eps: float):
    """Sutherland-Hodgman style single-pass split of a convex ring."""
    plus, minus, cut = [], [], []
    n = len(verts)
    for i in range(n):
        j = (i + 1) % n
        vi, vj = verts[i], verts[j]
        di, dj = sd[i], sd[j]
        if di >= -eps:
            plus.append(vi)
        if di <= eps:
            minus.append(vi)
        if (di > eps and dj < -eps) or (di < -eps and dj > eps):
            t = di / (di - dj)
            x = vi + t * (vj - vi)
            plus.append(x)
            minus.append(x)
            cut.append(x)
    return np.array(plus), np.array(minus), cut


def _split_polyhedron(P: ConvexPolytope, H: Hyperplane, sd: np.ndarray, eps: float):
    verts = P.vertices
    plus_faces, minus_faces = [], []
    plus_pts, minus_pts = [], []
    cut_pts = []

    def add_pt(store, p):
        store.append(p)
        return len(store) - 1

    # Per-face clipping; intersection points are cached per edge so the two
    # faces sharing a cut edge reference one vertex, and the cap face is
    # rebuilt afterwards by angular ordering in the plane.
    plus_cut_idx, minus_cut_idx = [], []
    vid_plus = {}
    vid_minus = {}
    edge_cut = {}
    on_plane = set()

    def keep(side_pts, vid, k):
        if k not in vid:
            vid[k] = add_pt(side_pts, verts[k])
        return vid[k]

    for loop in P.faces:
        m = len(loop)
        fp, fm = [], []
        for i in range(m):
            a, b = loop[i], loop[(i + 1) % m]
            da, db = sd[a], sd[b]
            if da >= -eps:
                fp.append(keep(plus_pts, vid_plus, a))
            if da <= eps:
                fm.append(keep(minus_pts, vid_minus, a))
            if abs(da) <= eps and a not in on_plane:
                # vertex lying on the carrier belongs to the cap ring too
                on_plane.add(a)
                cut_pts.append(verts[a])
                plus_cut_idx.append(vid_plus[a])
                minus_cut_idx.append(vid_minus[a])
            if (da > eps and db < -eps) or (da < -eps and db > eps):
                key = (a, b) if a < b else (b, a)
                if key not in edge_cut:
                    t = da / (da - db)
                    x = verts[a] + t * (verts[b] - verts[a])
                    cut_pts.append(x)
                    ip = add_pt(plus_pts, x)
                    im = add_pt(minus_pts, x)
                    plus_cut_idx.append(ip)
                    minus_cut_idx.append(im)
                    edge_cut[key] = (ip, im)
                ip, im = edge_cut[key]
                fp.append(ip)
                fm.append(im)
        if len(_dedupe_loop(fp, plus_pts, eps)) >= 3:
            plus_faces.append(tuple(_dedupe_loop(fp, plus_pts, eps)))
        if len(_dedupe_loop(fm, minus_pts, eps)) >= 3:
            minus_faces.append(tuple(_dedupe_loop(fm, minus_pts, eps)))

    if len(cut_pts) < 3:
        raise DegenerateSplit("section degenerate")
    cap = _order_in_plane(np.array(cut_pts), H, eps)
    if len(cap) < 3:
        raise DegenerateSplit("section degenerate")

    def close(side_pts, side_faces, cut_idx):
        pts = np.array(side_pts)
        cap_ids = []
        for p in cap:
            d2 = ((pts[cut_idx] - p) ** 2).sum(axis=1)
            cap_ids.append(cut_idx[int(np.argmin(d2))])
        cap_loop = tuple(dict.fromkeys(cap_ids))
        if len(cap_loop) >= 3:
            side_faces.append(cap_loop)
        return ConvexPolytope(pts, side_faces)

    Pp = close(plus_pts, plus_faces, plus_cut_idx)
    Pm = close(minus_pts, minus_faces, minus_cut_idx)
    facet = FacetPolygon(3, cap, H)
    return Pp, Pm, facet


def _dedupe_loop(loop, pts, eps):
    out = []
    for k in loop:
        if not out or np.linalg.norm(np.asarray(pts[k]) - np.asarray(pts[out[-1]])) > eps:
            out.append(k)
    if len(out) > 1 and np.linalg.norm(np.asarray(pts[out[0]]) - np.asarray(pts[out[-1]])) <= eps:
        out.pop()
    return out


def _order_in_plane(pts: np.ndarray, H: Hyperplane, eps: float) -> np.ndarray:
    """Deduplicate and order coplanar points counterclockwise around their
    centroid within the carrier plane."""
    u = np.asarray(H.normal)
    a = np.array([1.0, 0.0, 0.0]) if abs(u[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(u, a)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    c = pts.mean(axis=0)
    xy = np.stack([(pts - c) @ e1, (pts - c) @ e2], axis=1)
    ang = np.arctan2(xy[:, 1], xy[:, 0])
    order = np.argsort(ang)
    out = []
    for k in order:
        p = pts[k]
        if all(np.linalg.norm(p - q) > eps for q in out):
            out.append(p)
    return np.array(out)


# ---------------------------------------------------------------------------
# Widths
# ---------------------------------------------------------------------------


def support_width(P: ConvexPolytope, u) -> float:
    """w_P(u) = max_v <v,u> - min_v <v,u>."""
    proj = P.vertices @ np.asarray(u, dtype=float)
    return float(proj.max() - proj.min())


def mean_width(P: ConvexPolytope) -> float:
    """Average width over uniformly random directions.

    d=1: length; d=2: perimeter / pi; d=3: (1/4pi) sum of edge length times
    exterior dihedral angle (exact for polytopes). Degenerate segments in
    d >= 2 use the closed form (2 kappa_{d-1} / (d kappa_d)) L.
    """
    v = P.vertices
    if P.d == 1:
        return float(v[:, 0].max() - v[:, 0].min())
    if P.is_segment:
        return segment_measure_constant(P.d) * float(np.linalg.norm(v[1] - v[0]))
    if P.d == 2:
        w = np.roll(v, -1, axis=0)
        perim = float(np.linalg.norm(w - v, axis=1).sum())
        return perim / math.pi
    return _mean_width_3d(P)


def _mean_width_3d(P: ConvexPolytope) -> float:
    v = P.vertices
    c = v.mean(axis=0)
    # outward unit normal per face
    normals = {}
    for fi, loop in enumerate(P.faces):
        fv = v[list(loop)]
        n, a = _face_normal_area(fv)
        if a <= 0.0:
            continue
        if np.dot(n, fv[0] - c) < 0:
            n = -n
        normals[fi] = n
    edge_faces = {}
    for fi, loop in enumerate(P.faces):
        if fi not in normals:
            continue
        m = len(loop)
        for i in range(m):
            a, b = loop[i], loop[(i + 1) % m]
            key = (a, b) if a < b else (b, a)
            edge_faces.setdefault(key, []).append(fi)
    total = 0.0
    for (a, b), fs in edge_faces.items():
        if len(fs) != 2:
            continue
        n1, n2 = normals[fs[0]], normals[fs[1]]
        cosang = float(np.clip(np.dot(n1, n2), -1.0, 1.0))
        theta = math.acos(cosang)  # exterior angle between outward normals
        total += float(np.linalg.norm(v[a] - v[b])) * theta
    return total / (4.0 * math.pi)


def halfspace_clip(P: ConvexPolytope, normal, offset: float) -> ConvexPolytope:
    """Intersect P with the half-space {x : <x, n> <= offset}.

    Returns P unchanged when it already lies in the half-space; raises
    NoIntersection when the intersection is empty.
    """
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    proj = P.vertices @ n
    eps = EPS_REL * max(P.diameter, 1.0)
    if proj.max() <= offset + eps:
        return P
    if proj.min() >= offset - eps:
        raise NoIntersection("polytope outside the half-space")
    H = Hyperplane.make(n, offset)
    Pp, Pm, _ = split_polytope(P, H, eps_vol=0.0)
    # split orients P_plus toward the canonical normal, which make() may
    # have flipped relative to n
    return Pm if np.dot(np.asarray(H.normal), n) > 0 else Pp


def erode(P: ConvexPolytope, delta: float) -> ConvexPolytope:
    """Inner parallel body approximation: every bounding half-space shifted
    inward by delta (exact inner parallel set for boxes; for general convex
    polytopes it contains the true erosion)."""
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    if delta == 0.0:
        return P
    if P.d == 1:
        a, b = float(P.vertices[:, 0].min()), float(P.vertices[:, 0].max())
        if b - a <= 2.0 * delta:
            raise NoIntersection("erosion empty")
        return ConvexPolytope.interval(a + delta, b - delta)
    out = P
    if P.d == 2:
        v = P.vertices
        w = np.roll(v, -1, axis=0)
        edges = list(zip(v, w))
    else:
        c = P.centroid()
        edges = None
    if P.d == 2:
        for a, b in edges:
            e = b - a
            n = np.array([e[1], -e[0]])  # outward for a CCW ring
            n /= np.linalg.norm(n)
            out = halfspace_clip(out, n, float(np.dot(n, a)) - delta)
    else:
        for loop in P.faces:
            fv = P.vertices[list(loop)]
            n, area = _face_normal_area(fv)
            if area <= 0.0:
                continue
            if np.dot(n, fv[0] - c) < 0:
                n = -n
            out = halfspace_clip(out, n, float(np.dot(n, fv[0])) - delta)
    return out


def euler_check(P: ConvexPolytope) -> bool:
    """V - E + F == 2 for d=3 polytopes."""
    if P.d != 3:
        return True
    used = set()
    for loop in P.faces:
        used.update(loop)
    return len(used) - len(P.edges()) + len(P.faces) == 2


# ---------------------------------------------------------------------------
# Set covariance of balls
# ---------------------------------------------------------------------------


def set_covariance_ball(d: int, R: float, r: float) -> float:
    """Isotropized set covariance of B_R in dimension d in {2,3}; vanishes
    beyond r = 2R."""
    if R <= 0.0:
        raise ValueError("R must be positive")
    if r < 0.0:
        raise ValueError("r must be nonnegative")
    if r >= 2.0 * R:
        return 0.0
    if d == 2:
        return 2.0 * R * R * math.acos(r / (2.0 * R)) - (r / 2.0) * math.sqrt(
            4.0 * R * R - r * r
        )
    if d == 3:
        return (4.0 * math.pi / 3.0) * R**3 * (
            1.0 - 3.0 * r / (4.0 * R) + r**3 / (16.0 * R**3)
        )
    raise ValueError("set_covariance_ball supports d in {2,3}")


# ---------------------------------------------------------------------------
# Quadrature and special functions
# ---------------------------------------------------------------------------

_MAX_DEPTH = 50


def quad_1d(f, a: float, b: float, tol: float = 1e-10) -> float:
    """Adaptive Simpson quadrature with absolute tolerance tol."""
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson(f, a, b, fa, fm, fb, whole, tol, _MAX_DEPTH)


def _simpson(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    # second test: err has hit the floating-point noise floor of the panel,
    # so recursing further cannot improve the estimate (the halved absolute
    # tolerance would otherwise underflow the achievable accuracy)
    if abs(err) <= 15.0 * tol or abs(err) <= 4e-16 * (abs(left) + abs(right)):
        return left + right + err / 15.0
    if depth <= 0:
        raise NonConvergence("quad_1d hit the depth limit")
    return _simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + _simpson(
        f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1
    )


def lower_incomplete_gamma(a: float, x: float) -> float:
    """gamma(a, x) = int_0^x s^(a-1) e^(-s) ds, a > 0, x >= 0."""
    if a <= 0.0:
        raise ValueError("a must be positive")
    if x < 0.0:
        raise ValueError("x must be nonnegative")
    return float(_sp.gammainc(a, x) * _sp.gamma(a))


def exp_integral_Ei_neg(x: float) -> float:
    """int_1^inf e^(-x y) / y dy (the E1 exponential-integral convention)."""
    if x < 0.0:
        raise ValueError("x must be nonnegative")
    if x == 0.0:
        return math.inf
    return float(_sp.exp1(x))
