"""Domain families and graded conforming triangulations.

Every domain is meshed in rings around the origin: a band of roughly
uniform radial steps near the outer boundary, then radii decreasing
geometrically (ratio q) toward the origin, and a final fan of triangles
with the origin as a shared vertex.  The origin is always a mesh vertex,
interior for the star-shaped families and on the boundary for the
graph half-domain.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Union

import numpy as np
from scipy.optimize import brentq

from . import quadrature

__all__ = [
    "Disk",
    "SectorAnnulus",
    "LDomain",
    "HalfGraph",
    "DomainSpec",
    "InvalidDomainError",
    "Mesh",
    "build_mesh",
    "refine",
    "weighted_first_moments",
    "Moments",
]

MESH_SCHEMA_VERSION = 1


class InvalidDomainError(ValueError):
    """Domain description is degenerate or out of range."""


@dataclass(frozen=True)
class Disk:
    radius: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.radius <= 1.0:
            raise InvalidDomainError(f"disk radius must lie in (0,1], got {self.radius}")

    def radial_profile(self) -> Callable[[np.ndarray], np.ndarray]:
        R = self.radius
        return lambda theta: np.full_like(np.asarray(theta, dtype=float), R)


@dataclass(frozen=True)
class SectorAnnulus:
    """Star-shaped realization of a domain containing the annular sector
    (1-delta, 1) x (theta_lo, theta_hi): the radial boundary equals 1 on
    the sector and tapers to a fixed core radius outside it."""

    delta: float
    theta_lo: float
    theta_hi: float
    core_radius: float = 0.25
    taper: float = 0.2  # angular width of the cosine taper

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < 1.0:
            raise InvalidDomainError(f"delta must lie in (0,1), got {self.delta}")
        if not (0.0 <= self.theta_lo < self.theta_hi < 2.0 * math.pi):
            raise InvalidDomainError(
                f"need 0 <= theta_lo < theta_hi < 2*pi, got [{self.theta_lo}, {self.theta_hi}]")
        if not 0.0 < self.core_radius < 1.0:
            raise InvalidDomainError("core_radius must lie in (0,1)")

    def radial_profile(self) -> Callable[[np.ndarray], np.ndarray]:
        lo, hi, rc = self.theta_lo, self.theta_hi, self.core_radius
        gap = 2.0 * math.pi - (hi - lo)
        w = min(self.taper, 0.45 * gap)

        def rho(theta: np.ndarray) -> np.ndarray:
            th = np.mod(np.asarray(theta, dtype=float) - lo, 2.0 * math.pi)
            span = hi - lo
            bump = np.zeros_like(th)
            inside = th <= span
            bump[inside] = 1.0
            right = (th > span) & (th <= span + w)
            bump[right] = 0.5 * (1.0 + np.cos(math.pi * (th[right] - span) / w))
            left = th >= 2.0 * math.pi - w
            bump[left] = 0.5 * (1.0 + np.cos(math.pi * (2.0 * math.pi - th[left]) / w))
            return rc + (1.0 - rc) * bump

        return rho


@dataclass(frozen=True)
class LDomain:
    """Star-shaped domain with B_L inside and B_1 outside:
    rho(theta) = L + bump_amplitude * max(0, cos(theta - bump_angle))^2 * (1 - L)."""

    L: float
    bump_angle: float = 0.0
    bump_amplitude: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.L < 1.0:
            raise InvalidDomainError(f"L must lie in (0,1), got {self.L}")
        if not 0.0 <= self.bump_amplitude <= 1.0:
            raise InvalidDomainError("bump_amplitude must lie in [0,1]")

    def radial_profile(self) -> Callable[[np.ndarray], np.ndarray]:
        L, amp, ang = self.L, self.bump_amplitude, self.bump_angle

        def rho(theta: np.ndarray) -> np.ndarray:
            c = np.cos(np.asarray(theta, dtype=float) - ang)
            return L + amp * np.maximum(0.0, c) ** 2 * (1.0 - L)

        return rho


@dataclass(frozen=True)
class HalfGraph:
    """B_r intersected with {x2 > h(x1)} for a polynomial graph h with
    h(0) = h'(0) = 0; the origin lies on the boundary."""

    h_coeffs: tuple = ()
    r: float = 1.0

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.h_coeffs)
        object.__setattr__(self, "h_coeffs", coeffs)
        if not 0.0 < self.r <= 1.0:
            raise InvalidDomainError(f"half-domain radius must lie in (0,1], got {self.r}")
        if len(coeffs) >= 1 and coeffs[0] != 0.0:
            raise InvalidDomainError("graph must satisfy h(0) = 0")
        if len(coeffs) >= 2 and coeffs[1] != 0.0:
            raise InvalidDomainError("graph must satisfy h'(0) = 0")

    def h(self, x1: np.ndarray) -> np.ndarray:
        x1 = np.asarray(x1, dtype=float)
        out = np.zeros_like(x1)
        for c in reversed(self.h_coeffs):
            out = out * x1 + c
        return out

    def h_prime(self, x1: np.ndarray) -> np.ndarray:
        x1 = np.asarray(x1, dtype=float)
        out = np.zeros_like(x1)
        for k in range(len(self.h_coeffs) - 1, 0, -1):
            out = out * x1 + k * self.h_coeffs[k]
        return out

    def max_slope(self) -> float:
        xs = np.linspace(-self.r, self.r, 2001)
        return float(np.max(np.abs(self.h_prime(xs))))


DomainSpec = Union[Disk, SectorAnnulus, LDomain, HalfGraph]

_SPEC_TAGS = {"Disk": Disk, "SectorAnnulus": SectorAnnulus,
              "LDomain": LDomain, "HalfGraph": HalfGraph}


def _spec_to_dict(spec: DomainSpec) -> dict:
    d = {"variant": type(spec).__name__}
    if isinstance(spec, Disk):
        d["radius"] = spec.radius
    elif isinstance(spec, SectorAnnulus):
        d.update(delta=spec.delta, theta_lo=spec.theta_lo, theta_hi=spec.theta_hi,
                 core_radius=spec.core_radius, taper=spec.taper)
    elif isinstance(spec, LDomain):
        d.update(L=spec.L, bump_angle=spec.bump_angle,
                 bump_amplitude=spec.bump_amplitude)
    elif isinstance(spec, HalfGraph):
        d.update(h_coeffs=list(spec.h_coeffs), r=spec.r)
    return d


def spec_from_dict(d: dict) -> DomainSpec:
    d = dict(d)
    cls = _SPEC_TAGS[d.pop("variant")]
    if cls is HalfGraph and "h_coeffs" in d:
        d["h_coeffs"] = tuple(d["h_coeffs"])
    return cls(**d)


@dataclass
class Mesh:
    vertices: np.ndarray            # (V, 2)
    triangles: np.ndarray           # (T, 3) int, positively oriented
    boundary_edges: list            # [(i, j, tag)]
    origin_vertex: int
    grading: dict                   # {"q", "rings", "scales", "refinements"}
    spec: DomainSpec | None = None

    # -- sizes ------------------------------------------------------------
    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    def edge_set(self) -> set:
        edges = set()
        for tri in self.triangles:
            for k in range(3):
                i, j = int(tri[k]), int(tri[(k + 1) % 3])
                edges.add((min(i, j), max(i, j)))
        return edges

    def triangle_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def origin_triangles(self) -> np.ndarray:
        """Indices of triangles having the origin as a vertex."""
        return np.nonzero(np.any(self.triangles == self.origin_vertex, axis=1))[0]

    def boundary_vertex_indices(self, tags: set | None = None) -> np.ndarray:
        idx = set()
        for i, j, tag in self.boundary_edges:
            if tags is None or tag in tags:
                idx.add(int(i))
                idx.add(int(j))
        return np.array(sorted(idx), dtype=int)

    def validate(self) -> None:
        areas = self.triangle_areas()
        if np.any(areas <= 0.0):
            raise ValueError("mesh contains a non-positively-oriented or degenerate triangle")
        V = self.num_vertices
        E = len(self.edge_set())
        F = self.num_triangles
        if V - E + F != 1:
            raise ValueError(f"Euler relation violated: V-E+F = {V - E + F}")
        if not np.all(self.vertices[self.origin_vertex] == 0.0):
            raise ValueError("origin vertex is not at (0,0)")
        # each edge in at most 2 triangles
        counts: dict = {}
        for tri in self.triangles:
            for k in range(3):
                i, j = int(tri[k]), int(tri[(k + 1) % 3])
                key = (min(i, j), max(i, j))
                counts[key] = counts.get(key, 0) + 1
        if max(counts.values()) > 2:
            raise ValueError("non-conforming mesh: edge shared by more than 2 triangles")

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        doc = {
            "version": MESH_SCHEMA_VERSION,
            "vertices": self.vertices.tolist(),
            "triangles": self.triangles.tolist(),
            "boundary": [[int(i), int(j), tag] for i, j, tag in self.boundary_edges],
            "origin_vertex": int(self.origin_vertex),
            "grading": self.grading,
        }
        if self.spec is not None:
            doc["spec"] = _spec_to_dict(self.spec)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Mesh":
        if doc.get("version") != MESH_SCHEMA_VERSION:
            raise ValueError(f"unsupported mesh schema version {doc.get('version')}")
        spec = spec_from_dict(doc["spec"]) if "spec" in doc else None
        return cls(
            vertices=np.asarray(doc["vertices"], dtype=float),
            triangles=np.asarray(doc["triangles"], dtype=int),
            boundary_edges=[(int(i), int(j), tag) for i, j, tag in doc["boundary"]],
            origin_vertex=int(doc["origin_vertex"]),
            grading=dict(doc["grading"]),
            spec=spec,
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "Mesh":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


# ---------------------------------------------------------------------------
# Mesh construction
# ---------------------------------------------------------------------------


def _ring_scales(target_h: float, grading_q: float, rings: int,
                 rho_max: float) -> np.ndarray:
    """Descending scale fractions in (0, 1]: uniform steps near the boundary,
    then geometric with ratio q."""
    s_star = min(1.0, target_h / (rho_max * (1.0 - grading_q)))
    if s_star < 1.0:
        n_uni = max(1, int(round((1.0 - s_star) * rho_max / target_h)))
        scales = list(np.linspace(1.0, s_star, n_uni + 1))
    else:
        s_star = 1.0
        scales = [1.0]
    for k in range(1, rings + 1):
        scales.append(s_star * grading_q ** k)
    return np.array(scales)


def _strip_triangles(outer: np.ndarray, inner: np.ndarray,
                     closed: bool) -> list:
    """Quad strip between two rings with identical vertex counts, each quad
    split into two triangles.  `closed` wraps around."""
    n = len(outer)
    tris = []
    rng = range(n) if closed else range(n - 1)
    for j in rng:
        jn = (j + 1) % n
        a, b = int(outer[j]), int(outer[jn])
        c, d = int(inner[jn]), int(inner[j])
        tris.append((a, b, d))
        tris.append((b, c, d))
    return tris


def _fix_orientation(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = vertices[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    areas = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    flip = areas < 0.0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    return triangles


def _build_star(spec: DomainSpec, target_h: float, grading_q: float,
                rings: int) -> Mesh:
    rho = spec.radial_profile()
    theta_probe = np.linspace(0.0, 2.0 * math.pi, 720, endpoint=False)
    rho_max = float(np.max(rho(theta_probe)))
    n_theta = max(16, int(math.ceil(2.0 * math.pi * rho_max / target_h)))
    theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
    ring_r = rho(theta)
    scales = _ring_scales(target_h, grading_q, rings, rho_max)

    verts = [np.zeros((1, 2))]
    ring_idx = []
    base = 1
    unit = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    for s in scales:
        verts.append(s * ring_r[:, None] * unit)
        ring_idx.append(np.arange(base, base + n_theta))
        base += n_theta
    vertices = np.vstack(verts)

    tris = []
    for k in range(len(scales) - 1):
        tris.extend(_strip_triangles(ring_idx[k], ring_idx[k + 1], closed=True))
    inner = ring_idx[-1]
    for j in range(n_theta):
        jn = (j + 1) % n_theta
        tris.append((0, int(inner[j]), int(inner[jn])))
    triangles = _fix_orientation(vertices, np.array(tris, dtype=int))

    boundary = []
    outer = ring_idx[0]
    for j in range(n_theta):
        boundary.append((int(outer[j]), int(outer[(j + 1) % n_theta]), "outer"))

    grading = {"q": grading_q, "rings": rings, "scales": scales.tolist(),
               "refinements": 0}
    mesh = Mesh(vertices, triangles, boundary, 0, grading, spec)
    mesh.validate()
    return mesh


def _graph_crossing(spec: HalfGraph, radius: float, side: int) -> float:
    """x1 of the intersection of |x| = radius with x2 = h(x1), side = +-1."""
    f = lambda x1: x1 * x1 + float(spec.h(x1)) ** 2 - radius * radius
    lo, hi = 0.5 * radius, 1.5 * radius
    if side < 0:
        lo, hi = -hi, -lo
    return float(brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16))


def _build_halfgraph(spec: HalfGraph, target_h: float, grading_q: float,
                     rings: int) -> Mesh:
    if spec.max_slope() > 0.5:
        raise InvalidDomainError("graph slope too large for the half-domain mesher")
    R = spec.r
    n_arc = max(8, int(math.ceil(math.pi * R / target_h)))
    scales = _ring_scales(target_h, grading_q, rings, R)

    verts = [np.zeros((1, 2))]
    ring_idx = []
    base = 1
    for s in scales:
        rr = s * R
        x1r = _graph_crossing(spec, rr, +1)
        x1l = _graph_crossing(spec, rr, -1)
        th_r = math.atan2(float(spec.h(x1r)), x1r)
        th_l = math.atan2(float(spec.h(x1l)), x1l)
        if th_l <= th_r:
            th_l += 2.0 * math.pi
        th = np.linspace(th_r, th_l, n_arc + 1)
        pts = rr * np.stack([np.cos(th), np.sin(th)], axis=1)
        # endpoints exactly on the graph
        pts[0] = [x1r, float(spec.h(x1r))]
        pts[-1] = [x1l, float(spec.h(x1l))]
        verts.append(pts)
        ring_idx.append(np.arange(base, base + n_arc + 1))
        base += n_arc + 1
    vertices = np.vstack(verts)

    tris = []
    for k in range(len(scales) - 1):
        tris.extend(_strip_triangles(ring_idx[k], ring_idx[k + 1], closed=False))
    inner = ring_idx[-1]
    for j in range(n_arc):
        tris.append((0, int(inner[j]), int(inner[j + 1])))
    triangles = _fix_orientation(vertices, np.array(tris, dtype=int))

    boundary = []
    outer = ring_idx[0]
    for j in range(n_arc):
        boundary.append((int(outer[j]), int(outer[j + 1]), "artificial"))
    # graph boundary: chains of ring endpoints down to the origin, both sides
    for end in (0, -1):
        chain = [int(r[end]) for r in ring_idx] + [0]
        for i, j in zip(chain[:-1], chain[1:]):
            boundary.append((i, j, "graph"))

    grading = {"q": grading_q, "rings": rings, "scales": scales.tolist(),
               "refinements": 0}
    mesh = Mesh(vertices, triangles, boundary, 0, grading, spec)
    mesh.validate()
    return mesh


def build_mesh(spec: DomainSpec, target_h: float = 0.1,
               grading_q: float = 0.5, rings: int = 12) -> Mesh:
    """Graded triangulation of the domain; see the module docstring."""
    if not 0.0 < grading_q < 1.0:
        raise InvalidDomainError(f"grading ratio must lie in (0,1), got {grading_q}")
    if rings < 4:
        raise InvalidDomainError("need at least 4 graded rings")
    if not 0.0 < target_h < 2.0:
        raise InvalidDomainError("target_h must be positive and below the diameter")
    if isinstance(spec, HalfGraph):
        return _build_halfgraph(spec, target_h, grading_q, rings)
    return _build_star(spec, target_h, grading_q, rings)


def _project_boundary(spec: DomainSpec, tag: str, p: np.ndarray) -> np.ndarray:
    """Snap an edge-midpoint back onto the analytic boundary piece."""
    if isinstance(spec, HalfGraph):
        if tag == "artificial":
            return spec.r * p / np.hypot(*p)
        if tag == "graph":
            return np.array([p[0], float(spec.h(p[0]))])
        return p
    if tag == "outer":
        th = math.atan2(p[1], p[0])
        r = float(spec.radial_profile()(np.array([th]))[0])
        return r * np.array([math.cos(th), math.sin(th)])
    return p


def refine(mesh: Mesh) -> Mesh:
    """Red refinement: every triangle splits into 4 via edge midpoints;
    boundary midpoints are snapped to the analytic boundary when the mesh
    carries its domain description."""
    V = mesh.num_vertices
    verts = [mesh.vertices]
    edge_mid: dict = {}
    boundary_tag = {(min(i, j), max(i, j)): tag for i, j, tag in mesh.boundary_edges}

    def midpoint(i: int, j: int) -> int:
        key = (min(i, j), max(i, j))
        if key not in edge_mid:
            p = 0.5 * (mesh.vertices[i] + mesh.vertices[j])
            tag = boundary_tag.get(key)
            if tag is not None and mesh.spec is not None:
                p = _project_boundary(mesh.spec, tag, p)
            edge_mid[key] = V + len(edge_mid)
            verts.append(p.reshape(1, 2))
        return edge_mid[key]

    tris = []
    for a, b, c in mesh.triangles:
        a, b, c = int(a), int(b), int(c)
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        tris.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
    vertices = np.vstack(verts)
    triangles = _fix_orientation(vertices, np.array(tris, dtype=int))

    boundary = []
    for i, j, tag in mesh.boundary_edges:
        m = edge_mid[(min(i, j), max(i, j))]
        boundary.append((i, m, tag))
        boundary.append((m, j, tag))

    grading = dict(mesh.grading)
    grading["refinements"] = grading.get("refinements", 0) + 1
    out = Mesh(vertices, triangles, boundary, mesh.origin_vertex, grading, mesh.spec)
    out.validate()
    return out


# ---------------------------------------------------------------------------
# Weighted first moments
# ---------------------------------------------------------------------------


class Moments(NamedTuple):
    alpha1: float
    alpha2: float
    error_estimate: float


def _integrate_moments(mesh: Mesh, a: float, std_deg: int, levels: int) -> np.ndarray:
    std = quadrature.standard_rule(std_deg)
    sing = quadrature.origin_singular_rule(levels)
    origin_set = set(mesh.origin_triangles().tolist())
    total = np.zeros(2)
    for t_idx, tri in enumerate(mesh.triangles):
        tri = [int(v) for v in tri]
        if t_idx in origin_set:
            # rotate so the origin is the rule's singular corner
            while tri[0] != mesh.origin_vertex:
                tri = tri[1:] + tri[:1]
            rule = sing
        else:
            rule = std
        verts = mesh.vertices[tri]
        pts = rule.physical_points(verts)
        e1, e2 = verts[1] - verts[0], verts[2] - verts[0]
        area = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        w = 4.0 / (r2 * np.log(a * a / r2) ** 2)
        total[0] += area * np.sum(rule.weights * pts[:, 0] * w)
        total[1] += area * np.sum(rule.weights * pts[:, 1] * w)
    return total


def weighted_first_moments(mesh: Mesh, a: float) -> Moments:
    """Quadrature approximation of alpha_i = int_Omega x_i w dx for the
    hardy weight w, with a cross-rule error estimate."""
    if a <= 1.0:
        raise ValueError("weight parameter a must exceed 1")
    fine = _integrate_moments(mesh, a, std_deg=9, levels=quadrature.DEFAULT_LEVELS)
    coarse = _integrate_moments(mesh, a, std_deg=5, levels=quadrature.DEFAULT_LEVELS - 3)
    err = float(np.max(np.abs(fine - coarse)))
    return Moments(float(fine[0]), float(fine[1]), err)
