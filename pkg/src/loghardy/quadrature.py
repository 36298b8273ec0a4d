"""Triangle and edge quadrature, including a corner-layered rule for
elements that touch the origin.

The model integrand 1/(|x|^2 log(a/|x|)^2) has, in radial measure, a
1/(r log^2) profile whose mass below any cutoff radius eps decays only
like 1/log(1/eps).  No point rule in floating point can therefore reach
small relative error on a corner element by itself; the layered rule is
paired with closed-form corner-tail integrals (corner_hardy_tail,
corner_power_log_tail) that assembly adds back analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

__all__ = [
    "QuadRule",
    "standard_rule",
    "origin_singular_rule",
    "edge_rule",
    "corner_hardy_tail",
    "corner_power_log_tail",
    "DEFAULT_LEVELS",
]

DEFAULT_LEVELS = 10
_LAYER_ORDER = 5  # collapsed tensor order per layer, degree 9


@dataclass(frozen=True)
class QuadRule:
    """Quadrature rule on the reference triangle (0,0),(1,0),(0,1) or the
    reference edge [0,1].  `points` holds reference coordinates ((n,2) for
    triangles, (n,1) for edges); `weights` are normalized to sum to 1 so
    that integral = measure * sum(w_q f(x_q))."""

    points: np.ndarray
    weights: np.ndarray
    degree: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        if np.any(self.weights <= 0.0):
            raise ValueError("quadrature weights must be positive")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("quadrature weights must sum to 1")

    def physical_points(self, verts: np.ndarray) -> np.ndarray:
        """Map reference points into the triangle with rows of `verts`."""
        v0, v1, v2 = np.asarray(verts, dtype=float)
        return (v0 + np.outer(self.points[:, 0], v1 - v0)
                + np.outer(self.points[:, 1], v2 - v0))

    def integrate(self, f, verts: np.ndarray) -> float:
        v0, v1, v2 = np.asarray(verts, dtype=float)
        e1, e2 = v1 - v0, v2 - v0
        area = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
        return area * float(np.sum(self.weights * f(self.physical_points(verts))))


def _collapsed(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor rule on the reference triangle via the square-to-triangle
    collapse x = u(1-v), y = v with the (1-v) Jacobian absorbed into a
    Gauss-Jacobi rule in v.  Exact for total degree 2n-1."""
    xu, wu = leggauss(n)
    xu = 0.5 * (xu + 1.0)
    wu = 0.5 * wu
    xv, wv = roots_jacobi(n, 1.0, 0.0)
    xv = 0.5 * (xv + 1.0)
    wv = 0.25 * wv
    U, V = np.meshgrid(xu, xv, indexing="ij")
    WU, WV = np.meshgrid(wu, wv, indexing="ij")
    pts = np.stack([(U * (1.0 - V)).ravel(), V.ravel()], axis=1)
    w = (WU * WV).ravel()
    return pts, w / w.sum()


_STD_LOW = {
    1: (np.array([[1 / 3, 1 / 3]]), np.array([1.0])),
    2: (np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]]),
        np.array([1 / 3, 1 / 3, 1 / 3])),
}


def standard_rule(degree: int) -> QuadRule:
    """Positive-weight rule exact for polynomials of the given total degree,
    1 <= degree <= 10."""
    if not 1 <= degree <= 10:
        raise ValueError(f"unsupported quadrature degree {degree}")
    if degree in _STD_LOW:
        pts, w = _STD_LOW[degree]
        return QuadRule(pts.copy(), w.copy(), degree)
    n = (degree + 2) // 2
    pts, w = _collapsed(n)
    return QuadRule(pts, w, 2 * n - 1)


def origin_singular_rule(levels: int = DEFAULT_LEVELS) -> QuadRule:
    """Composite rule for a triangle whose first vertex sits at the
    singular corner: geometric layers of ratio 1/2 between similar copies
    of the triangle, a degree-9 rule on each layer half, plus the innermost
    scaled triangle.  For log-singular integrands pair it with the
    corner-tail closures below."""
    pts, wts, inner_scale = _layered_open(levels)
    # close with the innermost triangle so the rule integrates smooth f
    base_p, base_w = _collapsed(_LAYER_ORDER)
    pts = np.vstack([pts, inner_scale * base_p])
    wts = np.concatenate([wts, base_w * inner_scale ** 2])
    return QuadRule(pts, wts / wts.sum(), 2 * _LAYER_ORDER - 1)


def _layered_open(levels: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Layered rule leaving the innermost scaled triangle uncovered.
    Weights are area fractions of the reference triangle; they sum to
    1 - (inner_scale)^2."""
    if levels < 2:
        raise ValueError("need at least 2 layers")
    base_p, base_w = _collapsed(_LAYER_ORDER)
    V1 = np.array([1.0, 0.0])
    V2 = np.array([0.0, 1.0])
    P = []
    W = []

    def add(a, b, c):
        # sub-triangle (a,b,c) in reference coordinates
        P.append(a + np.outer(base_p[:, 0], b - a) + np.outer(base_p[:, 1], c - a))
        e1, e2 = b - a, c - a
        det = abs(e1[0] * e2[1] - e1[1] * e2[0])  # = 2 * subarea / (ref area 1/2)
        W.append(base_w * det)

    for lev in range(levels):
        s, t = 0.5 ** lev, 0.5 ** (lev + 1)
        add(s * V1, s * V2, t * V1)
        add(s * V2, t * V2, t * V1)
    return np.vstack(P), np.concatenate(W), 0.5 ** levels


def edge_rule(degree: int) -> QuadRule:
    """Gauss-Legendre rule on the reference edge [0,1]."""
    if not 1 <= degree <= 20:
        raise ValueError(f"unsupported edge quadrature degree {degree}")
    n = (degree + 2) // 2
    x, w = leggauss(n)
    pts = (0.5 * (x + 1.0)).reshape(-1, 1)
    return QuadRule(pts, 0.5 * w, 2 * n - 1)


# ---------------------------------------------------------------------------
# Closed-form corner tails.  For a triangle with one vertex at the origin
# and the other two at p1, p2, the sliver below barycentric scale s is the
# similar triangle (0, s*p1, s*p2).  Integrals of radial-in-|x| densities
# over it reduce to a 1D integral in the polar angle, with the inner radial
# integral in closed form.
# ---------------------------------------------------------------------------

_TAIL_NODES, _TAIL_WEIGHTS = leggauss(40)


def _ray_lengths(p1: np.ndarray, p2: np.ndarray) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Distances R(theta) from the origin to the segment p1-p2 along
    Gauss nodes in theta, plus the node weights mapped to [th1, th2]."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    th1 = math.atan2(p1[1], p1[0])
    th2 = math.atan2(p2[1], p2[0])
    # keep the sweep short (corner angles are < pi by construction)
    if th2 - th1 > math.pi:
        th2 -= 2.0 * math.pi
    elif th1 - th2 > math.pi:
        th2 += 2.0 * math.pi
    mid = 0.5 * (th1 + th2)
    half = 0.5 * (th2 - th1)
    theta = mid + half * _TAIL_NODES
    wts = abs(half) * _TAIL_WEIGHTS
    e = p2 - p1
    cn = p1[0] * e[1] - p1[1] * e[0]
    cd = np.cos(theta) * e[1] - np.sin(theta) * e[0]
    R = cn / cd
    return R, wts, th1, th2


def corner_hardy_tail(a: float, p1: np.ndarray, p2: np.ndarray,
                      scale: float) -> float:
    """Exact integral of 1/(|x|^2 log(a/|x|)^2) over the corner sliver
    (0, scale*p1, scale*p2): int dtheta 1/log(a/(scale*R(theta)))."""
    R, wts, _, _ = _ray_lengths(p1, p2)
    return float(np.sum(wts / np.log(a / (scale * R))))


def corner_power_log_tail(a: float, A: float, p1: np.ndarray, p2: np.ndarray,
                          scale: float) -> float:
    """Exact integral of |x|^{-2} (log(a/|x|))^{-A}, A > 1, over the corner
    sliver: int dtheta (log(a/(scale*R)))^{1-A} / (A-1)."""
    if A <= 1.0:
        raise ValueError("tail integral needs A > 1")
    R, wts, _, _ = _ray_lengths(p1, p2)
    return float(np.sum(wts * np.log(a / (scale * R)) ** (1.0 - A))) / (A - 1.0)
