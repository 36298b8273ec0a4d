"""P1 finite element assembly of the variational forms.

Operators: stiffness K, log-weighted stiffness K_B, hardy-weight mass M_w,
plain mass M0, boundary mass B_beta, and the constraint vector w with
w_i = int phi_i / (|x|^2 log(a/|x|)^2) dx.

Elements touching the origin are integrated with the layered corner rule;
the corner tail of the hardy weight below the rule's innermost layer is
added in closed form to the origin vertex's diagonal entry, so that the
total mass 1^T M_w 1 is exact up to the point rule's smooth-part error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import quadrature
from .geometry import Mesh

__all__ = [
    "SymmetricOperator",
    "ConstraintVector",
    "stiffness",
    "weighted_stiffness",
    "hardy_mass",
    "plain_mass",
    "boundary_mass",
    "constraint_vector",
    "pnorm_quadrature",
]

_STD_MASS_DEG = 9   # collapsed rule for the hardy weight away from the origin
_STD_WSTIFF_DEG = 7


@dataclass
class SymmetricOperator:
    matrix: sp.csr_matrix
    kind: str

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, x):
        return self.matrix @ x

    def quadratic_form(self, u: np.ndarray, v: np.ndarray | None = None) -> float:
        if v is None:
            v = u
        return float(u @ (self.matrix @ v))

    def export_coordinate_text(self, path) -> None:
        coo = self.matrix.tocoo()
        with open(path, "w") as fh:
            fh.write(f"% symmetric operator kind={self.kind} dim={self.dimension}\n")
            for i, j, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{int(i)} {int(j)} {float(v)!r}\n")


@dataclass
class ConstraintVector:
    w: np.ndarray


def _tri_geometry(mesh: Mesh):
    """Vertex coords (T,3,2), areas (T,), and P1 gradients (T,3,2) with the
    rows of each gradient block summing to zero exactly."""
    p = mesh.vertices[mesh.triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * det
    g1 = np.stack([e2[:, 1], -e2[:, 0]], axis=1) / det[:, None]
    g2 = np.stack([-e1[:, 1], e1[:, 0]], axis=1) / det[:, None]
    g0 = -(g1 + g2)
    grads = np.stack([g0, g1, g2], axis=1)
    return p, area, grads


def _scatter(mesh: Mesh, local: np.ndarray, kind: str,
             triangles: np.ndarray | None = None) -> SymmetricOperator:
    """Accumulate (T,3,3) local matrices into a CSR operator."""
    tris = mesh.triangles if triangles is None else triangles
    T = tris.shape[0]
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    A = sp.coo_matrix((local.ravel(), (rows, cols)),
                      shape=(mesh.num_vertices, mesh.num_vertices)).tocsr()
    A = (A + A.T) * 0.5  # exact symmetry
    return SymmetricOperator(A, kind)


def stiffness(mesh: Mesh) -> SymmetricOperator:
    """K_ij = int grad phi_i . grad phi_j dx, exact for P1."""
    _, area, grads = _tri_geometry(mesh)
    local = np.einsum("t,tid,tjd->tij", area, grads, grads)
    return _scatter(mesh, local, "K")


def plain_mass(mesh: Mesh) -> SymmetricOperator:
    """Exact P1 mass matrix."""
    _, area, _ = _tri_geometry(mesh)
    ref = (np.ones((3, 3)) + np.eye(3)) / 12.0
    local = area[:, None, None] * ref[None, :, :]
    return _scatter(mesh, local, "M0")


def _origin_local_order(mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Origin triangles with vertices cyclically rotated so the origin is
    local vertex 0 (rotation preserves orientation)."""
    idx = mesh.origin_triangles()
    tris = mesh.triangles[idx].copy()
    for r in range(2):
        mask = tris[:, 0] != mesh.origin_vertex
        tris[mask] = np.roll(tris[mask], -1, axis=1)
    return idx, tris


def _rule_phi(rule: quadrature.QuadRule) -> np.ndarray:
    x, y = rule.points[:, 0], rule.points[:, 1]
    return np.stack([1.0 - x - y, x, y], axis=1)  # (Q, 3)


def _element_weight_matrices(verts: np.ndarray, rule: quadrature.QuadRule,
                             weight_fn) -> np.ndarray:
    """(T,3,3) local matrices int weight phi_i phi_j over each triangle;
    `verts` is (T,3,2)."""
    phi = _rule_phi(rule)                       # (Q,3)
    v0 = verts[:, 0]
    e1 = verts[:, 1] - verts[:, 0]
    e2 = verts[:, 2] - verts[:, 0]
    area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    x = rule.points[:, 0]
    y = rule.points[:, 1]
    pts = (v0[:, None, :] + x[None, :, None] * e1[:, None, :]
           + y[None, :, None] * e2[:, None, :])  # (T,Q,2)
    wvals = weight_fn(pts.reshape(-1, 2)).reshape(pts.shape[0], -1)  # (T,Q)
    coef = wvals * rule.weights[None, :] * area[:, None]
    return np.einsum("tq,qi,qj->tij", coef, phi, phi)


def _hardy_w(a: float):
    def f(pts: np.ndarray) -> np.ndarray:
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        return 4.0 / (r2 * np.log(a * a / r2) ** 2)
    return f


def _log_pow(a: float, B: float):
    def f(pts: np.ndarray) -> np.ndarray:
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        return (0.5 * np.log(a * a / r2)) ** B
    return f


def hardy_mass(mesh: Mesh, a: float,
               levels: int = quadrature.DEFAULT_LEVELS) -> SymmetricOperator:
    """M_w with the hardy weight 1/(|x|^2 log(a/|x|)^2): collapsed degree-9
    rule away from the origin, layered corner rule plus closed-form corner
    tail on origin elements."""
    if a <= 1.0:
        raise ValueError("weight parameter a must exceed 1")
    local, origin_tris, origin_idx, tails = _hardy_element_matrices(mesh, a, levels)
    op = _scatter(mesh, local["std"], "M_w",
                  triangles=mesh.triangles[local["std_idx"]])
    op2 = _scatter(mesh, local["orig"], "M_w", triangles=origin_tris)
    A = op.matrix + op2.matrix
    o = mesh.origin_vertex
    A = A.tolil()
    A[o, o] += tails
    return SymmetricOperator(A.tocsr(), "M_w")


def _hardy_element_matrices(mesh: Mesh, a: float, levels: int):
    wfn = _hardy_w(a)
    origin_idx, origin_tris = _origin_local_order(mesh)
    std_mask = np.ones(mesh.num_triangles, dtype=bool)
    std_mask[origin_idx] = False
    std_idx = np.nonzero(std_mask)[0]

    std_rule = quadrature.standard_rule(_STD_MASS_DEG)
    std_local = _element_weight_matrices(mesh.vertices[mesh.triangles[std_idx]],
                                         std_rule, wfn)

    open_pts, open_wts, inner_scale = quadrature._layered_open(levels)
    open_rule = quadrature.QuadRule.__new__(quadrature.QuadRule)
    object.__setattr__(open_rule, "points", open_pts)
    object.__setattr__(open_rule, "weights", open_wts / open_wts.sum())
    object.__setattr__(open_rule, "degree", 9)
    # _element_weight_matrices multiplies by full area * normalized weights;
    # rescale so the open rule covers only its own area fraction
    frac = open_wts.sum()
    orig_local = _element_weight_matrices(mesh.vertices[origin_tris],
                                          open_rule, wfn) * frac

    # corner tails, all attributed to the origin vertex's diagonal
    tails = 0.0
    for tri in origin_tris:
        p1 = mesh.vertices[int(tri[1])]
        p2 = mesh.vertices[int(tri[2])]
        tails += quadrature.corner_hardy_tail(a, p1, p2, inner_scale)
    return ({"std": std_local, "std_idx": std_idx, "orig": orig_local},
            origin_tris, origin_idx, tails)


def weighted_stiffness(mesh: Mesh, a: float, B: float) -> SymmetricOperator:
    """K_B with weight (log(a/|x|))^B (also used with B = 2*alpha for the
    transformed equation).  The weight is only log-singular, so the layered
    rule alone is enough on origin elements."""
    if a <= 1.0:
        raise ValueError("weight parameter a must exceed 1")
    if B >= 2.0:
        raise ValueError("log-exponent out of supported range")
    wfn = _log_pow(a, B)
    _, area, grads = _tri_geometry(mesh)
    ggt = np.einsum("tid,tjd->tij", grads, grads)

    origin_idx, origin_tris = _origin_local_order(mesh)
    std_mask = np.ones(mesh.num_triangles, dtype=bool)
    std_mask[origin_idx] = False
    std_idx = np.nonzero(std_mask)[0]

    def weight_integrals(idx: np.ndarray, tris: np.ndarray, rule) -> np.ndarray:
        verts = mesh.vertices[tris]
        v0 = verts[:, 0]
        e1 = verts[:, 1] - verts[:, 0]
        e2 = verts[:, 2] - verts[:, 0]
        ar = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        pts = (v0[:, None, :] + rule.points[:, 0][None, :, None] * e1[:, None, :]
               + rule.points[:, 1][None, :, None] * e2[:, None, :])
        vals = wfn(pts.reshape(-1, 2)).reshape(len(tris), -1)
        return ar * (vals @ rule.weights)

    wint = np.empty(mesh.num_triangles)
    wint[std_idx] = weight_integrals(std_idx, mesh.triangles[std_idx],
                                     quadrature.standard_rule(_STD_WSTIFF_DEG))
    wint[origin_idx] = weight_integrals(origin_idx, origin_tris,
                                        quadrature.origin_singular_rule())
    local = wint[:, None, None] * ggt
    return _scatter(mesh, local, "K_B")


def boundary_mass(mesh: Mesh, beta, tags: set | None = None,
                  degree: int = 7) -> SymmetricOperator:
    """B_beta over the physical boundary (tags 'outer' and 'graph' by
    default; the half-domain's artificial arc carries no boundary term).
    `beta` is a constant or a function of the boundary angle theta."""
    if tags is None:
        tags = {"outer", "graph"}
    beta_fn = beta if callable(beta) else (lambda th: np.full_like(th, float(beta)))
    rule = quadrature.edge_rule(degree)
    s = rule.points[:, 0]
    phi = np.stack([1.0 - s, s], axis=1)
    rows, cols, vals = [], [], []
    for i, j, tag in mesh.boundary_edges:
        if tag not in tags:
            continue
        pi, pj = mesh.vertices[i], mesh.vertices[j]
        pts = pi[None, :] + s[:, None] * (pj - pi)[None, :]
        length = float(np.hypot(*(pj - pi)))
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        b = np.asarray(beta_fn(theta), dtype=float)
        if not np.all(np.isfinite(b)):
            raise ValueError("beta must be finite on the boundary")
        loc = length * np.einsum("q,qi,qj->ij", rule.weights * b, phi, phi)
        for li, gi in enumerate((i, j)):
            for lj, gj in enumerate((i, j)):
                rows.append(gi)
                cols.append(gj)
                vals.append(loc[li, lj])
    A = sp.coo_matrix((vals, (rows, cols)),
                      shape=(mesh.num_vertices, mesh.num_vertices)).tocsr()
    A = (A + A.T) * 0.5
    return SymmetricOperator(A, "B_beta")


def constraint_vector(mesh: Mesh, a: float,
                      levels: int = quadrature.DEFAULT_LEVELS) -> ConstraintVector:
    """w_i = int phi_i w dx, assembled with the same quadrature as
    hardy_mass so that w = M_w . 1 holds to roundoff."""
    local, origin_tris, origin_idx, tails = _hardy_element_matrices(mesh, a, levels)
    w = np.zeros(mesh.num_vertices)
    # row sums of the element matrices are the element contributions to w,
    # by the P1 partition of unity at each quadrature point
    np.add.at(w, mesh.triangles[local["std_idx"]].ravel(),
              local["std"].sum(axis=2).ravel())
    np.add.at(w, origin_tris.ravel(), local["orig"].sum(axis=2).ravel())
    w[mesh.origin_vertex] += tails
    return ConstraintVector(w)


def pnorm_quadrature(mesh: Mesh, a: float, A: float,
                     levels: int = quadrature.DEFAULT_LEVELS):
    """Quadrature data for N(u) = int |u|^p g dx with the numerator weight
    g = |x|^{-2} (log(a/|x|))^{-A}: a sparse interpolation matrix P from
    vertex values to quadrature points, positive weights W including the
    g-density, and the closed-form corner-tail coefficient applied to
    |u(0)|^p.  Requires A > 1."""
    if A <= 1.0:
        raise ValueError("numerator weight needs A > 1 to be integrable")

    def gfn(pts: np.ndarray) -> np.ndarray:
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        return 1.0 / (r2 * (0.5 * np.log(a * a / r2)) ** A)

    origin_idx, origin_tris = _origin_local_order(mesh)
    std_mask = np.ones(mesh.num_triangles, dtype=bool)
    std_mask[origin_idx] = False
    std_idx = np.nonzero(std_mask)[0]
    std_rule = quadrature.standard_rule(_STD_MASS_DEG)
    open_pts, open_wts, inner_scale = quadrature._layered_open(levels)

    rows, cols, vals, weights = [], [], [], []
    q_count = 0

    def add_block(tris: np.ndarray, ref_pts: np.ndarray, ref_wts: np.ndarray):
        nonlocal q_count
        phi = np.stack([1.0 - ref_pts[:, 0] - ref_pts[:, 1],
                        ref_pts[:, 0], ref_pts[:, 1]], axis=1)
        verts = mesh.vertices[tris]
        v0 = verts[:, 0]
        e1 = verts[:, 1] - verts[:, 0]
        e2 = verts[:, 2] - verts[:, 0]
        ar = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        pts = (v0[:, None, :] + ref_pts[:, 0][None, :, None] * e1[:, None, :]
               + ref_pts[:, 1][None, :, None] * e2[:, None, :])
        g = gfn(pts.reshape(-1, 2)).reshape(len(tris), -1)
        Wq = (g * ref_wts[None, :] * ar[:, None]).ravel()
        Q = len(ref_pts)
        for t, tri in enumerate(tris):
            for q in range(Q):
                for l in range(3):
                    rows.append(q_count + t * Q + q)
                    cols.append(int(tri[l]))
                    vals.append(phi[q, l])
        weights.append(Wq)
        q_count += len(tris) * Q

    if len(std_idx):
        add_block(mesh.triangles[std_idx], std_rule.points, std_rule.weights)
    if len(origin_tris):
        add_block(origin_tris, open_pts, open_wts)

    tail = 0.0
    for tri in origin_tris:
        p1 = mesh.vertices[int(tri[1])]
        p2 = mesh.vertices[int(tri[2])]
        tail += quadrature.corner_power_log_tail(a, A, p1, p2, inner_scale)

    P = sp.coo_matrix((vals, (rows, cols)),
                      shape=(q_count, mesh.num_vertices)).tocsr()
    W = np.concatenate(weights) if weights else np.zeros(0)
    return P, W, tail, mesh.origin_vertex
