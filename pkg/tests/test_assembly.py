"""FEM operator assembly: algebraic identities and mass closed forms."""

import math

import numpy as np
import pytest

from loghardy import assembly
from loghardy.geometry import Disk, LDomain, build_mesh, refine


@pytest.fixture(scope="module")
def disk_mesh():
    return build_mesh(Disk(1.0), target_h=0.15, grading_q=0.5, rings=8)


def test_stiffness_kills_constants(disk_mesh):
    K = assembly.stiffness(disk_mesh).matrix
    ones = np.ones(disk_mesh.num_vertices)
    assert np.abs(K @ ones).max() < 1e-13
    # symmetric positive semidefinite
    assert (abs(K - K.T) > 1e-14).nnz == 0


def test_plain_mass_total(disk_mesh):
    M = assembly.plain_mass(disk_mesh).matrix
    ones = np.ones(disk_mesh.num_vertices)
    assert ones @ (M @ ones) == pytest.approx(
        disk_mesh.triangle_areas().sum(), rel=1e-12)


def test_hardy_mass_constant_form(disk_mesh):
    a = 2.0
    Mw = assembly.hardy_mass(disk_mesh, a).matrix
    ones = np.ones(disk_mesh.num_vertices)
    exact = 2.0 * math.pi / math.log(a / 1.0)
    # dominated by the polygon area deficit at this resolution
    assert ones @ (Mw @ ones) == pytest.approx(exact, rel=5e-3)


def test_hardy_mass_converges_under_refinement():
    a = 2.0
    mesh = build_mesh(Disk(1.0), target_h=0.2, grading_q=0.5, rings=6)
    exact = 2.0 * math.pi / math.log(a)
    errs = []
    for _ in range(3):
        Mw = assembly.hardy_mass(mesh, a).matrix
        ones = np.ones(mesh.num_vertices)
        errs.append(abs(ones @ (Mw @ ones) - exact) / exact)
        mesh = refine(mesh)
    assert errs[2] < errs[1] < errs[0]
    # O(h^2) from the polygonal boundary: each refinement gains ~4x
    assert errs[2] < 0.1 * errs[0]


def test_constraint_vector_is_mass_row_sum(disk_mesh):
    a = 1.5
    Mw = assembly.hardy_mass(disk_mesh, a).matrix
    w = assembly.constraint_vector(disk_mesh, a).w
    ones = np.ones(disk_mesh.num_vertices)
    diff = np.abs(w - Mw @ ones)
    assert diff.max() < 1e-13


def test_weighted_stiffness_reduces_to_plain(disk_mesh):
    K = assembly.stiffness(disk_mesh).matrix
    KB = assembly.weighted_stiffness(disk_mesh, 2.0, 0.0).matrix
    assert np.abs((K - KB).toarray()).max() < 1e-12


def test_weighted_stiffness_monotone_in_weight(disk_mesh):
    # for a >= e the log factor exceeds 1 on the unit disk, so the B = 1
    # form dominates the B = 0 form
    K0 = assembly.weighted_stiffness(disk_mesh, math.e, 0.0).matrix
    K1 = assembly.weighted_stiffness(disk_mesh, math.e, 1.0).matrix
    x = np.cos(disk_mesh.vertices[:, 0] + disk_mesh.vertices[:, 1])
    assert x @ (K1 @ x) >= x @ (K0 @ x) - 1e-12


def test_boundary_mass_total_length(disk_mesh):
    beta = 0.7
    B = assembly.boundary_mass(disk_mesh, beta).matrix
    ones = np.ones(disk_mesh.num_vertices)
    # polygonal boundary slightly shorter than the circle
    total = ones @ (B @ ones)
    assert total == pytest.approx(beta * 2.0 * math.pi, rel=5e-3)
    interior = np.ones(disk_mesh.num_vertices, dtype=bool)
    interior[disk_mesh.boundary_vertex_indices()] = False
    assert np.abs(B[interior.nonzero()[0], :].toarray()).max() == 0.0


def test_boundary_mass_angular_callable(disk_mesh):
    # beta(theta) = cos(theta) integrates to ~0 around the circle
    B = assembly.boundary_mass(disk_mesh, lambda th: np.cos(th)).matrix
    ones = np.ones(disk_mesh.num_vertices)
    assert abs(ones @ (B @ ones)) < 1e-6


def test_symmetric_operator_interface(disk_mesh):
    op = assembly.stiffness(disk_mesh)
    x = np.sin(disk_mesh.vertices[:, 0])
    assert op.dimension == disk_mesh.num_vertices
    assert op.quadratic_form(x) == pytest.approx(float(x @ (op.matrix @ x)))


def test_export_coordinate_text(disk_mesh, tmp_path):
    op = assembly.plain_mass(disk_mesh)
    path = tmp_path / "mass.txt"
    op.export_coordinate_text(path)
    rows = path.read_text().strip().splitlines()
    assert rows[0].startswith("%")
    i, j, v = rows[1].split()
    assert int(i) >= 0 and int(j) >= 0 and float(v) != 0.0
    assert len(rows) == op.matrix.nnz + 1


def test_pnorm_quadrature_constant(disk_mesh):
    # for u = 1 the p-norm functional must reproduce int_{B_1} g exactly:
    # 2 pi (log a)^{1-A} / (A-1) with the origin tail included
    a, A = 2.0, 2.5
    P, W, tail, o_idx = assembly.pnorm_quadrature(disk_mesh, a, A)
    ones = np.ones(disk_mesh.num_vertices)
    total = float(np.sum(W * np.abs(P @ ones) ** 2.0)) + tail
    exact = 2.0 * math.pi * math.log(a) ** (1.0 - A) / (A - 1.0)
    assert total == pytest.approx(exact, rel=1e-2)
    assert tail > 0.0
    assert o_idx == disk_mesh.origin_vertex


def test_assembly_on_nonconvex_domain():
    spec = LDomain(L=0.7, bump_angle=1.0, bump_amplitude=0.2)
    mesh = build_mesh(spec, target_h=0.2, grading_q=0.5, rings=5)
    K = assembly.stiffness(mesh).matrix
    Mw = assembly.hardy_mass(mesh, 1.2).matrix
    ones = np.ones(mesh.num_vertices)
    assert np.abs(K @ ones).max() < 1e-13
    assert ones @ (Mw @ ones) > 0.0
