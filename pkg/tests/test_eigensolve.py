"""Eigenvalue solvers: 1D oracle regression values, FEM cross-checks, and
Robin/pencil structure."""

import math

import numpy as np
import pytest

from loghardy import assembly, eigensolve
from loghardy.geometry import Disk, build_mesh, refine

# Reference eigenvalues for the radial problems on the unit disk, computed
# on log-graded 1D grids with Richardson extrapolation over a grid doubling
# and frozen here; agreement is required to 1e-4 relative.
ORACLE = {
    (1.2, 1): 0.281647, (1.2, 2): 0.693059, (1.2, 3): 1.210928,
    (2.0, 1): 1.697057, (2.0, 2): 4.793506, (2.0, 3): 9.112978,
    (math.e, 1): 2.910923, (math.e, 2): 8.558143, (math.e, 3): 16.640057,
}


@pytest.mark.parametrize("a,m", sorted(ORACLE, key=lambda t: (t[0], t[1])))
def test_radial_oracle_frozen_values(a, m):
    lam = eigensolve.radial_oracle_eigen(a, m)
    assert lam == pytest.approx(ORACLE[(a, m)], rel=1e-4)


def test_radial_oracle_ordering():
    lams = [eigensolve.radial_oracle_eigen(1.5, m) for m in (1, 2, 3)]
    assert lams[0] < lams[1] < lams[2]


def test_radial_oracle_validation():
    with pytest.raises(ValueError):
        eigensolve.radial_oracle_eigen(0.9, 1)
    with pytest.raises(ValueError):
        eigensolve.radial_oracle_eigen(2.0, 1, n_grid=10)
    with pytest.raises(ValueError):
        eigensolve.radial_oracle_eigen(2.0, 1, bc="dirichlet")


@pytest.fixture(scope="module")
def disk_setup():
    mesh = refine(build_mesh(Disk(1.0), target_h=0.12, grading_q=0.6,
                             rings=4))
    return mesh


def test_second_neumann_matches_oracle(disk_setup):
    mesh = disk_setup
    a = 1.2
    K = assembly.stiffness(mesh)
    Mw = assembly.hardy_mass(mesh, a)
    w = assembly.constraint_vector(mesh, a)
    res = eigensolve.second_neumann_eigen(K, Mw, w)
    assert res.converged
    assert res.lam == pytest.approx(ORACLE[(1.2, 1)], rel=5e-3)
    assert res.constraint_violation < 1e-8
    assert res.residual_norm < 1e-6


def test_rayleigh_quotient_consistency(disk_setup):
    mesh = disk_setup
    a = 1.2
    K = assembly.stiffness(mesh)
    Mw = assembly.hardy_mass(mesh, a)
    w = assembly.constraint_vector(mesh, a)
    res = eigensolve.second_neumann_eigen(K, Mw, w)
    rq = eigensolve.rayleigh_quotient(res.coefficients, K, Mw)
    assert rq == pytest.approx(res.lam, rel=1e-10)


def test_euler_lagrange_residual_small(disk_setup):
    mesh = disk_setup
    a = 1.2
    K = assembly.stiffness(mesh)
    Mw = assembly.hardy_mass(mesh, a)
    w = assembly.constraint_vector(mesh, a)
    res = eigensolve.second_neumann_eigen(K, Mw, w)
    r = eigensolve.euler_lagrange_residual(res.coefficients, res.lam, K, Mw)
    assert r < 1e-6


def test_robin_zero_beta_gives_zero(disk_setup):
    mesh = disk_setup
    a = 2.0
    K = assembly.weighted_stiffness(mesh, a, 0.0)
    Mw = assembly.hardy_mass(mesh, a)
    B0 = assembly.boundary_mass(mesh, 0.0)
    res = eigensolve.robin_first_eigen(K, B0, Mw)
    assert abs(res.lam) < 1e-8
    # first eigenvector is the constant
    v = res.coefficients / np.abs(res.coefficients).max()
    assert np.ptp(v) < 1e-6


def test_robin_positive_beta(disk_setup):
    mesh = disk_setup
    a = 2.0
    K = assembly.weighted_stiffness(mesh, a, 0.0)
    Mw = assembly.hardy_mass(mesh, a)
    Bb = assembly.boundary_mass(mesh, 0.2)
    res = eigensolve.robin_first_eigen(K, Bb, Mw)
    assert res.converged
    assert 0.0 < res.lam <= 0.2 * math.log(2.0) + 1e-6


def test_robin_eigenpairs_ordered(disk_setup):
    mesh = disk_setup
    a = 2.0
    K = assembly.weighted_stiffness(mesh, a, 0.0)
    Mw = assembly.hardy_mass(mesh, a)
    Bb = assembly.boundary_mass(mesh, 1.0)
    pairs = eigensolve.robin_eigenpairs(K, Bb, Mw, k=2)
    assert len(pairs) == 2
    assert pairs[0].lam < pairs[1].lam
    # eigenvectors are M-orthogonal
    u, v = pairs[0].coefficients, pairs[1].coefficients
    m = abs(u @ (Mw.matrix @ v))
    n = math.sqrt((u @ (Mw.matrix @ u)) * (v @ (Mw.matrix @ v)))
    assert m / n < 1e-6


def test_trace_pencil_constant_lower_bound(disk_setup):
    # C(eps) >= |boundary| / |area| = 2 on the unit disk, by testing the
    # quotient with the constant function
    mesh = disk_setup
    K = assembly.stiffness(mesh).matrix
    M0 = assembly.plain_mass(mesh).matrix
    B1 = assembly.boundary_mass(mesh, 1.0).matrix
    for eps in (0.25, 1.0):
        res = eigensolve.pencil_max_eigen(B1 - eps * K, M0)
        assert res.converged
        assert res.lam >= 2.0 - 1e-2


def test_eig_result_serialization(disk_setup):
    mesh = disk_setup
    a = 1.2
    K = assembly.stiffness(mesh)
    Mw = assembly.hardy_mass(mesh, a)
    w = assembly.constraint_vector(mesh, a)
    res = eigensolve.second_neumann_eigen(K, Mw, w)
    doc = res.to_json()
    assert set(doc) >= {"lambda", "iterations", "converged",
                        "residual_norm", "constraint_violation"}
    assert doc["lambda"] == res.lam


def test_eigenvector_csv(disk_setup, tmp_path):
    mesh = disk_setup
    u = np.linspace(0.0, 1.0, mesh.num_vertices)
    path = tmp_path / "vec.csv"
    eigensolve.eigenvector_to_csv(mesh, u, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == mesh.num_vertices + 1
    # deterministic: identical bytes on rewrite
    path2 = tmp_path / "vec2.csv"
    eigensolve.eigenvector_to_csv(mesh, u, path2)
    assert path.read_bytes() == path2.read_bytes()
