"""End-to-end acceptance checks, one test per criterion.

Each test prints a single summary line (visible with -rA or on failure) and
asserts the stated tolerance.  Criteria that are analytically unattainable
at any feasible resolution fail here by design rather than being weakened;
the summary line carries the measured values either way.
"""

import json
import math

import numpy as np
import pytest

from loghardy import analysis, assembly, cli, eigensolve
from loghardy.analysis import (
    alpha_theory,
    asymptotic_exponent_fit,
    radial_hardy_constant,
    scaling_family_quotient,
    sobolev_constant_estimate,
    windowed_v_sup,
)
from loghardy.analysis import test_function_bound_A as condition_A_bound
from loghardy.geometry import Disk, LDomain, build_mesh, refine
from loghardy.weights import (
    GridSpec,
    WeightParams,
    adams_quantities,
    admissible_check,
    critical_A,
    scan_sup,
)


def _report(n, ok, detail):
    print(f"ACCEPTANCE {n:02d} [{'PASS' if ok else 'FAIL'}] {detail}")


def _neumann(mesh, a, **kw):
    K = assembly.stiffness(mesh)
    Mw = assembly.hardy_mass(mesh, a)
    w = assembly.constraint_vector(mesh, a)
    return eigensolve.second_neumann_eigen(K, Mw, w, **kw)


# -- 1 ----------------------------------------------------------------------

def test_acceptance_01_oracle_equivalence():
    """FEM second constrained eigenvalue vs 1D radial oracle, disk."""
    mesh = build_mesh(Disk(1.0), target_h=0.05, grading_q=0.6, rings=4)
    mesh = refine(refine(mesh))
    details, rel_errs = [], []
    for a in (1.2, 2.0, math.e):
        res = _neumann(mesh, a)
        oracle = min(eigensolve.radial_oracle_eigen(a, m) for m in (1, 2, 3))
        rel = abs(res.lam - oracle) / oracle
        rel_errs.append(rel)
        details.append(f"a={a:.3f}: fem={res.lam:.6f} oracle={oracle:.6f} "
                       f"rel={rel:.1e}")
    ok = all(r <= 1e-3 for r in rel_errs)
    _report(1, ok, "; ".join(details))
    # For a = 2 and a = e the constrained infimum over the disk is the
    # non-attained concentration limit 1/4, which the graded discrete space
    # reaches below the first angular oracle value; the angular-mode oracle
    # set then no longer describes the discrete minimizer.
    assert all(r <= 1e-3 for r in rel_errs), details


# -- 2 ----------------------------------------------------------------------

def test_acceptance_02_admissibility_pipeline():
    pairs = [(a, L) for a in (1.01, 1.05, 1.1) for L in (0.8, 0.9, 0.95)
             if admissible_check(a, L).admissible]
    assert pairs, "grid search found no admissible pair"
    a, L = pairs[0]
    spec = LDomain(L=L, bump_angle=0.0, bump_amplitude=0.1)
    mesh = refine(build_mesh(spec, target_h=0.06, grading_q=0.6, rings=6))
    res = _neumann(mesh, a)
    area = float(mesh.triangle_areas().sum())
    chain = 2.0 * area / admissible_check(a, L).integral
    ok = res.lam < 0.25 and res.lam <= chain + 1e-3
    _report(2, ok, f"{len(pairs)} admissible pairs; (a,L)=({a},{L}): "
                   f"lam={res.lam:.6f} < 1/4, chain={chain:.6f}")
    assert res.converged
    assert res.lam < 0.25
    assert res.lam <= chain + 1e-3


# -- 3 ----------------------------------------------------------------------

def test_acceptance_03_condition_A_scaling():
    from loghardy.geometry import SectorAnnulus

    spec = SectorAnnulus(delta=0.3, theta_lo=0.0, theta_hi=1.0)
    a_values = (1.5, 1.2, 1.1, 1.05, 1.01)
    normalized = [condition_A_bound(spec, a) / math.log(a) for a in a_values]
    ratio = max(normalized) / min(normalized)
    ok = ratio <= 10.0
    _report(3, ok, f"normalized bounds {['%.2f' % v for v in normalized]}, "
                   f"max/min={ratio:.3f}")
    assert ratio <= 10.0


# -- 4 ----------------------------------------------------------------------

def test_acceptance_04_critical_hardy_constant():
    par = WeightParams(a=2.0, A=2.0, B=0.0, p=2.0)
    mesh = build_mesh(Disk(1.0), target_h=0.45, grading_q=0.5, rings=250)
    vals = []
    for i in range(3):
        vals.append(sobolev_constant_estimate(mesh, par).c_estimate)
        if i < 2:
            mesh = refine(mesh)
    in_range = all(0.25 <= v <= 0.40 for v in vals)
    decreasing = vals[0] > vals[1] > vals[2]
    ok = in_range and decreasing
    _report(4, ok, f"estimates {['%.5f' % v for v in vals]} "
                   f"(target [0.25, 0.40], strictly decreasing)")
    assert in_range
    assert decreasing


# -- 5 ----------------------------------------------------------------------

def test_acceptance_05_hardy_with_log_constant():
    details, oks = [], []
    for B in (-0.5, 0.0, 0.5):
        c = radial_hardy_constant(2.0, B)
        floor = ((1.0 - B) / 2.0) ** 2 - 0.02
        oks.append(c >= floor)
        details.append(f"B={B}: {c:.4f} >= {floor:.4f}")
    _report(5, all(oks), "; ".join(details))
    assert all(oks)


# -- 6 ----------------------------------------------------------------------

def test_acceptance_06_scaling_threshold():
    p, B = 2.0, 0.0
    par_c = WeightParams(a=2.0, A=critical_A(p, B), B=B, p=p)
    base = scaling_family_quotient(1.0, par_c)
    inv_dev = max(abs(scaling_family_quotient(l, par_c) - base) / base
                  for l in (0.5, 0.1, 0.02))
    par_s = WeightParams(a=2.0, A=critical_A(p, B) - 0.3, B=B, p=p)
    ratio = (scaling_family_quotient(0.02, par_s)
             / scaling_family_quotient(1.0, par_s))
    ok = inv_dev <= 1e-6 and ratio < 0.1
    _report(6, ok, f"critical invariance dev={inv_dev:.2e}; "
                   f"subcritical R[u_0.02]/R[u_1]={ratio:.4f}")
    assert inv_dev <= 1e-6
    # The quotient obeys the exact power law R[u_lam] = c * lam^{(2/p) d}
    # for exponent deficit d, so at d = 0.3 the ratio is 0.02^0.3 = 0.309;
    # a threshold of 0.1 is not reachable at lam = 0.02 for any p >= 2.
    assert ratio < 0.1


# -- 7 ----------------------------------------------------------------------

def test_acceptance_07_asymptotic_boundedness():
    a = 2.0
    mesh = refine(build_mesh(Disk(1.0), target_h=0.15, grading_q=0.5,
                             rings=12))
    K = assembly.weighted_stiffness(mesh, a, 0.0)
    Mw = assembly.hardy_mass(mesh, a)
    Bb = assembly.boundary_mass(mesh, 0.2)
    res = eigensolve.robin_first_eigen(K, Bb, Mw)
    assert res.converged and res.lam < 0.25
    fit = asymptotic_exponent_fit(res, mesh, a)
    lo, hi = fit.r_window
    mid = math.sqrt(lo * hi)
    v_in = windowed_v_sup(res.coefficients, mesh, a, fit.alpha_theory,
                          (lo, mid))
    v_out = windowed_v_sup(res.coefficients, mesh, a, fit.alpha_theory,
                           (mid, hi))
    variation = abs(v_in - v_out) / max(v_in, v_out)
    ok = math.isfinite(fit.v_sup) and variation < 0.2
    _report(7, ok, f"lam={res.lam:.6f}, alpha_fit={fit.alpha_fit:.4f} "
                   f"(theory {fit.alpha_theory:.4f}), v_sup={fit.v_sup:.4f}, "
                   f"window variation={variation:.4f}")
    assert math.isfinite(fit.v_sup) and fit.v_sup > 0.0
    assert variation < 0.2


# -- 8 ----------------------------------------------------------------------

def test_acceptance_08_robin_sign_laws():
    a = 2.0
    mesh = refine(build_mesh(Disk(1.0), target_h=0.15, grading_q=0.5,
                             rings=12))
    K = assembly.weighted_stiffness(mesh, a, 0.0)
    Mw = assembly.hardy_mass(mesh, a)

    pos = eigensolve.robin_first_eigen(K, assembly.boundary_mass(mesh, 1.0),
                                       Mw)
    neg = eigensolve.robin_first_eigen(K, assembly.boundary_mass(mesh, -1.0),
                                       Mw)
    Bsgn = assembly.boundary_mass(mesh, lambda th: np.cos(th) - 0.3)
    sgn = eigensolve.robin_first_eigen(K, Bsgn, Mw)

    bound = 1.0 * 1.0 * math.log(a / 1.0)
    v = pos.coefficients
    scale = float(np.abs(v).max())
    sign_definite = bool(np.all(v >= -1e-8 * scale)
                         or np.all(v <= 1e-8 * scale))
    ok = (0.0 < pos.lam <= bound + 1e-6 and neg.lam < 0.0
          and math.isfinite(neg.lam) and sgn.lam < 0.0 and sign_definite)
    _report(8, ok, f"beta=+1: {pos.lam:.4f} in (0, {bound:.4f}]; "
                   f"beta=-1: {neg.lam:.4f} < 0; "
                   f"mean-negative beta: {sgn.lam:.4f} < 0; "
                   f"sign-definite={sign_definite}")
    assert 0.0 < pos.lam <= bound + 1e-6
    assert neg.lam < 0.0 and math.isfinite(neg.lam)
    assert sgn.lam < 0.0
    assert sign_definite


# -- 9 ----------------------------------------------------------------------

def test_acceptance_09_weight_scans():
    par = WeightParams(a=2.0, A=2.5, B=0.5, p=2.0)
    g1 = GridSpec()
    g2 = g1.doubled()
    changes = {}
    for kind in ("muckenhoupt", "adams"):
        s1 = scan_sup(kind, par, g1).sup_estimate
        s2 = scan_sup(kind, par, g2).sup_estimate
        changes[kind] = abs(s2 - s1) / abs(s1)
    sub = WeightParams(a=2.0, A=critical_A(2.0, 0.5) - 0.3, B=0.5, p=2.0)
    prods = [adams_quantities((0.0, 0.0), r, sub).product
             for r in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)]
    monotone = all(prods[i] < prods[i + 1] for i in range(len(prods) - 1))
    ok = all(c < 0.05 for c in changes.values()) and monotone
    _report(9, ok, f"doubling changes: "
                   f"muckenhoupt={changes['muckenhoupt']:.4f}, "
                   f"adams={changes['adams']:.4f}; "
                   f"subcritical growth monotone={monotone}")
    assert changes["muckenhoupt"] < 0.05
    assert changes["adams"] < 0.05
    assert monotone


# -- 10 ---------------------------------------------------------------------

def test_acceptance_10_algebraic_identities():
    a = 2.0
    mesh = build_mesh(Disk(1.0), target_h=0.1, grading_q=0.5, rings=8)
    mesh = refine(refine(mesh))
    K = assembly.stiffness(mesh).matrix
    Mw = assembly.hardy_mass(mesh, a).matrix
    w = assembly.constraint_vector(mesh, a).w
    ones = np.ones(mesh.num_vertices)
    k_res = float(np.abs(K @ ones).max())
    w_res = float(np.abs(w - Mw @ ones).max())
    mass = float(ones @ (Mw @ ones))
    exact = 2.0 * math.pi / math.log(a)
    mass_rel = abs(mass - exact) / exact
    ok = k_res < 1e-12 and w_res <= 1e-13 and mass_rel <= 1e-4
    _report(10, ok, f"|K 1|={k_res:.1e}, |w - Mw 1|={w_res:.1e}, "
                    f"mass rel err={mass_rel:.1e}")
    assert k_res < 1e-12
    assert w_res <= 1e-13
    assert mass_rel <= 1e-4


# -- 11 ---------------------------------------------------------------------

def test_acceptance_11_reproducibility(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "domain": {"kind": "disk", "radius": 1.0},
        "weights": {"a": 1.2},
        "mesh": {"target_h": 0.25, "grading_q": 0.6, "rings": 4},
        "a_list": [1.2],
        "outputs": {"dir": str(tmp_path / "out")},
    }))
    assert cli.main(["eigen", "--config", str(cfg_path)]) == 0
    out = tmp_path / "out"
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert cli.main(["eigen", "--config", str(cfg_path)]) == 0
    second = {p.name: p.read_bytes() for p in out.iterdir()}
    ok = first == second
    _report(11, ok, f"{len(first)} artifacts byte-identical across runs")
    assert ok
