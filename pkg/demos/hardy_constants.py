"""Best-constant experiments for the critical Hardy family.

Three views of the same phenomenon:
  * the Dirichlet quotient on a deeply graded disk mesh creeps down toward
    the non-attained constant 1/4 (never below, never reaching it);
  * the radial-restricted constants with log-power weights sit above
    ((1-B)/2)^2 for the same reason;
  * the scaling family is exactly invariant at the critical exponent and
    degenerates at a known power rate below it.
"""

from loghardy.analysis import (
    radial_hardy_constant,
    scaling_family_quotient,
    sobolev_constant_estimate,
)
from loghardy.geometry import Disk, build_mesh, refine
from loghardy.weights import WeightParams, critical_A


def main():
    par = WeightParams(a=2.0, A=2.0, B=0.0, p=2.0)
    mesh = build_mesh(Disk(1.0), target_h=0.45, grading_q=0.5, rings=120)
    print("Dirichlet quotient on a disk graded to r_min ~ e^-83:")
    for level in range(3):
        est = sobolev_constant_estimate(mesh, par)
        print(f"  refinement {level}: estimate {est.c_estimate:.5f} "
              f"(best constant 1/4, not attained)")
        if level < 2:
            mesh = refine(mesh)

    print("\nradial constants with log-power weights (theory ((1-B)/2)^2):")
    for B in (-0.5, 0.0, 0.5):
        c = radial_hardy_constant(2.0, B)
        print(f"  B = {B:+.1f}: estimate {c:.4f} >= {((1 - B) / 2) ** 2:.4f}")

    print("\nscaling family quotient:")
    crit = critical_A(2.0, 0.0)
    for A, label in [(crit, "critical"), (crit - 0.3, "subcritical")]:
        p = WeightParams(a=2.0, A=A, B=0.0, p=2.0)
        vals = [scaling_family_quotient(lam, p) for lam in (1.0, 0.1, 0.02)]
        print(f"  A = {A:.2f} ({label}): R[u_1], R[u_0.1], R[u_0.02] = "
              + ", ".join(f"{v:.6f}" for v in vals))


if __name__ == "__main__":
    main()
