"""Admissible (a, L) pairs and the resulting eigenvalue bound chain.

A pair is admissible when int_{B_L} (log a/|x|)^{-2} dx > 8 pi, which
forces the constrained eigenvalue below 1/4 on any domain squeezed between
B_L and B_1 with nonzero weighted first moments.  The chain value
2 |Omega| / int_{B_L} (log a/|x|)^{-2} dx is an explicit upper bound.
"""

import math

from loghardy import assembly, eigensolve
from loghardy.geometry import LDomain, build_mesh, refine, weighted_first_moments
from loghardy.weights import admissible_check


def main():
    print("grid search over (a, L):")
    found = []
    for a in (1.01, 1.05, 1.1, 1.2):
        for L in (0.7, 0.8, 0.9, 0.95):
            chk = admissible_check(a, L)
            tag = "admissible" if chk.admissible else ""
            print(f"  a={a:<5} L={L:<5} integral={chk.integral:8.3f} "
                  f"(threshold {8 * math.pi:.3f}) {tag}")
            if chk.admissible:
                found.append((a, L))

    a, L = found[0]
    spec = LDomain(L=L, bump_angle=0.0, bump_amplitude=0.1)
    mesh = refine(build_mesh(spec, target_h=0.06, grading_q=0.6, rings=6))
    mom = weighted_first_moments(mesh, a)
    print(f"\ndomain B_{L} subset Omega subset B_1, weighted moments "
          f"({mom.alpha1:.4f}, {mom.alpha2:.4f})")

    K = assembly.stiffness(mesh)
    Mw = assembly.hardy_mass(mesh, a)
    w = assembly.constraint_vector(mesh, a)
    res = eigensolve.second_neumann_eigen(K, Mw, w)
    area = float(mesh.triangle_areas().sum())
    chain = 2.0 * area / admissible_check(a, L).integral
    print(f"lambda_a = {res.lam:.6f} <= chain bound {chain:.6f} < 1/4")


if __name__ == "__main__":
    main()
