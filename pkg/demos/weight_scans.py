"""Muckenhoupt and Adams weight-condition scans.

Scans sup over (center, radius) of the A2-type quantity S(x, r) and the
Riesz-potential pair T * J^{p/2}.  Above the critical exponent both sups
stabilize under grid doubling; below it the Adams product grows without
bound as the radius shrinks, which is the numerical signature of the
failed embedding.
"""

from loghardy.weights import (
    GridSpec,
    WeightParams,
    adams_quantities,
    critical_A,
    scan_sup,
)


def main():
    par = WeightParams(a=2.0, A=2.5, B=0.5, p=2.0)
    grid = GridSpec(n_centers=8, n_radii=8, r_min=1e-4, r_max=4.0,
                    c_min=1e-4, c_max=4.0)
    for kind in ("muckenhoupt", "adams"):
        rep = scan_sup(kind, par, grid)
        (cx, cy), r = rep.argmax
        print(f"{kind}: sup ~= {rep.sup_estimate:.5f} at "
              f"center ({cx:.3f}, {cy:.3f}), radius {r:.4f}")

    print("\nsubcritical Adams product as r -> 0 (center at origin):")
    sub = WeightParams(a=2.0, A=critical_A(2.0, 0.5) - 0.3, B=0.5, p=2.0)
    for r in (1e-1, 1e-2, 1e-3, 1e-4, 1e-5):
        q = adams_quantities((0.0, 0.0), r, sub)
        print(f"  r = {r:.0e}: T*J^{{p/2}} = {q.product:.2f}")


if __name__ == "__main__":
    main()
