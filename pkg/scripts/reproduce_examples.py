"""Recompute the worked examples: roof values, successive minima and smooth solves."""
import argparse
import math
from fractions import Fraction as F

from toricroof.adelic import global_roof
from toricroof.builders import (
    SubtorusData,
    hirzebruch,
    lp_metric,
    standard_simplex,
    subtorus_canonical,
    subtorus_fs,
)
from toricroof.concave import roof_eval
from toricroof.exactnum import value_float
from toricroof.geometry import hull, lattice_points
from toricroof.minima import successive_minima, zhang
from toricroof.smoothsolve import solve


def show(name, vals):
    txt = ", ".join(f"{v.to_text() if hasattr(v, 'to_text') else v} (~{value_float(v):.6f})" for v in vals)
    print(f"{name:28s} {txt}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--skip-smooth", action="store_true", help="skip the numeric solves")
    args = ap.parse_args()

    cubic = subtorus_canonical(SubtorusData([(1,), (2,), (3,)], [1, 4, F(1, 3), F(1, 2)])).spec
    th = global_roof(cubic)
    show("cubic roof at 0..3", [roof_eval(th, (x,)) for x in range(4)])
    show("cubic minima", successive_minima(cubic).mu)
    z = zhang(cubic)
    show("cubic sum mu, h/deg, bound", [z.sum_mu, z.height_over_degree, z.bound])

    quadric = subtorus_canonical(SubtorusData([(1, 0), (0, 1), (1, 1)], [1, 2, 4, 1])).spec
    show("quadric minima", successive_minima(quadric).mu)

    sq = hull([(0, 0), (1, 0), (0, 1), (1, 1)])
    show("FS quadric minima", lp_metric(sq, 2, {m: 1 for m in lattice_points(sq)}).mu)
    for r in (1, 2, 3):
        d = standard_simplex(r)
        show(f"FS on P^{r}", lp_metric(d, 2, {m: 1 for m in lattice_points(d)}).mu)
    show("Hirzebruch a0=1, b=1", hirzebruch(1, 1).mu)

    if not args.skip_smooth:
        r4 = solve(subtorus_fs(SubtorusData([(1,), (2,)], [1, F(1, 4), F(1, 2)])).spec)
        print(f"{'smooth curve mu_ess':28s} {r4.mu_ess:.12f} vs (1/2)log 17 = {0.5 * math.log(17):.12f}; u0 = {r4.u0}")
        r5 = solve(subtorus_fs(SubtorusData([(1, 0), (0, 1), (1, 1)], [1, 2, 4, 1])).spec)
        print(f"{'smooth surface mu_ess':28s} {r5.mu_ess:.12f} vs log(3 sqrt 2) = {math.log(3 * math.sqrt(2)):.12f}; u0 = {r5.u0}")


if __name__ == "__main__":
    main()
