"""How fast do the loop sums converge?

At h = 0 the order-r contribution falls like 1/r^2, so the truncation
error falls like 1/r; the odd sum needs about twice the even order for
the same relative error.  With a gap the reduced directions that can
still close are limited to n < L/(2h), and the contributions steepen
towards 1/r^3 once r passes that scale.
"""
import numpy as np

from raycasimir import Geometry
from raycasimir.assembly import convergence_study
from raycasimir.piston import piston_energy


def slope(rep, lo=10, hi=100):
    r = np.asarray(rep.orders[1:], dtype=float)
    p = np.asarray(rep.partial)
    d = np.abs(np.diff(p) / p[1:])
    keep = (r >= lo) & (r <= hi) & (d > 0)
    return np.polyfit(np.log(r[keep]), np.log(d[keep]), 1)[0]


for h in (0.0, 0.01, 0.1):
    reps = convergence_study(Geometry(1.0, 1.0, h), 101)
    print(f"h = {h:5.2f}: successive-difference slope even {slope(reps['even']):.2f}, odd {slope(reps['odd']):.2f}")

g = Geometry(1.0, 1.0, 0.0)
exact = piston_energy(g)
reps = convergence_study(g, 201)
for name, ref in (("even", exact.even), ("odd", exact.odd_paths)):
    rep = reps[name]
    err = np.abs(np.asarray(rep.partial) - ref) / abs(ref)
    i = rep.orders.index(101)
    print(f"{name}: relative error {err[i]:.3e} at order 101, order * error = {101 * err[i]:.2f}")
