"""Touching sidewalls: the piston limit.

With h = 0 each square closes off a rectangular cavity and every loop is
a lattice image.  The even sum collapses to an Epstein zeta value and the
odd sum to -(pi/48)(1/s + 1/a).  This script compares the general
engines against those closed forms for a few shapes.
"""
import math

from raycasimir import Geometry
from raycasimir.even import even_energy
from raycasimir.odd import odd_energy
from raycasimir.piston import epstein_z2, piston_energy

print("Z2(1,1;3) =", epstein_z2(1.0, 1.0))
print(f"{'a':>5} {'s':>5} {'E_even':>14} {'piston':>14} {'E_odd':>14} {'piston':>14}")
for a, s in [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (0.5, 1.0)]:
    g = Geometry(a, s, 0.0)
    ref = piston_energy(g)
    ev = even_energy(g, tol=1e-8)
    od = odd_energy(g, tol=1e-5)
    print(f"{a:5.2f} {s:5.2f} {ev.energy:14.9f} {ref.even:14.9f} {od.energy:14.9f} {ref.odd_paths:14.9f}")

# the odd series converges like 1/r; the extrapolated limit is much better
# than the raw partial sum at the same cutoff
od = odd_energy(Geometry(1.0, 1.0, 0.0), tol=1e-5)
print("\nodd partial at r =", od.report.max_order, ":", od.report.partial[-1])
print("extrapolated          :", od.energy, "+/-", od.energy_error)
print("-pi/24                :", -math.pi / 24)
