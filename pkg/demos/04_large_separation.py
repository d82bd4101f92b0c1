"""Far-apart squares with a fixed sidewall gap.

At h = 0.25 the total force decays roughly like 1/a^2 rather than the
parallel-plate 1/a^3, and its ratio to the touching-sidewall (piston)
force settles to a constant.
"""
from raycasimir.assembly import fit_power, sweep_a

grid = [1.0, 2.0, 4.0, 8.0, 16.0]
res = sweep_a(0.25, 1.0, grid, normalize="piston")
for r, fp in zip(res.records, res.piston):
    print(f"a = {r.a:5.1f}  F_total = {r.F_total: .6e}  /F_pfa(both) = {r.F_total_over_Fpfa:8.4f}  /F_piston = {r.F_total / fp:.4f}")
print("fitted power of |F_total|:", round(fit_power(grid, [r.F_total for r in res.records]), 3))
