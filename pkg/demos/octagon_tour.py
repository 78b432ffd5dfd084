"""A walk through the smoothed octagon as a bang-bang trajectory.

Run from the repository root: ``python demos/octagon_tour.py [outdir]``.
"""
import math
import sys
from pathlib import Path

import numpy as np

from reinhardt.cli import boundary_svg
from reinhardt.geometry import R_INV
from reinhardt.polygon import (PLUS, PolygonFamily, boundary_samples, build_polygon,
                               octagon_area_closed_form, shoelace_polygon_area,
                               turning_cross_products)

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")

# The octagon is the k = 1 member of the 6k+2 family: four E3 links of equal
# length, each rotated by R^-1 relative to the one before.
p = build_polygon(PolygonFamily(PLUS, 1))
print(f"y_1 = {p.y_k:.15f}  (1 + 3 y^2 = {1 + 3 * p.y_k ** 2:.15f}, 2 sqrt2 = {2 * math.sqrt(2):.15f})")
print(f"t_1 = {p.t_k:.15f}, period t_f = {p.t_f:.15f}")
print("schedule:", p.schedule)

g1 = p.trajectory.g(p.t_k)
print(f"trace(R^-1 g_1) = {np.trace(R_INV @ g1):.15f}  vs sqrt2 = {math.sqrt(2):.15f}")

# Closure modulo rotation.
res = p.closure_residuals()
print(f"|g(t_f) - R| = {res['g']:.2e}, |z(t_f) - R^-1.z(0)| = {res['z']:.2e}")

# The state z walks a triangle in the upper half-plane, one vertex per switch.
for t, z in zip(p.trajectory.switch_times, p.link_boundary_points()):
    print(f"  t = {t:.6f}: z = {z.real:+.6f} {z.imag:+.6f}i")

# Three ways to the area.
print(f"cost integral   {p.area:.12f}")
print(f"shoelace (4096) {shoelace_polygon_area(p, 4096):.12f}")
print(f"closed form     {octagon_area_closed_form():.12f}")
print(f"pi - area       {math.pi - p.area:.6f}")

b = boundary_samples(p, per_link=64)
print(f"central symmetry residual {np.abs(b[3:] + b[:3]).max():.1e}")
print(f"min turning cross product {turning_cross_products(b).min():.2e}")

out.mkdir(parents=True, exist_ok=True)
(out / "octagon.svg").write_text(boundary_svg(p, 64, guides=True))
print(f"wrote {out / 'octagon.svg'}")
