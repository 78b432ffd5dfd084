"""Areas of the smoothed 6k+2 and 6k-2 polygons approach pi from both sides."""
import math

from reinhardt.polygon import MINUS, PLUS, PolygonFamily, build_polygon, interpolated_area

print(f"{'family':>6} {'k':>3} {'n':>4} {'area':>16} {'pi - area':>12}")
for tag, ks in ((PLUS, range(1, 9)), (MINUS, range(2, 10))):
    for k in ks:
        p = build_polygon(PolygonFamily(tag, k))
        print(f"{tag:>6} {k:3d} {p.family.sides:4d} {p.area:16.12f} {math.pi - p.area:+12.3e}")

# The 6k-2 family, read at real k, degenerates as k -> 1 to a rectangle
# of area sqrt12.
print("\nminus family near k = 1 (no closure, real k)")
for eps in (1e-1, 1e-2, 1e-3, 1e-4):
    a = interpolated_area(PolygonFamily(MINUS, 1 + eps))
    print(f"  k = 1 + {eps:.0e}: area {a:.8f}, sqrt12 - area {math.sqrt(12) - a:.2e}")
