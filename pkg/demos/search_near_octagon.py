"""Shooting from reduced initial conditions around the octagon."""
import collections
import time

from reinhardt.search import (TERMINAL_HIT, best_hit, grid_search, octagon_box, octagon_cost,
                              octagon_initial_state, reduce, shoot)

r = reduce(octagon_initial_state())
out = shoot(r)
print(f"octagon shot: {out.kind}, {out.n_links} links, cost {out.cost:.10f} "
      f"(polygon {octagon_cost():.10f})")
print("switch times", [round(t, 6) for t in out.switch_times])

for hw in (1e-3, 1e-2):
    lo, hi = octagon_box(hw)
    t0 = time.perf_counter()
    table = grid_search(lo, hi, 3)
    counts = collections.Counter(o.kind for _, _, o in table)
    best = best_hit(table)
    print(f"\nhalf-width {hw:g}: {len(table)} shots in {time.perf_counter() - t0:.1f} s")
    for kind, n in sorted(counts.items()):
        print(f"  {kind:22s}{n}")
    if best:
        print(f"  best {TERMINAL_HIT}: index {best[0]}, cost {best[2].cost:.10f}")
