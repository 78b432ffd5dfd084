"""Maximum principle checks for the polygon families and the circle."""
import numpy as np

from reinhardt.costate import singular_state, switching
from reinhardt.pmp import (classify_state, local_deformation_quadratic, singular_link_deviation,
                           solve_costate_bvp, verify_extremal)
from reinhardt.polygon import MINUS, PLUS, PolygonFamily, build_polygon

# The costate at t = 0 is the null vector of a small linear boundary system.
for tag, ks in ((PLUS, (1, 2, 3, 4)), (MINUS, (2, 3, 4))):
    for k in ks:
        p = build_polygon(PolygonFamily(tag, k))
        c = solve_costate_bvp(p)
        rep = verify_extremal(p, costate=c)
        print(f"{tag} k={k}: lambda_cost {c.lambda_cost:+.0f} ({rep.lambda_cost_sign}), "
              f"sup|H| {rep.hamiltonian_sup_norm:.1e}, min gap {min(rep.switching_margins):.2e}, "
              f"verdict {rep.verdict}")
        for r in rep.reasons:
            print("      ", r)

# The circle is a singular arc: every switching function vanishes.
s = singular_state()
print("\ncircle state:", classify_state(s), "switching", np.round(switching(s), 15))

# Leaving the circle along an E3 link drives nu2 negative, so no extremal link
# can start there.
ts, nu2, formula = singular_link_deviation()
print(f"singular link: max deviation from closed form {np.abs(nu2 - formula).max():.1e}, "
      f"nu2(2) = {nu2[-1]:.6f}")

# Second-order behaviour of the cost along nearby four-link closed curves.
q = local_deformation_quadratic()
print(f"\ndeformation: b1 = {q.b1:.2e}, b2 = {q.b2:.5f}, first-order a = {np.round(q.a1, 6)}")
