"""Z and the Heisenberg group have no spectral gap on any finite support.

For both groups an explicit flat arrangement gives an exact dual point with
objective -2|S|, so the best epsilon on the support is at most zero.  The
numerical solver agrees.
"""

import numpy as np

from kazhdan import assemble, ball, flat_arrangement, make_engine, solve, translation_displacement

for family, radius in (("Z", 2), ("Heisenberg", 1), ("Heisenberg", 2), ("Heisenberg", 3)):
    g = make_engine(family, 1 if family == "Z" else None)
    E = ball(g, radius)
    fc = flat_arrangement(g, E)
    s = solve(assemble(g, E))
    print(f"{family:10s} ball({radius}): {len(E):4d} points, flat objective {fc.objective}, "
          f"exact epsilon bound {fc.dual_value}, solver epsilon {s.primal_objective:.2e}")

h = make_engine("Heisenberg")
rep = translation_displacement(flat_arrangement(h, ball(h, 2)).arrangement, "f")
print(f"central f moves every point by a vector of length {np.linalg.norm(rep.mean):.1e} (spread {rep.spread:.1e})")
