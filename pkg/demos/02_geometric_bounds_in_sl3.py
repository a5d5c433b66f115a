"""Small geometric bounds for arrangements of SL(3,Z).

On {1, e, f, g, fg} the squared distance |alpha(ef)|^2 is at most the top root
of 2x^3 - 2x^2 - 4x + 1.  With nineteen points and one extra square the
combination |alpha(ef)|^2 + |alpha(eg)|^2 stays strictly below 4, and the
certificate for that is exact.
"""

import numpy as np

from kazhdan import assemble, bound_problem, build_support, certify, element, make_engine, solve, verify

sl = make_engine("SL", 3)

E = build_support(sl, elements=["1", "e", "f", "g", "f g"])
p = bound_problem(sl, E, "e f")
root = max(r.real for r in np.roots([2, -2, -4, 1]))
print(f"max |alpha(ef)|^2 on five points: {p.bound_from_value(solve(p).primal_objective):.6f} (root {root:.6f})")

points = ["1", "e", "f", "g", "fbar", "e*", "ebar*", "e f", "e* f", "f g", "e gbar", "ebar fbar",
          "fbar gbar", "fbar gbar*", "fbar e", "f gbar", "g fbar", "gbar ebar", "f ebar*"]
q = element(sl, {"e": 1, "e*": 1, "fbar": 1, "fbar*": 1, "g": 1, "g*": 1,
                 "ebar": -1, "ebar*": -1, "f": -1, "f*": -1, "gbar": -1, "gbar*": -1})
p = assemble(sl, build_support(sl, elements=points), "class", objective={"e f": 1, "e g": 1}, target=4, extra=[q])
cert = certify(p, solve(p))
res = verify(cert)
print(f"nineteen points: {p.n_rows} distance rows, bound {float(cert.bound):.6f}, "
      f"accepted={res.accepted}, margin {res.value}")
