"""A spectral gap certificate for SL(3,Z) on ball(2).

Solving takes under a minute, rounding and correction a few seconds, and the
exact verification about half a minute.  The certificate is written to
sl3_ball2_certificate.json and can be checked again with
``kazhdan verify sl3_ball2_certificate.json``.
"""

import time

from kazhdan import assemble, ball, certify, make_engine, solve, verify

sl = make_engine("SL", 3)
p = assemble(sl, ball(sl, 2))
print(f"problem: {p.n_rows} rows, blocks {p.block_dims}")

t0 = time.time()
s = solve(p)
print(f"solver {s.status} in {time.time() - t0:.0f}s, epsilon ~ {s.primal_objective:.5f}")

t0 = time.time()
cert = certify(p, s)
print(f"certified epsilon' = {cert.epsilon} (~{float(cert.epsilon):.5f}), M = {float(cert.M):.2e}, "
      f"{time.time() - t0:.0f}s")

t0 = time.time()
res = verify(cert)
print(f"verify: {res.reason} ({time.time() - t0:.0f}s)")
with open("sl3_ball2_certificate.json", "w") as fh:
    fh.write(cert.dumps())
