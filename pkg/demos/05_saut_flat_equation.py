"""Multiplicities in the S-flat equation for SAut(F_4).

For an arrangement in which every generator has the same distance to the
identity, flatness at E(f1,f2) reads  sum_s |alpha(E(f1,f2) s)|^2 = 2|S|.
Grouping the 48 products by distance class gives the coefficients below.
"""

from kazhdan import ball, build_class_table, flat_objective, make_engine

g = make_engine("SAut", 4)
table = build_class_table(g, ball(g, 1), "point+distance")
s0 = g.generator("E(f1,f2)")
mult, const = flat_objective(g, table, s0)
name = {}
for s, label in zip(g.generators, g.labels):
    name.setdefault(table.classify(g.mul(s0, s)), f"E(f1,f2) {label}")
for cid, k in sorted(mult.items(), key=lambda kv: -kv[1]):
    print(f"{k:2d} x |alpha({name[cid]})|^2")
print(f"constant 2|S| = {const}")
