"""Norm bounds for Harper's operator from one square in the Heisenberg group algebra."""

import numpy as np

from kazhdan import harper_curves, harper_sdp_bound
from kazhdan.harper import improved_square

b = harper_sdp_bound(improved_square())
print("bound from the averaged square:", b.bound)

curve = harper_curves(np.linspace(0.01, 0.25, 13), window=2048)
print(f"improved bound wins on ({curve.interval[0]:.4f}, {curve.interval[1]:.4f})")
print(" theta   known    improved  truncated")
for t, a, i, n in zip(curve.thetas, curve.literature, curve.improved, curve.truncated):
    print(f"{t:6.3f}  {a:.5f}  {i:.5f}   {n:.5f}")
