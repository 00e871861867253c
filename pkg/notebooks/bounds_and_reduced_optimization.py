"""Demo: single-layer versus three-layer rates on the binary example channel.

Run with ``python3 notebooks/bounds_and_reduced_optimization.py``.
"""
from statecoder import (appendix_b_maximize, appendix_b_witness, deterministic_capacity, example_channel,
                        gp_rate, maximize_gp, section3_scheme, thm1_rate)
from statecoder.optimizer import appendix_b_grid

ch = example_channel()

# The 3-letter single-layer witness attains the single-layer optimum.
print("3-letter witness:", gp_rate(ch, appendix_b_witness()).terms)

# Random-restart search over |U| <= 4 lands on the same value.
_, rep = maximize_gp(ch, 4, budget=200)
print(f"searched single-layer rate: {rep.overall:.6f}")

# The reduced two-parameter problem has its maximum at (t, s4) = (4/3, 0).
opt = appendix_b_maximize()
print(f"reduced optimum: t={opt.t:.6f}, s4={opt.s4:.6f}, value={opt.value:.7f}")
print("grid check (step 1e-3):", appendix_b_grid(1e-3))

# The three-layer scheme with W trivial, U = Y1, V = Y2 reaches capacity.
r3 = thm1_rate(ch, section3_scheme())
print("three-layer terms:", r3.terms, "-> rate", round(r3.overall, 12))
print(f"deterministic-class capacity: {deterministic_capacity(ch).value:.6f}")
print(f"gap closed by the extra layers: {r3.overall - rep.overall:.5f} bits")
