"""Demo: power split for the compound Gaussian channel with dirty-paper coding.

Run with ``python3 notebooks/gaussian_split.py``.
"""
from statecoder import GaussianCompound, dpc_auxiliary, optimize_power_split
from statecoder.gaussian_dpc import grid_power_split

for params in (GaussianCompound(0.5, 1, 1, P=1), GaussianCompound(0.5, 2, 1, P=1),
               GaussianCompound(0.3, 0.8, 1.7, P=2)):
    s = optimize_power_split(params)
    print(f"{params}: P1={s.P1:.6f} P2={s.P2:.6f} rate={s.rate:.6f} grid={grid_power_split(params, 1e-5)[1]:.6f}")

# The precoding coefficient removes the interference cost exactly.
for g, P, Q in ((1.0, 1.0, 1.0), (2.5, 0.7, 3.0), (0.4, 5.0, 10.0)):
    d = dpc_auxiliary(g, P, Q)
    print(f"g={g} P={P} Q={Q}: a={d.coefficient:.4f} rate={d.rate:.6f} C(g^2 P)={d.target:.6f}")
