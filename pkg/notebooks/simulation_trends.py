"""Demo: finite-blocklength behaviour of the three-layer code on the example channel.

Shows the encoder covering step improving with n at a loose typicality
parameter, and the empirical covering success across threshold offsets.
Run with ``python3 notebooks/simulation_trends.py``.
"""
from statecoder import SimConfig, covering_experiment, example_channel, run_trials, section3_scheme
from statecoder.itcore import binary_entropy

ch, aux = example_channel(), section3_scheme()

print("eps   n  enc_fail  overall_err")
for eps in (0.1, 0.35):
    for n in (8, 16, 24):
        r = run_trials(ch, aux, SimConfig(n=n, R=0.43, T1=0.35, T2=0.35, epsilon=eps, trials=300, seed=7))
        print(f"{eps:<5} {n:>2}  {r.encoder_failure_rate:8.3f}  {r.overall_error_rate:11.3f}")

# Single-layer covering threshold is I(U;S) = h(1/4) - 1/2 for each satellite.
c = binary_entropy(0.25) - 0.5
grid = [c - 0.05, c, c + 0.05, c + 0.1]
tab = covering_experiment(ch, aux, 24, grid, grid, trials=300, epsilon=0.35, seed=3)
print("\ncovering success at n=24 (rows T1, columns T2):")
print(tab.success.round(3))
print("monotone in both thresholds:", tab.is_monotone())
