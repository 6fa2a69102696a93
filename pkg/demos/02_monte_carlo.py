"""A small Monte Carlo study: W1, p=10, several sample sizes.

ASE of lambda1 should shrink roughly like 1/T. The lambda0 error has a
heavier tail: at moderate T some locations pick the wrong root or lose
their real roots, which is why flagged locations are counted and
excluded.
"""

# %%
from sdpd import McConfig, run_monte_carlo

for T in (100, 500, 1000):
    s = run_monte_carlo(McConfig(p=10, T=T, replications=100, w_kind="W1"))
    m = s.metrics
    print(f"T={T:5d}  ASE(l0)={m['ase_lambda0'].mean:.4f}  ASE(l1)={m['ase_lambda1'].mean:.5f}"
          f"  flagged={s.degenerate_locations}  {s.wall_clock:.1f}s")

# %% Same study with one fixed coefficient draw and fresh errors only.
s = run_monte_carlo(McConfig(p=10, T=1000, replications=100, fixed_lambda=True))
print("fixed coefficients, T=1000: ASE(l0) =", round(s.metrics["ase_lambda0"].mean, 4))
