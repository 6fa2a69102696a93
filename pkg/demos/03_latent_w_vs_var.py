"""Transition-matrix estimates with and without a known W.

The Yule-Walker VAR needs T > p. The SDPD plug-in estimator works for
any T, using either the true W or a W-hat built from lag-0 correlations.
"""

# %%
import numpy as np

from sdpd import McConfig, run_monte_carlo

ests = ["sdpd_known_w", "sdpd_estimated_w", "var"]
for p, T in ((50, 100), (50, 500), (100, 50)):
    s = run_monte_carlo(McConfig(p=p, T=T, replications=30, estimators=ests))
    cells = []
    for name in ("ase_A_sdpd_known_w", "ase_A_sdpd_estimated_w", "ase_A_var"):
        v = s.values(name)
        cells.append(f"{np.nanmedian(v):.2e}" if np.isfinite(v).any() else s.note(name))
    print(f"p={p:3d} T={T:4d}  known W {cells[0]:>10}  W-hat {cells[1]:>10}  VAR {cells[2]:>14}")

# %% W-hat is a stand-in, so its error levels off as T grows while the
# known-W error keeps falling.
