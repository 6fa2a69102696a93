"""The lag-1 slope of a filtered location as a function of lambda0.

With independent errors the true lambda0 sits at an extremum of the
profile. With cross-correlated errors it generally does not, and the
residual criterion is what singles it out.
"""

# %%
import numpy as np

from sdpd import CrossMode, correlation_profile, gen_spatial_matrix, population_covariances, random_model

W = gen_spatial_matrix("W1", 10, seed=1)
grid = np.linspace(-3, 3, 13)
for mode in (CrossMode.INDEPENDENT, CrossMode.COMMON_FACTOR):
    model = random_model(W, seed=2, cross_mode=mode)
    prof = correlation_profile(population_covariances(model), W, 3, grid)
    print(mode.value)
    print("  true (l0, l1):     ", np.round([model.lambda0[3], model.lambda1[3]], 4))
    print("  selected:          ", np.round(prof.selected, 4))
    print("  stationary points: ", [(round(x, 4), round(y, 4)) for x, y in prof.stationary])
    print("  profile on grid:   ", np.round(prof.lambda1, 3))
