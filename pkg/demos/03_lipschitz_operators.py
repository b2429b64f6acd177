# %% [markdown]
# # Continuous piecewise-linear maps
#
# For a CPWL map the Lipschitz constant and the Lipschitz numerical radius are
# maxima over the cells, so both can be computed exactly and compared against
# two-point sampling.

# %%
import numpy as np

from lipindex import lip_norm, lip_radius, lp, random_pwl
from lipindex import index, lipop

X = lp(2, np.inf)
T = random_pwl(X, 2, seed=4)
print("cells:", len(T.cells))
print("Lipschitz norm, exact:  ", lip_norm(T))
print("Lipschitz norm, sampled:", lipop.lip_norm_sampled(T, seed=0))
B = lip_radius(T, seed=0)
print("Lipschitz radius bracket:", B.lower, B.upper)

# %% Lipschitz index never exceeds the linear index
for spec in ["l2:2", "linf:2"]:
    from lipindex import parse_space
    Y = parse_space(spec)
    lin = index.estimate_index(Y, index.LINEAR, budget=1000, seed=0).upper
    lip = index.estimate_index(Y, index.LIPSCHITZ, budget=1000, seed=0).upper
    print(f"{spec}: linear {lin:.4f}  lipschitz {lip:.4f}")
