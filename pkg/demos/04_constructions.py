# %% [markdown]
# # Building Lipschitz maps with prescribed values
#
# Extensions from two points, the midpoint join, witness searches and the
# diagonal lift to product spaces.

# %%
import numpy as np

from lipindex import constructions as cn
from lipindex import LinearOperator, lip_norm, lp, random_pwl

X = lp(2, 2.0)
e1 = np.array([1.0, 0.0])

# %% 1-Lipschitz scalar function through two points
f = cn.mcshane_extend(np.zeros(2), e1, X)
print("f(0)=", f(np.zeros(2)), " f(e1)=", f(e1), " f(2 e1)=", f(2 * e1))

# %% M-Lipschitz map X -> X hitting y1 at x1 and y2 at x2
F = cn.segment_extension(np.zeros(2), e1, np.zeros(2), np.array([0.0, 1.0]), 1.0, X)
print("F(2 e1) =", F(2 * e1), "  sampled Lipschitz quotient:", F.max_quotient(pairs=5000, seed=0))

# %% Witness search on l_inf: the search either finds a decomposition or says why not
Y = lp(2, np.inf)
w = cn.lush_witness(Y, np.array([1.0, 0.3]), np.array([0.2, 1.0]), 0.1)
print(type(w).__name__, getattr(w, "achieved_distance", getattr(w, "reason", None)))

# %% Boosting a near-norming pair in C(K)-type spaces
Z = lp(3, np.inf)
T = LinearOperator(Z, np.array([[1.0, 1.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.2]]))
z, s, g, value = cn.ck_witness_boost(Z, T, np.array([1.0, 1.0, 0.0]), np.zeros(3), 1e-2)
print("boosted point", z, "coordinate", s, "value", value)

# %% Lift a map on X to the diagonal of the l1 power; the Lipschitz norm is kept
S = random_pwl(lp(1, 2.0), 2, seed=1)
L = cn.diagonal_lift(S, 2)
print("lip_norm S =", lip_norm(S), " lifted =", lip_norm(L))
