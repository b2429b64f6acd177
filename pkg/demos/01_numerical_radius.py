# %% [markdown]
# # Numerical radius of a matrix on a normed space
#
# The numerical radius of T on X is the sup of |f(Tx)| over unit x and
# unit functionals f with f(x) = 1.  We get a certified bracket [lower, upper].

# %%
import numpy as np

from lipindex import LinearOperator, lp, numerical_radius, op_norm_bracket, parse_space
from lipindex import linop

rot = np.array([[0.0, -1.0], [1.0, 0.0]])
shift = np.array([[0.0, 1.0], [0.0, 0.0]])

# %% Euclidean plane: a rotation has radius 0, a shift 1/2
for name, X, A in [("rotation on l2:2", lp(2, 2.0), rot),
                   ("shift on cl2:2", parse_space("cl2:2"), shift.astype(complex)),
                   ("rotation on linf:2", lp(2, np.inf), rot),
                   ("rotation on l3:2", parse_space("l3:2"), rot)]:
    T = LinearOperator(X, A)
    B = numerical_radius(T)
    lo, up, exact = op_norm_bracket(T)
    print(f"{name:22s} radius in [{B.lower:.6f}, {B.upper:.6f}] via {B.upper_method:10s} norm={lo:.6f}")

# %% The upper bound as a limit: bounds shrink as the step parameter goes to 0
T = LinearOperator(lp(2, 3.0), np.array([[1.0, 2.0], [-0.5, 0.3]]))
seq = linop.radius_upper_limit(T, seed=0)
print("running-min upper bounds:", np.round(seq.bounds[:6], 6), "... final", seq.final)
print("sampled lower bound:     ", linop.radius_lower(T, seed=0)[0])
