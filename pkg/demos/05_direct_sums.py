# %% [markdown]
# # Numerical index of direct sums
#
# For l1 and l_inf sums the index of the sum is the minimum of the summands'
# indices.  The suite checks this and the compression witness that explains it.

# %%
from lipindex import index, lp, real_line

for X, Y in [(lp(2, 2.0), real_line()), (real_line(), real_line())]:
    for kind in ("linf", "l1"):
        R = index.sum_stability_suite(X, Y, kind, budget=2000, seed=0)
        for c in R.cases:
            print(f"{kind:4s} {X.spec}+{Y.spec}: {c.name:22s} value={c.value:.4g} expected={c.expected:.4g} {c.status}")
