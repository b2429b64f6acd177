# %% [markdown]
# # Verification suites and reports
#
# Each suite returns a report of cases with status pass, fail or unconverged.
# Reports serialize to JSON or CSV, the same formats the command line writes.

# %%
import json

from lipindex import index, parse_space

R = index.known_values_suite(seed=0, dims=(2, 3), random_ops=5)
print(f"known values: {len(R.cases)} cases, ok={R.ok}")

R = index.bk_suite(parse_space("cl2:2"), samples=50, seed=0)
print(f"lower-bound check on cl2:2: {len(R.cases)} cases, failures={len(R.failures)}")

R = index.ck_suite(3, samples=20, eps=1e-2, seed=0)
print(index.report_to_csv(R).splitlines()[:3])

R = index.rnp_equality_suite(parse_space("linf:3"), budget=500, seed=0)
print(json.dumps(index.report_to_json(R))[:300], "...")
