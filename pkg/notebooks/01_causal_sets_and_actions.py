# %% [markdown]
# # Causal sets and their actions
#
# A causal set on N labelled elements is stored as a bit pattern over the
# pairs (i, j), i < j, in lexicographic order. Bit k set means the k-th pair
# is related. Only transitive patterns are causal sets.

# %%
from qcauset.action import bd_action_2d_exact, bd_action_4d, bd_truncated
from qcauset.causet import CausalMatrix, CausalSet, abundances, count_violations, enumerate_causal_sets

for n in range(1, 7):
    print(n, len(enumerate_causal_sets(n)))

# %%
# "3:101" relates 1<2 and 2<3 but not 1<3, so one triple breaks transitivity.
m = CausalMatrix.from_string("3:101")
print(m, count_violations(m))

# %% [markdown]
# Abundances N_j count related pairs with exactly j elements between them.
# The smeared 4d action weights them with f4(j, eps).

# %%
chain = CausalSet.chain(4)
print("abundances", tuple(abundances(chain)))
for eps in (0.1, 0.05, 0.025):
    exact = bd_action_4d(chain, eps)
    trunc = bd_truncated(chain, eps, 4)
    print(f"eps={eps}: S={exact:.6f}  truncated={trunc:.6f}  diff/eps^3.5={(trunc - exact) / eps**3.5:.3f}")

# %%
# The unsmeared 2d action on the smallest chains.
for n in (2, 3, 4):
    print(n, bd_action_2d_exact(CausalSet.chain(n)), bd_action_2d_exact(CausalSet.antichain(n)))
