# %% [markdown]
# # Exact 2d action as a cubic polynomial
#
# Interval counts are built from ancilla bits: products of relations, a
# ripple-carry counter per pair, and indicator bits for "count == j". All
# consistency conditions are squared residuals times a penalty weight.

# %%
from qcauset.action import bd_action_2d_exact
from qcauset.causet import CausalSet
from qcauset.exactbd import build_encoding, consistent_assignment, evaluate, qubit_count, verify_encoding

enc = build_encoding(4)
print("variables", enc.layout.qubit_count, enc.layout.counts_by_family())
print("terms", len(enc.poly), "degree", enc.poly.degree, "lambda", enc.lam)

# %%
chain = CausalSet.chain(4)
x = consistent_assignment(chain, enc.layout)
print(evaluate(enc.poly, x), bd_action_2d_exact(chain))

# %%
for n in (3, 4, 5):
    print(verify_encoding(n).summary())
print([(n, qubit_count(n)) for n in range(2, 9)])
