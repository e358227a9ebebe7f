# %% [markdown]
# # Quantum proposals
#
# The current causal set is loaded as a basis state and evolved under a
# weighted sum of the transitivity penalty, the truncated action and a
# transverse-field mixer. Measuring gives the proposal.

# %%
import numpy as np

from qcauset.causet import CausalSet, is_transitive
from qcauset.pauli import GammaConfig, combine
from qcauset.proposals import ParameterSample, ProposalStrategy, proposal_distribution, proposal_kernel

h = combine(GammaConfig(0.8, 0.0), 3)
print(h.to_text())

# %%
strategy = ProposalStrategy.uniform_quantum()
sample = ParameterSample(r_tc=0.8, r_bd=0.0, steps=5)
p = proposal_distribution(CausalSet.chain(3), strategy, sample)
valid = [b for b in range(8) if is_transitive(b, 3)]
print("mass on valid sets", p[valid].sum())
print("mass on invalid sets", p.sum() - p[valid].sum())

# %%
# Between valid sets the kernel is symmetric, so uniform acceptance keeps
# the uniform law stationary.
k = proposal_kernel(4, strategy, sample)
print("asymmetry", np.abs(k - k.T).max())
print("largest off-diagonal", (k - np.diag(np.diag(k))).max())

# %%
# A classical single-relation flip for comparison.
k_rel = proposal_kernel(4, ProposalStrategy(kind="relation"))
print("classical reachable targets per set", (k_rel > 0).sum(axis=1).mean())
print("quantum reachable targets per set", (k > 1e-6).sum(axis=1).mean())
