# %% [markdown]
# # Spectral gaps for uniform sampling
#
# Exact transition matrices over all causal sets of size N, for classical
# and quantum proposals under the uniform-validity acceptance rule.

# %%
from qcauset.mcmc import AcceptanceRule
from qcauset.proposals import ProposalStrategy
from qcauset.spectral import fit_scaling, gap_for

ns = (3, 4, 5)
rule = AcceptanceRule.uniform()
quantum = ProposalStrategy.uniform_quantum()
samples = quantum.draw_parameter_samples(1234)

rows = {}
for name, strategy in [("quantum", quantum), ("classical-mixed", ProposalStrategy(kind="classical-mixed"))]:
    gaps = [gap_for(n, strategy, rule, samples if strategy.is_quantum else None) for n in ns]
    fit = fit_scaling(ns, gaps)
    rows[name] = (gaps, fit)
    print(name, [f"{g.delta:.4f}+/-{g.error:.4f}" for g in gaps], f"k={fit.k:.3f}+/-{fit.k_error:.3f}")

# %%
# The same sweep from the command line writes a CSV:
#   qcauset sweep-N -n 3..5 --seed 1234 --strategies quantum,classical-mixed
