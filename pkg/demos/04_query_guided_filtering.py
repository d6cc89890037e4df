"""
Filtering grounding proposals with queries
==========================================

The most confident proposals for the specific prompt act as queries. Proposals
that pass the generic-prompt threshold are kept when they look like at least
one query.
"""

from collections import Counter

from masort.qgm import FilterConfig, filter_proposals
from masort.synth import generate_proposal_pool

# A pool with a tight class cluster, distractors of the same category and
# low-scoring background boxes.
pool = generate_proposal_pool(seed=0)
label = {id(p): lab for p, lab in zip(pool.proposals, pool.labels)}
print("pool:", dict(Counter(pool.labels)))

kept = filter_proposals(pool.proposals, FilterConfig(kappa=5, t_gen=0.3, tau_sim=0.85))
print("kept:", dict(Counter(label[id(p)] for v in kept.values() for p in v)))

# Raising the similarity threshold can only shrink the output.
for tau in (0.0, 0.5, 0.85, 0.95, 1.0):
    n = sum(len(v) for v in filter_proposals(pool.proposals, FilterConfig(5, 0.3, tau)).values())
    print(f"tau_sim={tau:.2f}  kept={n}")
