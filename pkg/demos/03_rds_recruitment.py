"""A recruitment walkthrough you can read node by node.

Runs coupon-based peer recruitment (one seed, two coupons, sample of
eight) over a small generated network and prints the recruitment tree by
wave, mirroring how a recruitment diagram is usually drawn.
"""

import numpy as np

from rdsim import NetworkTargets, SamplerConfig, generate_network, run_rds

targets = NetworkTargets(
    node_count=30, prevalence=0.33, mean_degree=4.0, diff_activity=1.16, homophily_ratio=0.4
)
graph, z = generate_network(targets, np.random.default_rng(12))

config = SamplerConfig(num_seeds=1, coupons_per_node=2, target_sample_size=8)
forest = run_rds(graph, z, config, np.random.default_rng(5))

print(f"sampled {forest.size} of {graph.node_count} nodes, "
      f"{forest.max_wave} waves, {forest.reseed_count} reseeds")
print()
for wave in range(forest.max_wave + 1):
    members = [
        f"{int(forest.nodes[i])}({'+' if forest.attributes[i, 0] else '-'})"
        f"<-{int(forest.recruiters[i])}" if forest.recruiters[i] >= 0 else
        f"{int(forest.nodes[i])}({'+' if forest.attributes[i, 0] else '-'})seed"
        for i in range(forest.size)
        if forest.waves[i] == wave
    ]
    print(f"wave {wave}: " + "  ".join(members))

print("\nentry table (node, recruiter, wave, coupon, degree, attribute):")
for i in range(forest.size):
    recruiter = int(forest.recruiters[i])
    print(
        f"  node {int(forest.nodes[i]):2d}  "
        f"recruiter {recruiter if recruiter >= 0 else '-':>2}  "
        f"wave {int(forest.waves[i])}  "
        f"coupon {int(forest.coupon_indices[i]) if recruiter >= 0 else '-'}  "
        f"degree {int(forest.degrees[i]):2d}  "
        f"z={int(forest.attributes[i, 0])}"
    )
