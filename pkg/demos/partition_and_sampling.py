"""Partition functions, contact statistics and exact path samples on one environment."""
import numpy as np

from pinlab import (EventSpec, GaussianLaw, PolymerParams, build_kernel, build_partition_table,
                    contact_statistics, free_log_partition, gibbs_probability,
                    sample_environment, sample_paths)

kernel = build_kernel(0.5, horizon=1000)
law = GaussianLaw()
n = 400
env = sample_environment(law, (0, n), seed=11)

for h in (-1.5, -0.5, 0.5):
    params = PolymerParams(beta=1.0, h=h)
    table = build_partition_table(env, params, kernel, n)
    stats = contact_statistics(table)
    print(f"h={h:+.1f}  log Z={free_log_partition(table):9.3f}  "
          f"E[contacts]={stats.expected_contacts:7.2f}  "
          f"P(last contact > n/2)={gibbs_probability(env, params, kernel, n, EventSpec(last_above=n // 2)):.3f}")

# exact samples agree with the exact mean number of contacts
params = PolymerParams(1.0, -0.5)
table = build_partition_table(env, params, kernel, n)
paths = sample_paths(env, params, kernel, n, "free", np.random.default_rng(1), 2000, table=table)
counts = np.array([len(p.trajectory.epochs) for p in paths])
print(f"sampled mean contacts {counts.mean():.2f} +- {counts.std() / np.sqrt(len(counts)):.2f}, "
      f"exact {contact_statistics(table).expected_contacts:.2f}")
