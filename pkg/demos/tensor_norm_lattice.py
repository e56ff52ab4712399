"""
Partition norms of a random tensor
==================================

Every partition of a tensor's axes induces an injective norm computed by
alternating maximization; coarser partitions give larger values, from the
operator norm at the bottom to the Hilbert-Schmidt norm at the top.
"""

import numpy as np

from multislice import (
    enumerate_partitions,
    hs_norm,
    operator_norm,
    partition_norm_detailed,
)

rng = np.random.default_rng(12)
tensor = rng.standard_normal((3, 4, 3))

print("order-3 tensor, shape", tensor.shape)
results = [
    partition_norm_detailed(tensor, part) for part in enumerate_partitions(3)
]
for res in sorted(results, key=lambda r: r.value):
    print(f"  {str(res.partition):>15}  {res.value:.8f}  (spread {res.spread:.1e})")

print("operator norm:       ", operator_norm(tensor))
print("Hilbert-Schmidt norm:", hs_norm(tensor))

# for matrices the finest partition is the largest singular value
mat = rng.standard_normal((5, 5))
finest = min(partition_norm_detailed(mat, p).value for p in enumerate_partitions(2))
print("\nmatrix check: finest partition", finest)
print("              top singular val", np.linalg.svd(mat, compute_uv=False)[0])
