"""
Deterministic embeddings and density clustering
===============================================

The hash embedder turns token overlap into cosine geometry with no model
downloads, which makes clustering runs reproducible bit for bit. Density
clustering then finds the dense regions and labels the rest outliers.
"""

import numpy as np

from forumlens import ClusterParams, cluster, hash_embed

# Three tiny "topics": each sentence reuses its topic's vocabulary.
sentences = [
    "reset bios password with jumper",
    "bios password recovery via jumper reset",
    "jumper reset clears the bios password",
    "bulk sms sender service cheap rates",
    "cheap bulk sms service with good rates",
    "sms sender rates for bulk campaigns",
    "totally unrelated musing about weather",
]

vectors = np.stack([hash_embed(s, dimension=64, seed=0) for s in sentences])

# Cosine similarity mirrors token overlap: the first three sentences are
# mutually close, the next three as well, the last one near nothing.
print("cosine matrix (rounded):")
print(np.round(vectors @ vectors.T, 2))

# On unit vectors, Euclidean distance orders pairs exactly like cosine, so
# the density clusterer needs no special metric handling.
result, tree = cluster(vectors, ClusterParams(min_cluster_size=3, min_samples=2))
print(f"\nlabels: {result.labels.tolist()}")
print(f"clusters: {result.cluster_count}, outliers: {result.outlier_count}")

# The condensed hierarchy records when each point left its cluster
# (lambda = 1/distance). Birth rows for child clusters carry their size.
print("\ncondensed tree rows (parent, child, lambda, size):")
for row in zip(tree.parents, tree.children, tree.lambdas, tree.sizes):
    print(f"  {int(row[0]):3d} {int(row[1]):3d} {row[2]:8.3f} {int(row[3]):3d}")
