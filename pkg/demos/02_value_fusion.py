"""Picking one value when several offers disagree.

Each candidate value becomes a binary term vector; the value nearest to
the centroid wins.  That favours the value sharing the most terms with
the others, and reduces to majority voting when values are atomic.

    python demos/02_value_fusion.py
"""

import numpy as np

from prodsynth.pipeline import centroid_distances, fuse_value, term_vectors

values = ["Windows Vista", "Microsoft Windows Vista", "Microsoft Vista"]
vecs, X = term_vectors(values)
centroid, dist = centroid_distances(values)

print("terms:", vecs[0].terms)
print(X)
print("centroid:", np.round(centroid, 3))
for v, d in zip(values, dist):
    print(f"  {v!r:28} distance {d:.4f}")
print("fused:", fuse_value(values))

memory = ["1024", "1024", "1024", "1024", "2048"]
print("\nmemory", memory, "->", fuse_value(memory))

# An exact tie falls to the more frequent value, then to the smaller string.
print("tie", ["500 GB", "320 GB"], "->", fuse_value(["500 GB", "320 GB"]))
