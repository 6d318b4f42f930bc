"""
Principal components and how they are shared out
================================================

Images are compressed to 40 principal components, each min-max scaled to
[0, 1].  The components are then split across eight sub-generators so that
every circuit carries a similar share of the explained variance.

Run ``python scripts/mnist_subset_to_idx.py data`` first.
"""
import numpy as np

from mosaiq import dataio, featmap, pca

data = dataio.load_idx("data/mnist5k-images-idx3-ubyte", "data/mnist5k-labels-idx1-ubyte")
zeros = dataio.filter_class(data, 0)
print(len(zeros), "images of digit 0")

model = pca.fit(zeros, 40)
total = np.trace(np.cov(zeros.images, rowvar=False))
print(f"40 components keep {model.explained_variance.sum() / total:.1%} of the pixel variance")

# scaled features of the training images sit inside [0, 1] by construction
feats = pca.transform(model, zeros.images)
print("feature range", feats.min(), feats.max())

# reconstruct a few images and look at the error
back = pca.inverse(model, feats[:5])
print("per-image squared error", np.round(np.sum((back - zeros.images[:5]) ** 2, axis=1), 3))

# generator i gets component i plus a block from the weak end of the spectrum
balanced = featmap.assign(40, 8)
naive = featmap.contiguous(40, 8)
for name, a in (("balanced", balanced), ("contiguous", naive)):
    shares = featmap.variance_per_generator(a, model.explained_variance)
    print(f"{name:>10}: variance per generator {np.round(shares, 2)}")
print("generator 0 holds", balanced.per_generator[0])
