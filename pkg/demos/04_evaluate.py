"""
Image quality and variety against the baselines
===============================================

FID compares Gaussians fitted to real and generated pixels; the variance
score V measures how far each image sits from the mean generated image.
Needs ``digit0.msq`` from the previous demo.
"""
import numpy as np

from mosaiq import checkpoint, dataio, metrics, pca, trainer

data = dataio.load_idx("data/mnist5k-images-idx3-ubyte", "data/mnist5k-labels-idx1-ubyte")
real = dataio.filter_class(data, 0).images
ckpt = checkpoint.load("digit0.msq")

rng = np.random.default_rng(7)
generated = trainer.sample_images(ckpt, 500, rng)
random_features = trainer.baseline_pca_inverse(pca.fit(real, 40), 500, rng)
classical = trainer.sample_images(trainer.baseline_classical_pca(ckpt.config, real), 500, rng)

half = len(real) // 2
print(f"real vs real (split)   FID {metrics.fid(real[:half], real[half:]):7.2f}")
print(f"quantum generator      FID {metrics.fid(real, generated):7.2f}")
print(f"classical generator    FID {metrics.fid(real, classical):7.2f}")
print(f"random PCA features    FID {metrics.fid(real, random_features):7.2f}")

# variety: the adaptive bound learned in training against the narrow minimum
for label, bound in (("final adaptive bound", ckpt.noise_bound), ("fixed pi/8", np.pi / 8)):
    imgs = trainer.sample_images(ckpt, 200, np.random.default_rng(3), bound=bound)
    v = metrics.variance_scores(imgs)
    print(f"{label:>20}: median V {np.median(v):6.2f}  FID {metrics.fid(real, imgs):6.2f}")

cdf = metrics.empirical_cdf(metrics.variance_scores(generated))
print("V at the 10/50/90% points of the CDF:", [round(cdf[int(q * len(cdf)) - 1][0], 2) for q in (0.1, 0.5, 0.9)])
