"""
Training on one digit and sampling new images
=============================================

The full pipeline: PCA on the class images, adversarial training of the
eight-circuit generator against the discriminator with the adaptive noise
range, then inference through the inverse PCA.  The default run (500
iterations) takes well under a minute on one CPU core.
"""
import numpy as np

from mosaiq import checkpoint, dataio, trainer

data = dataio.load_idx("data/mnist5k-images-idx3-ubyte", "data/mnist5k-labels-idx1-ubyte")
zeros = dataio.filter_class(data, 0)

config = trainer.TrainConfig(seed=0, class_id=0)


def show(row):
    it, g_loss, d_loss, bound = row
    if it % 100 == 0:
        print(f"iter {it:4d}  G_L {g_loss:.3f}  D_L {d_loss:.3f}  noise bound {bound:.3f}")


ckpt = trainer.train(config, zeros, on_step=show)
print("reference ratio G_L0/D_L0 =", round(ckpt.ratio0, 4))

# the checkpoint is a small binary file; reloading gives identical samples
checkpoint.save(ckpt, "digit0.msq")
again = checkpoint.load("digit0.msq")
a = trainer.sample_images(ckpt, 16, np.random.default_rng(1))
b = trainer.sample_images(again, 16, np.random.default_rng(1))
print("reload reproduces samples:", np.array_equal(a, b))

dataio.export_pgm_batch(a, "digit0_samples")
print("wrote 16 images to digit0_samples/")
