"""Hybrid quantum-classical GAN for image generation on small quantum circuits.

Images are compressed to principal components, the components are spread
over an ensemble of 5-qubit variational circuits, and the ensemble is
trained against a classical discriminator with an adaptive noise range.
"""
from .trainer import Checkpoint, TrainConfig, train

__version__ = "0.1.0"

__all__ = ["Checkpoint", "TrainConfig", "train"]
