"""Surrogate model stack: autoencoder, latent regressor, fusion, bundle."""

from .autoencoder import CaerAutoencoder, encoder_sizes
from .bundle import ModelBundle, model_checksum
from .latent import LatentAggregator, LatentPredictor, make_descriptor

__all__ = [
    "CaerAutoencoder",
    "LatentAggregator",
    "LatentPredictor",
    "ModelBundle",
    "encoder_sizes",
    "make_descriptor",
    "model_checksum",
]
