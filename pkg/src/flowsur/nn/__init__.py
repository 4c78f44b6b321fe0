from .tensor import Tensor
from .layers import (
    LayerParams,
    Conv,
    ConvTranspose,
    Dense,
    ResidualBlock,
    collect_params,
)
from .optim import OptimizerConfig, adam_step
from .container import ContainerError, read_container, write_container, file_checksum

__all__ = [
    "Tensor",
    "LayerParams",
    "Conv",
    "ConvTranspose",
    "Dense",
    "ResidualBlock",
    "collect_params",
    "OptimizerConfig",
    "adam_step",
    "ContainerError",
    "read_container",
    "write_container",
    "file_checksum",
]
