from .ops import (
    ConvParams,
    FCParams,
    conv2d_forward,
    conv2d_backward,
    maxpool_forward,
    maxpool_backward,
    relu_forward,
    relu_backward,
    fc_forward,
    fc_backward,
    upsample_nearest,
    upsample_nearest_backward,
    glorot_uniform,
)
from .losses import softmax_cross_entropy, mse_loss
from .optim import SGDConfig, clip_gradients, sgd_step
from .weights import write_bundle, read_bundle, write_bundle_file, read_bundle_file

__all__ = [
    "ConvParams",
    "FCParams",
    "conv2d_forward",
    "conv2d_backward",
    "maxpool_forward",
    "maxpool_backward",
    "relu_forward",
    "relu_backward",
    "fc_forward",
    "fc_backward",
    "upsample_nearest",
    "upsample_nearest_backward",
    "glorot_uniform",
    "softmax_cross_entropy",
    "mse_loss",
    "SGDConfig",
    "clip_gradients",
    "sgd_step",
    "write_bundle",
    "read_bundle",
    "write_bundle_file",
    "read_bundle_file",
]
