"""nn: walk encoder, projection head, optimizer and gradient verification on numpy."""

from .layers import (
    ForwardCache,
    check_finite,
    sigmoid,
    dense_forward,
    dense_backward,
    relu_forward,
    relu_backward,
    gru_forward,
    gru_backward,
)
from .params import NetworkSizes, PRESETS, get_preset, ParamSet, EncoderParams, ProjectionParams
from .network import (
    encoder_forward,
    encoder_backward,
    projection_forward,
    projection_backward,
    backward,
    relu_margin,
)
from .optim import AdamConfig, OptimizerState, adam_step
from .gradcheck import GRADCHECK_TOLERANCE, grad_check, gradcheck_suite


__all__ = [
    "ForwardCache",
    "check_finite",
    "sigmoid",
    "dense_forward",
    "dense_backward",
    "relu_forward",
    "relu_backward",
    "gru_forward",
    "gru_backward",
    "NetworkSizes",
    "PRESETS",
    "get_preset",
    "ParamSet",
    "EncoderParams",
    "ProjectionParams",
    "encoder_forward",
    "encoder_backward",
    "projection_forward",
    "projection_backward",
    "backward",
    "relu_margin",
    "AdamConfig",
    "OptimizerState",
    "adam_step",
    "GRADCHECK_TOLERANCE",
    "grad_check",
    "gradcheck_suite",
]
