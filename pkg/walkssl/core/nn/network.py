"""
Copyright 2024 The walkssl authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""

"""Walk encoder and projection head assembled from the layers, with a cache-driven backward."""

import numpy as np

from walkssl.core.abc import DimensionError, MissingCacheError

from .layers import (
    ForwardCache,
    dense_backward,
    dense_forward,
    gru_backward,
    gru_forward,
    relu_backward,
    relu_forward,
)
from .params import EncoderParams, ProjectionParams


def _as_batch(seq, dtype) -> tuple[np.ndarray, bool]:
    x = np.asarray(getattr(seq, "steps", seq), dtype=dtype)
    single = x.ndim == 2
    if single:
        x = x[None]
    return x, single


def encoder_forward(params: EncoderParams, seq):
    """
    Encode walk sequences into features.

    Args:
        params: Encoder parameters.
        seq: A StepSequence, an (L, D) array or a (B, L, D) batch.

    Returns:
        ``(features, cache)``; features are (F,) for a single sequence and
        (B, F) for a batch, F being ``params.sizes.fc_out``.

    Raises:
        DimensionError: If the step width does not match ``in_dim``.
        NumericError: If a layer produces a non-finite activation.
    """
    sizes = params.sizes
    x, single = _as_batch(seq, params.dtype)
    if x.ndim != 3 or x.shape[-1] != sizes.in_dim or x.shape[1] < 1:
        raise DimensionError(f"(B, L, {sizes.in_dim})", x.shape)

    steps = []
    for i in range(len(sizes.fc_in)):
        name = f"fc_in.{i}"
        x, c = dense_forward(x, params[f"{name}.weight"], params[f"{name}.bias"], name)
        steps.append(c)
        x, c = relu_forward(x, f"{name}.relu")
        steps.append(c)
    for i in range(len(sizes.gru)):
        x, c = gru_forward(x, params.arrays, f"gru.{i}")
        steps.append(c)
    last = x[:, -1, :]
    out, c = dense_forward(last, params["fc_out.weight"], params["fc_out.bias"], "fc_out")
    steps.append(c)

    cache = ForwardCache(
        "encoder", "encoder", {"steps": steps, "seq_shape": x.shape, "single": single}
    )
    return (out[0] if single else out), cache


def encoder_backward(cache: ForwardCache, dfeat: np.ndarray):
    if cache is None or cache.kind != "encoder":
        raise MissingCacheError(layer="encoder")
    steps = cache.data["steps"]
    single = cache.data["single"]
    d = dfeat[None] if single else dfeat

    grads = {}
    g, d = dense_backward(steps[-1], d)
    grads.update(g)
    # only the final state of the top recurrent layer feeds fc_out
    batch, length, hidden = cache.data["seq_shape"]
    dseq = np.zeros((batch, length, hidden), dtype=d.dtype)
    dseq[:, -1, :] = d
    for c in reversed(steps[:-1]):
        g, dseq = backward(c, dseq)
        grads.update(g)
    return grads, (dseq[0] if single else dseq)


def projection_forward(params: ProjectionParams, feature: np.ndarray):
    """
    Dense layers with ReLU between them; no activation after the last one.

    Raises:
        DimensionError: If the feature width is not ``params.sizes.fc_out``.
    """
    x = np.asarray(feature, dtype=params.dtype)
    single = x.ndim == 1
    if single:
        x = x[None]
    if x.ndim != 2 or x.shape[-1] != params.sizes.fc_out:
        raise DimensionError(params.sizes.fc_out, x.shape)

    steps = []
    n_layers = len(params.sizes.projection)
    for i in range(n_layers):
        name = f"proj.{i}"
        x, c = dense_forward(x, params[f"{name}.weight"], params[f"{name}.bias"], name)
        steps.append(c)
        if i < n_layers - 1:
            x, c = relu_forward(x, f"{name}.relu")
            steps.append(c)
    cache = ForwardCache("projection", "projection", {"steps": steps, "single": single})
    return (x[0] if single else x), cache


def projection_backward(cache: ForwardCache, dy: np.ndarray):
    if cache is None or cache.kind != "projection":
        raise MissingCacheError(layer="projection")
    single = cache.data["single"]
    d = dy[None] if single else dy
    grads = {}
    for c in reversed(cache.data["steps"]):
        g, d = backward(c, d)
        grads.update(g)
    return grads, (d[0] if single else d)


_BACKWARD = {
    "dense": dense_backward,
    "relu": relu_backward,
    "gru": gru_backward,
    "encoder": encoder_backward,
    "projection": projection_backward,
}


def backward(cache: ForwardCache | None, output_grad: np.ndarray):
    """
    Reverse-mode gradients for any cached forward pass.

    Returns:
        ``(param_grads, input_grad)``; parameter gradients are keyed by
        parameter name.

    Raises:
        MissingCacheError: If ``cache`` is None or of an unknown kind.
    """
    if cache is None:
        raise MissingCacheError()
    try:
        fn = _BACKWARD[cache.kind]
    except KeyError:
        raise MissingCacheError(layer=cache.kind) from None
    return fn(cache, np.asarray(output_grad))


def relu_margin(cache: ForwardCache) -> float:
    """Smallest absolute ReLU pre-activation recorded anywhere in ``cache``."""
    if cache.kind == "relu":
        x = cache.data["x"]
        return float(np.abs(x).min()) if x.size else np.inf
    margin = np.inf
    for child in cache.data.get("steps", ()):
        margin = min(margin, relu_margin(child))
    return margin
