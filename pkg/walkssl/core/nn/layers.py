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

"""
Dense, ReLU and gated recurrent layers with exact reverse-mode gradients.

Every forward function returns ``(output, cache)``; the matching backward
takes the cache and the gradient of the output and returns
``(param_grads, input_grad)``. Parameter gradients are keyed by the full
parameter name (``"<layer>.weight"``, ``"<layer>.W_z"``, ...).
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from walkssl.core.abc import MissingCacheError, NumericError

GRU_GATES = ("z", "r", "h")


@dataclass
class ForwardCache:
    """
    Activations saved by a forward pass.

    Attributes:
        kind: Layer type (dense, relu, gru, encoder, projection).
        layer: Layer name, used to key gradients and in error messages.
        data: Saved tensors and, for composite kinds, child caches.
    """

    kind: str
    layer: str
    data: dict[str, Any] = field(default_factory=dict)


def check_finite(x: np.ndarray, layer: str) -> np.ndarray:
    """Return ``x`` unchanged, or raise NumericError naming ``layer``."""
    if not np.isfinite(x).all():
        raise NumericError(layer=layer)
    return x


def sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _require(cache, kind):
    if cache is None:
        raise MissingCacheError(layer=kind)
    if cache.kind != kind:
        raise MissingCacheError(layer=f"{kind} (got a {cache.kind} cache)")
    return cache


def dense_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray, layer: str = "dense"):
    """y = x W^T + b over the last axis of ``x``."""
    y = x @ weight.T + bias
    return check_finite(y, layer), ForwardCache("dense", layer, {"x": x, "weight": weight})


def dense_backward(cache: ForwardCache, dy: np.ndarray):
    cache = _require(cache, "dense")
    x, weight = cache.data["x"], cache.data["weight"]
    x2 = x.reshape(-1, x.shape[-1])
    dy2 = dy.reshape(-1, dy.shape[-1])
    grads = {
        f"{cache.layer}.weight": dy2.T @ x2,
        f"{cache.layer}.bias": dy2.sum(axis=0),
    }
    return grads, dy @ weight


def relu_forward(x: np.ndarray, layer: str = "relu"):
    return np.maximum(x, 0), ForwardCache("relu", layer, {"x": x})


def relu_backward(cache: ForwardCache, dy: np.ndarray):
    cache = _require(cache, "relu")
    # zero gradient at and below zero
    return {}, dy * (cache.data["x"] > 0)


def gru_forward(x: np.ndarray, params: dict[str, np.ndarray], layer: str = "gru"):
    """
    Run one gated recurrent layer over ``x`` of shape (B, L, D) from a zero state.

    Per step, with h the previous state:
        z = sigmoid(x W_z^T + h U_z^T + b_z)
        r = sigmoid(x W_r^T + h U_r^T + b_r)
        n = tanh(x W_h^T + r * (h U_h^T) + b_h)
        h' = z * h + (1 - z) * n

    Returns:
        (B, L, H) hidden states of every step, and the cache.
    """
    w = {g: params[f"{layer}.W_{g}"] for g in GRU_GATES}
    u = {g: params[f"{layer}.U_{g}"] for g in GRU_GATES}
    b = {g: params[f"{layer}.b_{g}"] for g in GRU_GATES}
    batch, length, _ = x.shape
    hidden = u["z"].shape[0]

    # input projections for all steps at once
    xw = {g: x @ w[g].T + b[g] for g in GRU_GATES}
    h = np.zeros((batch, hidden), dtype=x.dtype)
    hs = np.empty((batch, length, hidden), dtype=x.dtype)
    zs, rs, ns, uhs, prev = (np.empty_like(hs) for _ in range(5))
    for t in range(length):
        z = sigmoid(xw["z"][:, t] + h @ u["z"].T)
        r = sigmoid(xw["r"][:, t] + h @ u["r"].T)
        uh = h @ u["h"].T
        n = np.tanh(xw["h"][:, t] + r * uh)
        prev[:, t] = h
        h = z * h + (1.0 - z) * n
        zs[:, t], rs[:, t], ns[:, t], uhs[:, t], hs[:, t] = z, r, n, uh, h
    check_finite(hs, layer)
    cache = ForwardCache(
        "gru",
        layer,
        {"x": x, "w": w, "u": u, "z": zs, "r": rs, "n": ns, "uh": uhs, "h_prev": prev},
    )
    return hs, cache


def gru_backward(cache: ForwardCache, dhs: np.ndarray):
    """
    Backpropagation through time.

    Args:
        dhs: (B, L, H) gradient with respect to every output state.

    Returns:
        Parameter gradients and the (B, L, D) input gradient.
    """
    cache = _require(cache, "gru")
    d = cache.data
    x, w, u = d["x"], d["w"], d["u"]
    zs, rs, ns, uhs, prev = d["z"], d["r"], d["n"], d["uh"], d["h_prev"]
    length = x.shape[1]

    gw = {g: np.zeros_like(w[g]) for g in GRU_GATES}
    gu = {g: np.zeros_like(u[g]) for g in GRU_GATES}
    gb = {g: np.zeros(u[g].shape[0], dtype=x.dtype) for g in GRU_GATES}
    dx = np.empty_like(x)
    dh_next = np.zeros_like(dhs[:, 0])
    for t in reversed(range(length)):
        z, r, n, uh, hp, xt = zs[:, t], rs[:, t], ns[:, t], uhs[:, t], prev[:, t], x[:, t]
        dh = dhs[:, t] + dh_next
        dz = dh * (hp - n)
        dn = dh * (1.0 - z)
        dh_prev = dh * z

        da = {
            "h": dn * (1.0 - n * n),
        }
        dr = da["h"] * uh
        duh = da["h"] * r
        da["r"] = dr * r * (1.0 - r)
        da["z"] = dz * z * (1.0 - z)

        gu["h"] += duh.T @ hp
        dh_prev += duh @ u["h"]
        dxt = 0.0
        for g in GRU_GATES:
            gw[g] += da[g].T @ xt
            gb[g] += da[g].sum(axis=0)
            dxt = dxt + da[g] @ w[g]
        for g in ("z", "r"):
            gu[g] += da[g].T @ hp
            dh_prev += da[g] @ u[g]
        dx[:, t] = dxt
        dh_next = dh_prev

    grads = {}
    for g in GRU_GATES:
        grads[f"{cache.layer}.W_{g}"] = gw[g]
        grads[f"{cache.layer}.U_{g}"] = gu[g]
        grads[f"{cache.layer}.b_{g}"] = gb[g]
    return grads, dx
