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

"""Central finite-difference verification of the analytic gradients."""

import logging
from typing import Callable

import numpy as np
import pandas as pd

from walkssl.core.losses import ClusterState, LossConfig, combined_loss, kmeans_loss, nt_xent

from .layers import dense_backward, dense_forward, gru_backward, gru_forward, relu_backward, relu_forward
from .network import (
    encoder_backward,
    encoder_forward,
    projection_backward,
    projection_forward,
    relu_margin,
)
from .params import EncoderParams, NetworkSizes, ProjectionParams, get_preset

logger = logging.getLogger(__name__)

LossFn = Callable[[dict[str, np.ndarray]], tuple[float, dict[str, np.ndarray]]]

GRADCHECK_TOLERANCE = 1e-4
RELU_MARGIN = 1e-4


def grad_check(
    fn: LossFn,
    params: dict[str, np.ndarray],
    epsilon: float = 1e-5,
    n_coords: int = 200,
    rng: np.random.Generator | None = None,
    grads: dict[str, np.ndarray] | None = None,
    atol: float = 1e-5,
) -> float:
    """
    Worst relative error between analytic and central-difference gradients.

    ``fn(params)`` returns ``(loss, grads)`` and must read the arrays of
    ``params``, which are perturbed in place one coordinate at a time and
    restored afterwards. All coordinates are checked when there are at most
    ``n_coords`` of them, otherwise a random subset of ``n_coords``.

    The relative error of a coordinate is
    ``|a - n| / max(|a|, |n|, atol)``.

    Args:
        fn: Loss function with analytic gradients.
        params: Named parameter arrays.
        epsilon: Perturbation step.
        n_coords: Minimum number of coordinates to compare.
        rng: Draws the coordinate subset.
        grads: Analytic gradients to compare instead of those ``fn`` returns.
        atol: Absolute floor of the denominator.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    if grads is None:
        _, grads = fn(params)

    names = list(params)
    sizes = np.array([params[k].size for k in names])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    total = int(offsets[-1])
    if total <= n_coords:
        picks = np.arange(total)
    else:
        picks = np.sort(rng.choice(total, size=n_coords, replace=False))

    worst = 0.0
    for flat in picks.tolist():
        slot = int(np.searchsorted(offsets, flat, side="right")) - 1
        name, i = names[slot], flat - int(offsets[slot])
        arr = params[name]
        orig = arr.flat[i]
        arr.flat[i] = orig + epsilon
        plus, _ = fn(params)
        arr.flat[i] = orig - epsilon
        minus, _ = fn(params)
        arr.flat[i] = orig
        numeric = (plus - minus) / (2.0 * epsilon)
        analytic = float(grads[name].flat[i]) if name in grads else 0.0
        err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), atol)
        worst = max(worst, err)
    return worst


def _dense_case(rng, sizes, walk_len, n_pairs):
    r = rng.normal(size=(4, 3))
    params = {
        "x": rng.normal(size=(4, 5)),
        "dense.weight": rng.normal(size=(3, 5)),
        "dense.bias": rng.normal(size=3),
    }

    def fn(p):
        y, cache = dense_forward(p["x"], p["dense.weight"], p["dense.bias"], "dense")
        grads, dx = dense_backward(cache, r)
        return float(np.sum(r * y)), {**grads, "x": dx}

    return fn, params, np.inf


def _relu_case(rng, sizes, walk_len, n_pairs):
    # inputs kept away from the kink
    x = rng.choice([-1.0, 1.0], size=(4, 6)) * rng.uniform(0.1, 1.0, size=(4, 6))
    r = rng.normal(size=x.shape)

    def fn(p):
        y, cache = relu_forward(p["x"])
        _, dx = relu_backward(cache, r)
        return float(np.sum(r * y)), {"x": dx}

    return fn, {"x": x}, np.inf


def _gru_case(rng, sizes, walk_len, n_pairs):
    hidden, width = 5, 3
    params = {"x": rng.uniform(-1, 1, size=(2, walk_len, width))}
    for g in ("z", "r", "h"):
        params[f"gru.W_{g}"] = rng.uniform(-0.5, 0.5, size=(hidden, width))
        params[f"gru.U_{g}"] = rng.uniform(-0.5, 0.5, size=(hidden, hidden))
        params[f"gru.b_{g}"] = rng.uniform(-0.5, 0.5, size=hidden)
    r = rng.normal(size=(2, walk_len, hidden))

    def fn(p):
        hs, cache = gru_forward(p["x"], p, "gru")
        grads, dx = gru_backward(cache, r)
        return float(np.sum(r * hs)), {**grads, "x": dx}

    return fn, params, np.inf


def _encoder_case(rng, sizes, walk_len, n_pairs):
    enc = EncoderParams.init(sizes, rng)
    seq = rng.uniform(-1, 1, size=(2, walk_len, sizes.in_dim))
    r = rng.normal(size=(2, sizes.fc_out))

    def fn(_):
        feat, cache = encoder_forward(enc, seq)
        grads, _ = encoder_backward(cache, r)
        return float(np.sum(r * feat)), grads

    _, cache = encoder_forward(enc, seq)
    return fn, enc.arrays, relu_margin(cache)


def _projection_case(rng, sizes, walk_len, n_pairs):
    proj = ProjectionParams.init(sizes, rng)
    params = {**proj.arrays, "feature": rng.normal(size=(4, sizes.fc_out))}
    r = rng.normal(size=(4, sizes.embedding_dim))

    def fn(p):
        z, cache = projection_forward(proj, p["feature"])
        grads, dfeat = projection_backward(cache, r)
        return float(np.sum(r * z)), {**grads, "feature": dfeat}

    _, cache = projection_forward(proj, params["feature"])
    return fn, params, relu_margin(cache)


def _nt_xent_case(rng, sizes, walk_len, n_pairs):
    def fn(p):
        loss, g = nt_xent(p["z"], 0.5)
        return loss, {"z": g}

    return fn, {"z": rng.normal(size=(8, 8))}, np.inf


def _kmeans_case(rng, sizes, walk_len, n_pairs):
    means = rng.normal(size=(3, 8))
    assignments = rng.integers(0, 3, size=4)

    def fn(p):
        loss, g = kmeans_loss(p["z"], assignments, means)
        return loss, {"z": g}

    return fn, {"z": rng.normal(size=(8, 8))}, np.inf


def _composite_case(rng, sizes, walk_len, n_pairs):
    enc = EncoderParams.init(sizes, rng)
    proj = ProjectionParams.init(sizes, rng)
    seq = rng.uniform(-1, 1, size=(2 * n_pairs, walk_len, sizes.in_dim))
    means = rng.normal(size=(3, sizes.embedding_dim))
    state = ClusterState(means / np.linalg.norm(means, axis=1, keepdims=True))
    config = LossConfig(n_clusters=3, cluster_start_epoch=0, alpha=1.0)
    params = {**enc.arrays, **proj.arrays}

    def run(assignments):
        feat, ce = encoder_forward(enc, seq)
        z, cp = projection_forward(proj, feat)
        res = combined_loss(z, state, config, 0, assignments=assignments, accumulate=False)
        return res, ce, cp

    # assignments are frozen so the loss stays smooth under perturbation
    base, ce, cp = run(None)
    fixed = base.assignments

    def fn(_):
        res, ce, cp = run(fixed)
        gp, dfeat = projection_backward(cp, res.grads)
        ge, _ = encoder_backward(ce, dfeat)
        return res.total, {**ge, **gp}

    return fn, params, min(relu_margin(ce), relu_margin(cp))


CHECKS = {
    "dense": _dense_case,
    "relu": _relu_case,
    "gru": _gru_case,
    "encoder": _encoder_case,
    "projection": _projection_case,
    "nt_xent": _nt_xent_case,
    "kmeans": _kmeans_case,
    "composite": _composite_case,
}


def gradcheck_suite(
    preset: str | NetworkSizes = "desk",
    seed: int = 0,
    walk_len: int = 8,
    n_pairs: int = 2,
    epsilon: float = 1e-5,
    n_coords: int = 200,
    tolerance: float = GRADCHECK_TOLERANCE,
    checks: list[str] | None = None,
) -> pd.DataFrame:
    """
    Gradient check of every layer type, both losses and the full composite, at 64 bits.

    Instances whose ReLU pre-activations come closer than a small margin to
    zero are redrawn, so no perturbation crosses a kink.

    Returns:
        One row per check with columns ``check``, ``max_rel_error``,
        ``n_coords`` and ``passed``.
    """
    sizes = get_preset(preset)
    rows = []
    for i, name in enumerate(checks or list(CHECKS)):
        case = CHECKS[name]
        for attempt in range(50):
            rng = np.random.default_rng([seed, i, attempt])
            fn, params, margin = case(rng, sizes, walk_len, n_pairs)
            if margin >= RELU_MARGIN:
                break
        else:
            logger.warning(f"{name}: no draw kept ReLU inputs {RELU_MARGIN} away from zero")
        err = grad_check(fn, params, epsilon, n_coords, rng=np.random.default_rng([seed, i]))
        checked = min(n_coords, sum(p.size for p in params.values()))
        logger.debug(f"gradcheck {name}: max relative error {err:.3e}")
        rows.append(
            {"check": name, "max_rel_error": err, "n_coords": checked, "passed": err < tolerance}
        )
    return pd.DataFrame(rows, columns=["check", "max_rel_error", "n_coords", "passed"])
