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

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from walkssl.core.abc import DimensionError


class AdamConfig(BaseModel):
    """Hyperparameters of the adaptive-moment optimizer."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    lr: float = Field(default=1e-4, gt=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    eps: float = Field(default=1e-8, gt=0)


class OptimizerState:
    """
    First and second moment accumulators, one pair per parameter name.

    Attributes:
        config (AdamConfig): Hyperparameters.
        step (int): Number of updates applied so far.
        m (dict[str, np.ndarray]): First moments.
        v (dict[str, np.ndarray]): Second moments.
    """

    def __init__(self, config: AdamConfig | None = None, step: int = 0, m=None, v=None):
        self.config = config or AdamConfig()
        self.step = step
        self.m: dict[str, np.ndarray] = dict(m or {})
        self.v: dict[str, np.ndarray] = dict(v or {})

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray], config: AdamConfig | None = None):
        return cls(
            config,
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
        )


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: OptimizerState,
) -> tuple[dict[str, np.ndarray], OptimizerState]:
    """
    Apply one bias-corrected adaptive-moment update in place.

    Parameters without an entry in ``grads`` are left untouched; their
    moments still decay.

    Returns:
        The same ``params`` mapping and ``state``, updated.

    Raises:
        DimensionError: If a gradient shape differs from its parameter.
    """
    cfg = state.config
    state.step += 1
    t = state.step
    c1 = 1.0 - cfg.beta1**t
    c2 = 1.0 - cfg.beta2**t
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p)
        elif g.shape != p.shape:
            raise DimensionError(f"{name} {p.shape}", g.shape)
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * g * g
        p -= (cfg.lr * (m / c1) / (np.sqrt(v / c2) + cfg.eps)).astype(p.dtype)
    return params, state
