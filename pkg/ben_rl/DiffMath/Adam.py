import logging
from dataclasses import dataclass

import numpy as np

from ..Errors import NonFiniteError
from .ParamStore import ParamStore

logger = logging.getLogger(__name__)


def adam_step(
    store: ParamStore,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    clip_norm: float = 10.0,
):
    """One bias-corrected Adam update on every parameter of ``store``.

    Gradients are first rescaled so that their global norm is at most
    ``clip_norm`` (``None`` or a non-positive value disables clipping), and
    are zeroed after the update.
    """
    grads = store.grads
    for key, grad in grads.items():
        if not np.all(np.isfinite(grad)):
            raise NonFiniteError(f"Non-finite gradient for `{key}` in store `{store.name}`")

    scale = 1.0
    if clip_norm is not None and clip_norm > 0.0:
        norm = store.global_grad_norm()
        if norm > clip_norm:
            scale = clip_norm / norm
            logger.debug("clipping %s gradients: norm %.4g -> %.4g", store.name, norm, clip_norm)

    store.step_count += 1
    t = store.step_count
    correction1 = 1.0 - beta1 ** t
    correction2 = 1.0 - beta2 ** t

    for key, param in store.items():
        grad = grads[key] * scale
        m = store.first_moment[key]
        v = store.second_moment[key]
        m[...] = beta1 * m + (1.0 - beta1) * grad
        v[...] = beta2 * v + (1.0 - beta2) * grad * grad
        param.values -= lr * (m / correction1) / (np.sqrt(v / correction2) + eps)

    store.zero_grad()


@dataclass
class Adam:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = 10.0

    def step(self, store: ParamStore):
        adam_step(store, self.lr, self.beta1, self.beta2, self.eps, self.clip_norm)
