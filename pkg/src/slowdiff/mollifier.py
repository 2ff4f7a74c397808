"""Gaussian mollifier used by the blob method, and the eps-from-h rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import ValidationError

__all__ = ["Mollifier", "epsilon_from_h", "mollify_density", "mollify_density_grad"]


@dataclass(frozen=True)
class Mollifier:
    """Isotropic Gaussian of width eps, normalized to unit mass.

    phi_eps(x) = (2 pi eps^2)^(-d/2) exp(-|x|^2 / (2 eps^2))
    """

    epsilon: float
    dim: int = 1

    def __post_init__(self):
        if not (self.epsilon > 0.0 and np.isfinite(self.epsilon)):
            raise ValidationError("mollifier epsilon must be positive, got %r" % (self.epsilon,))
        if int(self.dim) < 1:
            raise ValidationError("mollifier dim must be >= 1")

    @property
    def norm(self) -> float:
        return (2.0 * np.pi * self.epsilon ** 2) ** (-0.5 * self.dim)

    def value(self, z) -> float:
        z = np.asarray(z, dtype=np.float64).reshape(-1)
        return self.norm * float(np.exp(-np.dot(z, z) / (2.0 * self.epsilon ** 2)))


def epsilon_from_h(h: float, exponent: float = 0.999) -> float:
    """Regularization width from the particle spacing: eps = h**exponent."""
    if not (h > 0.0 and np.isfinite(h)):
        raise ValidationError("spacing h must be positive, got %r" % (h,))
    return float(h) ** float(exponent)


def _queries(queries, dim):
    return np.ascontiguousarray(np.asarray(queries, dtype=np.float64).reshape(-1, dim))


def mollify_density(ensemble, mollifier: Mollifier, queries, cutoff: float | None = None):
    """Blob density u(q) = sum_j w_j phi_eps(q - x_j), self terms included.

    ``cutoff`` (optional, in multiples of eps) drops pairs farther than
    cutoff * eps; by default the Gaussian tails are summed exactly.
    """
    q = _queries(queries, ensemble.dim)
    radius = 0.0 if cutoff is None else float(cutoff) * mollifier.epsilon
    return _accel.gauss_density(
        ensemble.positions, ensemble.weights, q, mollifier.epsilon, radius
    )


def mollify_density_grad(ensemble, mollifier: Mollifier, queries, cutoff: float | None = None):
    """Gradient of the blob density, grad phi_eps(z) = -z/eps^2 phi_eps(z)."""
    q = _queries(queries, ensemble.dim)
    radius = 0.0 if cutoff is None else float(cutoff) * mollifier.epsilon
    return _accel.gauss_density_grad(
        ensemble.positions, ensemble.weights, q, mollifier.epsilon, radius
    )
