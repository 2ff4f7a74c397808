"""Power-law interaction potentials and their gradients.

A kernel is a sum of terms ``c * |x|**e / e`` with the convention that
``e == 0`` means ``c * log|x|``.  The raw form ``a * |x|**e`` is also
accepted and converted (``c = a * e``), so potentials quoted without the
``1/e`` normalization are representable exactly.

The conforming parameter range is ``2 - d <= e <= 2`` for every exponent,
and a repulsive term (negative coefficient) must sit strictly below an
attractive one.  Out-of-range exponents are allowed behind
``unsafe_params=True``; the result is then flagged non-conforming.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _accel
from .errors import ValidationError

__all__ = [
    "InteractionKernel",
    "kernel_validate",
    "kernel_from_raw",
    "powerlaw_kernel",
    "kernel_eval",
    "kernel_grad",
    "conv_grad",
]


@dataclass(frozen=True)
class InteractionKernel:
    """Validated power-law potential: sum of c * |x|**e / e terms."""

    coeffs: tuple[float, ...]
    exps: tuple[float, ...]
    dim: int
    conforming: bool = True

    @property
    def terms(self) -> tuple[tuple[float, float], ...]:
        return tuple(zip(self.coeffs, self.exps))

    def term_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.asarray(self.coeffs, dtype=np.float64),
            np.asarray(self.exps, dtype=np.float64),
        )


def kernel_validate(
    terms: Iterable[Sequence[float]], dim: int, unsafe_params: bool = False
) -> InteractionKernel:
    """Validate (coefficient, exponent) pairs and build a kernel.

    Raises ValidationError for an empty term list, zero coefficients,
    exponents outside [2-d, 2] (unless ``unsafe_params``), a repulsive
    term whose exponent is not strictly below the attraction exponent,
    or a potential with no attractive (positive-coefficient) term.
    """
    term_list = [(float(c), float(e)) for c, e in terms]
    if not term_list:
        raise ValidationError("kernel needs at least one (coefficient, exponent) term")
    if int(dim) < 1:
        raise ValidationError("kernel dim must be a positive integer, got %r" % (dim,))
    dim = int(dim)

    conforming = True
    lo = 2.0 - dim
    for c, e in term_list:
        if c == 0.0:
            raise ValidationError("kernel term with zero coefficient (exponent %g)" % e)
        if not (np.isfinite(c) and np.isfinite(e)):
            raise ValidationError("kernel term (%r, %r) is not finite" % (c, e))
        if not lo <= e <= 2.0:
            if not unsafe_params:
                raise ValidationError(
                    "exponent %g outside [%g, 2]; pass unsafe_params=True to override"
                    % (e, lo)
                )
            conforming = False

    attractive = [e for c, e in term_list if c > 0.0]
    repulsive = [e for c, e in term_list if c < 0.0]
    if not attractive:
        raise ValidationError("kernel has no attractive (positive-coefficient) term")
    if repulsive:
        q = max(attractive)
        p = max(repulsive)
        if p >= q:
            raise ValidationError(
                "repulsion exponent p=%g must be strictly below attraction exponent q=%g"
                % (p, q)
            )

    coeffs, exps = zip(*term_list)
    return InteractionKernel(coeffs, exps, dim, conforming)


def kernel_from_raw(
    raw_terms: Iterable[Sequence[float]], dim: int, unsafe_params: bool = False
) -> InteractionKernel:
    """Build a kernel from raw ``a * |x|**e`` terms (``a * log|x|`` for e=0)."""
    normalized = []
    for a, e in raw_terms:
        a, e = float(a), float(e)
        normalized.append((a if e == 0.0 else a * e, e))
    return kernel_validate(normalized, dim, unsafe_params)


def powerlaw_kernel(q: float, p: float, dim: int = 1) -> InteractionKernel:
    """The repulsive-attractive potential |x|**q / q - |x|**p / p."""
    return kernel_validate([(1.0, q), (-1.0, p)], dim)


def _radius(kernel: InteractionKernel, x) -> float:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != kernel.dim:
        raise ValidationError(
            "point has %d components, kernel dim is %d" % (x.size, kernel.dim)
        )
    return float(np.sqrt(np.dot(x, x)))


def kernel_eval(kernel: InteractionKernel, x) -> float:
    """Evaluate K(x).  Singular terms at the origin give -inf."""
    r = _radius(kernel, x)
    total = 0.0
    for c, e in zip(kernel.coeffs, kernel.exps):
        if e == 0.0:
            total += c * np.log(r) if r > 0.0 else -np.inf
        elif r == 0.0 and e < 0.0:
            total += -np.inf
        else:
            total += (c / e) * r ** e
    return total


def kernel_grad(kernel: InteractionKernel, x) -> np.ndarray:
    """Evaluate grad K(x); exactly zero at the origin (odd convention)."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    r = _radius(kernel, x)
    if r == 0.0:
        return np.zeros(kernel.dim)
    s = 0.0
    for c, e in zip(kernel.coeffs, kernel.exps):
        s += c * r ** (e - 2.0)
    return s * x


def conv_grad(kernel: InteractionKernel, ensemble, queries) -> np.ndarray:
    """(grad K * rho)(q) = sum_j w_j grad K(q - x_j) at each query point.

    Summands with q equal to a particle position are omitted (the
    diagonal rule, consistent with grad K(0) = 0).
    """
    q = np.ascontiguousarray(
        np.asarray(queries, dtype=np.float64).reshape(-1, kernel.dim)
    )
    if ensemble.dim != kernel.dim:
        raise ValidationError(
            "ensemble dim %d does not match kernel dim %d" % (ensemble.dim, kernel.dim)
        )
    coeffs, exps = kernel.term_arrays()
    return _accel.conv_grad(ensemble.positions, ensemble.weights, q, coeffs, exps)
