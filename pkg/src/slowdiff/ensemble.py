"""Particle ensembles, initial-data generators, and density observables.

Ensembles are immutable: the position and weight arrays are marked
read-only so that total mass stays bit-identical across every operation
that consumes them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .mollifier import Mollifier, mollify_density

__all__ = [
    "ParticleEnsemble",
    "ObservableSet",
    "make_ensemble",
    "init_barenblatt",
    "init_patch",
    "observables",
    "barenblatt_shape",
    "barenblatt_support_radius",
    "write_snapshot",
    "read_snapshot",
]

SUPPORT_THRESHOLD = 1.0e-3  # relative density level defining the support


@dataclass(frozen=True)
class ParticleEnsemble:
    """Atomic measure sum_i w_i delta(x - x_i) with fixed positive weights."""

    positions: np.ndarray  # (N, d), read-only
    weights: np.ndarray  # (N,), read-only
    dim: int
    mass: float

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def x1d(self) -> np.ndarray:
        if self.dim != 1:
            raise ValidationError("1d view requested for a dim=%d ensemble" % self.dim)
        return self.positions[:, 0]

    def shifted(self, offset) -> "ParticleEnsemble":
        off = np.asarray(offset, dtype=np.float64).reshape(1, self.dim)
        return _wrap(self.positions + off, self.weights, self.dim, self.mass)

    def recentered(self) -> "ParticleEnsemble":
        """Translate so the barycenter sits at the origin."""
        mean = (self.weights @ self.positions) / self.mass
        return self.shifted(-mean)


def _wrap(positions, weights, dim, mass) -> ParticleEnsemble:
    positions = np.ascontiguousarray(positions, dtype=np.float64)
    positions.flags.writeable = False
    return ParticleEnsemble(positions, weights, dim, mass)


def make_ensemble(positions, weights) -> ParticleEnsemble:
    """Validate arrays and build an immutable ensemble."""
    pos = np.asarray(positions, dtype=np.float64)
    if pos.ndim == 1:
        pos = pos.reshape(-1, 1)
    if pos.ndim != 2 or pos.shape[0] < 1:
        raise ValidationError("positions must be an (N, d) array with N >= 1")
    w = np.ascontiguousarray(np.asarray(weights, dtype=np.float64).reshape(-1))
    if w.shape[0] != pos.shape[0]:
        raise ValidationError(
            "got %d weights for %d positions" % (w.shape[0], pos.shape[0])
        )
    if not np.all(np.isfinite(pos)):
        raise ValidationError("positions must be finite")
    if not (np.all(np.isfinite(w)) and np.all(w > 0.0)):
        raise ValidationError("weights must be finite and strictly positive")
    pos = np.ascontiguousarray(pos)
    pos.flags.writeable = False
    w.flags.writeable = False
    return ParticleEnsemble(pos, w, pos.shape[1], float(np.sum(w)))


# ---------------------------------------------------------------------------
# Barenblatt initial data
# ---------------------------------------------------------------------------

def barenblatt_shape(m_star: float, dim: int = 1) -> tuple[float, float, float]:
    """Shape constants (beta, kappa, height K) of the unit-mass profile.

    The profile tau^(-d beta) (K - kappa tau^(-2 beta) |x|^2)_+^(1/(m*-1))
    has unit mass exactly when K solves
    integral (K - kappa |y|^2)_+^(1/(m*-1)) dy = 1; the integral is
    evaluated by quadrature after the substitution y = sqrt(K/kappa) sin t,
    which makes the integrand smooth.
    """
    if not m_star > 1.0:
        raise ValidationError("m_star must exceed 1, got %r" % (m_star,))
    if dim != 1:
        raise NotImplementedError("Barenblatt sampling is implemented for dim=1")
    beta = 1.0 / (2.0 + dim * (m_star - 1.0))
    kappa = 0.5 * beta * (m_star - 1.0) / m_star
    gamma = 1.0 / (m_star - 1.0)
    # J = integral_{-pi/2}^{pi/2} cos(t)^(2*gamma + 1) dt  (composite Simpson)
    npts = 4097
    t = np.linspace(-0.5 * np.pi, 0.5 * np.pi, npts)
    f = np.cos(t) ** (2.0 * gamma + 1.0)
    hstep = t[1] - t[0]
    j = hstep / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-2:2].sum())
    assert j > 0.0
    height = (np.sqrt(kappa) / j) ** (1.0 / (gamma + 0.5))
    return beta, kappa, float(height)


def barenblatt_support_radius(m_star: float, tau: float, dim: int = 1) -> float:
    """Radius of the positivity set of the tau-scaled unit-mass profile."""
    if not tau > 0.0:
        raise ValidationError("tau must be positive, got %r" % (tau,))
    beta, kappa, height = barenblatt_shape(m_star, dim)
    return float(tau ** beta * np.sqrt(height / kappa))


def init_barenblatt(
    m_star: float, tau: float, mass: float, n: int, dim: int = 1
) -> ParticleEnsemble:
    """Quantile-sample a constant multiple of a Barenblatt profile.

    Particles sit at the mass quantiles i/(N+1) of the unit profile and
    carry equal weights mass/N, so positions do not depend on mass.
    """
    if n < 2:
        raise ValidationError("init_barenblatt needs N >= 2, got %d" % n)
    if not mass > 0.0:
        raise ValidationError("mass must be positive, got %r" % (mass,))
    beta, kappa, height = barenblatt_shape(m_star, dim)
    radius = barenblatt_support_radius(m_star, tau, dim)
    gamma = 1.0 / (m_star - 1.0)
    scale = tau ** (-2.0 * beta)

    grid = np.linspace(-radius, radius, 20001)
    pdf = tau ** (-dim * beta) * np.clip(height - kappa * scale * grid ** 2, 0.0, None) ** gamma
    dx = grid[1] - grid[0]
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * dx)))
    cdf /= cdf[-1]
    levels = np.arange(1, n + 1) / (n + 1.0)
    positions = np.interp(levels, cdf, grid)
    weights = np.full(n, mass / n)
    return make_ensemble(positions, weights)


def init_patch(left: float, right: float, mass: float, n: int) -> ParticleEnsemble:
    """Particles at midpoints of an N-cell partition of [left, right].

    Represents the indicator of the interval scaled to total mass
    ``mass`` (continuum height mass / (right - left)).
    """
    if not left < right:
        raise ValidationError("patch needs left < right, got [%r, %r]" % (left, right))
    if n < 1:
        raise ValidationError("init_patch needs N >= 1, got %d" % n)
    if not mass > 0.0:
        raise ValidationError("mass must be positive, got %r" % (mass,))
    cell = (right - left) / n
    positions = left + (np.arange(n) + 0.5) * cell
    weights = np.full(n, mass / n)
    return make_ensemble(positions, weights)


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObservableSet:
    sup_density: float
    support_diam: float
    plateau_measure: float
    lm_norm: float
    second_moment: float
    mean: np.ndarray


def density_grid(ensemble: ParticleEnsemble, mollifier: Mollifier, grid_spacing=None):
    """Uniform grid over the particle hull padded by 8 eps, plus u on it."""
    if ensemble.dim != 1:
        raise NotImplementedError("observable grids are implemented for dim=1")
    eps = mollifier.epsilon
    spacing = 0.25 * eps if grid_spacing is None else float(grid_spacing)
    if not spacing > 0.0:
        raise ValidationError("grid_spacing must be positive, got %r" % (grid_spacing,))
    x = ensemble.x1d()
    lo = float(x.min()) - 8.0 * eps
    hi = float(x.max()) + 8.0 * eps
    npts = int(np.ceil((hi - lo) / spacing)) + 1
    grid = lo + spacing * np.arange(npts)
    u = mollify_density(ensemble, mollifier, grid)
    return grid, u, spacing


def observables(
    ensemble: ParticleEnsemble,
    mollifier: Mollifier,
    delta: float = 0.05,
    grid_spacing=None,
    m: float = 2.0,
) -> ObservableSet:
    """Grid observables of the mollified density plus exact moments.

    sup_density is the grid max of u; support_diam the diameter of
    {u >= 1e-3 sup}; plateau_measure the Lebesgue measure of
    {u >= 1 - delta}; lm_norm approximates the L^m norm of u.  The mean
    (barycenter) and second moment come exactly from the particles.
    """
    if not 0.0 < delta < 1.0:
        raise ValidationError("delta must lie in (0, 1), got %r" % (delta,))
    grid, u, spacing = density_grid(ensemble, mollifier, grid_spacing)
    sup = float(u.max())
    above = np.nonzero(u >= SUPPORT_THRESHOLD * sup)[0]
    diam = float(grid[above[-1]] - grid[above[0]]) if above.size else 0.0
    plateau = spacing * int(np.count_nonzero(u >= 1.0 - delta))
    # L^m norm in log space so large m cannot overflow
    with np.errstate(divide="ignore"):
        a = m * np.log(u)
    amax = float(a.max())
    lm = float(np.exp((amax + np.log(np.sum(np.exp(a - amax))) + np.log(spacing)) / m))
    w = ensemble.weights
    pos = ensemble.positions
    second = float(np.sum(w * np.einsum("ik,ik->i", pos, pos)))
    mean = (w @ pos) / ensemble.mass
    return ObservableSet(sup, diam, plateau, lm, second, mean)


# ---------------------------------------------------------------------------
# snapshot files
# ---------------------------------------------------------------------------

def write_snapshot(path, ensemble: ParticleEnsemble, time: float, epsilon: float) -> None:
    """Plain-text snapshot: header + one "position weight" line per particle."""
    with open(path, "w") as fh:
        fh.write("# t=%.17g mass=%.17g epsilon=%.17g\n" % (time, ensemble.mass, epsilon))
        for i in range(ensemble.n):
            coords = " ".join("%.17g" % c for c in ensemble.positions[i])
            fh.write("%s %.17g\n" % (coords, ensemble.weights[i]))


def read_snapshot(path):
    """Load a snapshot file; returns (ensemble, time, epsilon)."""
    time = mass = epsilon = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for field in line[1:].split():
                    key, _, val = field.partition("=")
                    if key == "t":
                        time = float(val)
                    elif key == "mass":
                        mass = float(val)
                    elif key == "epsilon":
                        epsilon = float(val)
                continue
            rows.append([float(tok) for tok in line.split()])
    if time is None or epsilon is None:
        raise ValidationError("snapshot %s is missing its header line" % (path,))
    if not rows:
        raise ValidationError("snapshot %s holds no particles" % (path,))
    data = np.asarray(rows, dtype=np.float64)
    ens = make_ensemble(data[:, :-1], data[:, -1])
    if mass is not None and abs(ens.mass - mass) > 1e-9 * max(1.0, abs(mass)):
        raise ValidationError(
            "snapshot %s header mass %g disagrees with weights (%g)" % (path, mass, ens.mass)
        )
    return ens, time, epsilon
