"""Velocity assembly, explicit time stepping, and trajectory recording.

The particle velocity is the exact (negative, mass-weighted) gradient of
the discrete energy interaction_energy + entropy_blob:

    v_i = - sum_{j != i} w_j grad K(x_i - x_j)
          - sum_j w_j grad phi_eps(x_i - x_j) (u(x_i)^(m-2) + u(x_j)^(m-2))

with u the mollified density at the particles.  Large m makes the
pressure factor u^(m-2) violently stiff once the density overshoots 1,
so every step enforces a displacement cap of h/2 via dyadic substepping.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import _accel
from .config import BarenblattInit, PatchInit, RunConfig
from .energy import EnergyBreakdown, total_energy
from .ensemble import (
    ObservableSet,
    ParticleEnsemble,
    barenblatt_support_radius,
    init_barenblatt,
    init_patch,
    make_ensemble,
    observables,
)
from .errors import DensityBlowupError, NumericalError, StiffBlowupError, ValidationError
from .kernel import InteractionKernel, kernel_validate
from .mollifier import Mollifier, epsilon_from_h
from .transport import wasserstein_1d

__all__ = [
    "SimulationState",
    "TrajectoryRecord",
    "velocity",
    "step",
    "run",
    "detect_steady",
    "initial_state",
]

MAX_SUBSTEPS = 2 ** 10

# extra consistency checks (particle ordering) -- costly, off by default
DEBUG_CHECKS = os.environ.get("SLOWDIFF_DEBUG", "").strip().lower() in ("1", "true", "yes", "on")


@dataclass(frozen=True)
class SimulationState:
    """One flow in progress.  ``mollifier=None`` disables the diffusion
    term entirely (pure-interaction test mode)."""

    ensemble: ParticleEnsemble
    time: float
    mollifier: Mollifier | None
    m: float
    kernel: InteractionKernel
    h: float = np.inf  # initial inter-particle spacing; cap is h/2
    last_velocities: np.ndarray | None = None
    last_substep_dts: tuple[float, ...] = ()
    last_substep_speed2: tuple[float, ...] = ()


def _velocity_arrays(positions, weights, kernel, mollifier, m):
    coeffs, exps = kernel.term_arrays()
    if mollifier is None:
        return -_accel.conv_grad(positions, weights, positions, coeffs, exps)
    if not m > 1.0:
        raise ValidationError("velocity needs m > 1, got %r" % (m,))
    v, bad, log_power = _accel.blob_velocity(
        positions, weights, coeffs, exps, mollifier.epsilon, m
    )
    if bad >= 0:
        raise DensityBlowupError(bad, log_power)
    return v


def velocity(state: SimulationState) -> np.ndarray:
    """Velocity field at the current particle positions, shape (N, d)."""
    return _velocity_arrays(
        state.ensemble.positions,
        state.ensemble.weights,
        state.kernel,
        state.mollifier,
        state.m,
    )


def _max_norm(vecs: np.ndarray) -> float:
    return float(np.sqrt(np.einsum("ik,ik->i", vecs, vecs).max()))


def detect_steady(state: SimulationState, tol: float) -> bool:
    """True once max_i |v_i| falls below tol."""
    if not tol > 0.0:
        raise ValidationError("steady tolerance must be positive, got %r" % (tol,))
    v = state.last_velocities
    if v is None:
        v = velocity(state)
    return _max_norm(v) < tol


def step(state: SimulationState, dt: float, scheme: str = "euler") -> SimulationState:
    """Advance by dt with the chosen explicit scheme.

    The displacement cap h/2 is enforced by subdividing the step: each
    substep advances by at most cap/max|v|, so stiff transients (the
    pressure force scales like u**(m-2) once the density overshoots 1)
    shrink the effective time step instead of poisoning the state.  More
    than 2**10 substeps for one step raises a stiff blow-up error.
    """
    if not dt > 0.0:
        raise ValidationError("dt must be positive, got %r" % (dt,))
    if scheme not in ("euler", "heun"):
        raise ValidationError("scheme must be euler or heun, got %r" % (scheme,))
    cap = 0.5 * state.h
    pos = state.ensemble.positions
    w = state.ensemble.weights
    remaining = dt
    dts = []
    speed2 = []
    eff = None
    while remaining > 0.0:
        if len(dts) >= MAX_SUBSTEPS:
            raise StiffBlowupError(
                "stiff blow-up: displacement cap %g not met within %d substeps of dt=%g"
                % (cap, MAX_SUBSTEPS, dt)
            )
        v1 = _velocity_arrays(pos, w, state.kernel, state.mollifier, state.m)
        mv = _max_norm(v1)
        sub = remaining if mv * remaining <= cap else cap / mv
        if scheme == "euler":
            eff = v1
        else:  # heun
            pred = pos + sub * v1
            v2 = _velocity_arrays(pred, w, state.kernel, state.mollifier, state.m)
            eff = 0.5 * (v1 + v2)
            mv2 = _max_norm(eff)
            if mv2 * sub > cap:
                sub = cap / mv2
        pos = pos + sub * eff
        dts.append(sub)
        speed2.append(float(np.sum(w * np.einsum("ik,ik->i", eff, eff))))
        remaining -= sub
    old = state.ensemble
    if DEBUG_CHECKS and old.dim == 1:
        before = old.positions[:, 0]
        after = pos[:, 0]
        if np.all(np.diff(before) >= 0.0) and np.any(np.diff(after) < 0.0):
            raise NumericalError("particle ordering lost at t=%g" % (state.time + dt))
    ens = make_ensemble(pos, old.weights)
    return replace(
        state,
        ensemble=ens,
        time=state.time + dt,
        last_velocities=eff,
        last_substep_dts=tuple(dts),
        last_substep_speed2=tuple(speed2),
    )


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryRecord:
    """Snapshots plus the per-substep records the dissipation check needs."""

    times: list[float] = field(default_factory=list)
    ensembles: list[ParticleEnsemble] = field(default_factory=list)
    observables: list[ObservableSet] = field(default_factory=list)
    energies: list[EnergyBreakdown] = field(default_factory=list)
    max_velocity: list[float] = field(default_factory=list)
    w2_to_prev: list[float] = field(default_factory=list)
    step_dts: list[float] = field(default_factory=list)
    step_speed2: list[float] = field(default_factory=list)
    steady_reached: bool = False
    steady_time: float | None = None
    mollifier: Mollifier | None = None
    h: float | None = None
    config: RunConfig | None = None

    @property
    def final_ensemble(self) -> ParticleEnsemble:
        return self.ensembles[-1]


def resolve_discretization(cfg: RunConfig) -> tuple[int, float]:
    """(N, h) from the config: the free one follows from the initial
    support length, h being the mean inter-particle spacing."""
    if isinstance(cfg.init, BarenblattInit):
        length = 2.0 * barenblatt_support_radius(cfg.init.m_star, cfg.init.tau)
    else:
        length = cfg.init.right - cfg.init.left
    if cfg.n_particles is not None:
        n = cfg.n_particles
    else:
        n = max(2, int(round(length / cfg.h)))
    return n, length / n


def initial_state(cfg: RunConfig) -> SimulationState:
    """Build kernel, mollifier, and initial ensemble for a run."""
    kernel = kernel_validate(cfg.kernel_terms, dim=1, unsafe_params=cfg.kernel_unsafe)
    n, h = resolve_discretization(cfg)
    if isinstance(cfg.init, BarenblattInit):
        ens = init_barenblatt(cfg.init.m_star, cfg.init.tau, cfg.init.mass, n)
    else:
        ens = init_patch(cfg.init.left, cfg.init.right, cfg.init.mass, n)
    moll = Mollifier(epsilon_from_h(h, cfg.epsilon_exponent), dim=1)
    return SimulationState(ens, 0.0, moll, cfg.m, kernel, h)


def run(cfg: RunConfig) -> TrajectoryRecord:
    """Integrate from t=0 to t=T, or until the flow goes steady.

    Snapshots (ensemble + observables + energies) are recorded every
    snapshot_interval time units and at the final time; per-substep
    velocity norms are recorded at every step for the dissipation check.
    """
    state = initial_state(cfg)
    interval = cfg.snapshot_interval if cfg.snapshot_interval is not None else cfg.T / 100.0
    record = TrajectoryRecord(mollifier=state.mollifier, h=state.h, config=cfg)

    def snapshot(st: SimulationState, maxv: float):
        ens = st.ensemble
        record.times.append(st.time)
        record.ensembles.append(ens)
        record.observables.append(
            observables(ens, st.mollifier, delta=cfg.delta, m=cfg.m)
        )
        record.energies.append(total_energy(st.kernel, ens, cfg.m, st.mollifier, delta=cfg.delta))
        record.max_velocity.append(maxv)
        if len(record.ensembles) > 1:
            record.w2_to_prev.append(
                wasserstein_1d(record.ensembles[-2], ens, 2.0).distance
            )
        else:
            record.w2_to_prev.append(0.0)

    snapshot(state, _max_norm(velocity(state)))
    if cfg.T <= 0.0:
        return record

    nsteps = int(np.ceil(cfg.T / cfg.dt - 1e-9))
    next_snap = interval
    for k in range(1, nsteps + 1):
        dt_k = min(cfg.dt, cfg.T - (k - 1) * cfg.dt)
        state = step(state, dt_k, cfg.scheme)
        record.step_dts.extend(state.last_substep_dts)
        record.step_speed2.extend(state.last_substep_speed2)
        maxv = _max_norm(state.last_velocities)
        steady = cfg.steady_tol > 0.0 and maxv < cfg.steady_tol
        last = steady or k == nsteps
        if last or state.time >= next_snap - 0.5 * cfg.dt:
            snapshot(state, maxv)
            while next_snap <= state.time + 0.5 * cfg.dt:
                next_snap += interval
        if steady:
            record.steady_reached = True
            record.steady_time = state.time
            break
    return record
