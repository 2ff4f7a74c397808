"""Scripted studies: steady-state sweeps over m, critical-mass bisection
over the attraction exponent, and liquid/intermediate/solid phase calls.

Desk-scale defaults (m=200, h=0.01, dt=1e-3) keep every study in the
minutes range; the full-resolution parameters remain reachable through
ordinary configs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .config import BarenblattInit, PatchInit, RunConfig
from .dynamics import TrajectoryRecord, run
from .ensemble import ParticleEnsemble, density_grid, observables
from .errors import NumericalError, ValidationError
from .mollifier import Mollifier
from .transport import wasserstein_1d

__all__ = [
    "PhaseReport",
    "CriticalMassResult",
    "MSweepRow",
    "classify_phase",
    "critical_mass",
    "m_sweep",
    "initial_data_invariance",
    "desk_config",
    "repulsive_attractive_terms",
    "steady_state",
    "pressure_on_low_set",
]

SOLID_FRACTION = 0.95  # plateau fraction thresholds (delta_s = 0.05)
LIQUID_FRACTION = 0.05


def repulsive_attractive_terms(q: float, p: float) -> tuple[tuple[float, float], ...]:
    """Kernel terms for attraction |x|^q/q against Newtonian-normalized
    repulsion -|x|^p/(2p).

    In one dimension the fundamental solution of the Laplacian is |x|/2,
    so for p=1 the repulsion carries a factor 1/2; this normalization
    sets the mass scale of the solid transition (critical mass 1 at q=2).
    """
    return ((1.0, float(q)), (-0.5, float(p)))


def _exponents_conforming(q: float, p: float, dim: int = 1) -> bool:
    lo = 2.0 - dim
    return lo <= p <= 2.0 and lo <= q <= 2.0


@dataclass(frozen=True)
class PhaseReport:
    phase: str  # liquid | intermediate | solid
    plateau_fraction: float
    sup_density: float


@dataclass(frozen=True)
class CriticalMassResult:
    q: float
    p: float
    m: float
    critical_mass: float
    bracket: tuple[float, float]
    runs: int


class MSweepRow(NamedTuple):
    m: float
    support_diam: float
    sup_density: float
    E_m: float
    E_interaction: float


def desk_config(**overrides) -> RunConfig:
    """Desk-scale template: q=2/p=1 kernel, Barenblatt start, m=200."""
    base = RunConfig(
        kernel_terms=repulsive_attractive_terms(2.0, 1.0),
        m=200.0,
        h=0.01,
        dt=1.0e-3,
        T=30.0,
        init=BarenblattInit(m_star=2.0, tau=0.1, mass=1.0),
        steady_tol=1.0e-3,
        snapshot_interval=30.0,
    )
    return replace(base, **overrides)


def classify_phase(
    steady: ParticleEnsemble, mollifier: Mollifier, delta: float = 0.05
) -> PhaseReport:
    """Classify a steady state by how much of its mass saturates height 1.

    plateau_fraction = |{u >= 1 - delta}| / M; solid above 0.95, liquid
    below 0.05, intermediate otherwise.
    """
    obs = observables(steady, mollifier, delta=delta)
    fraction = min(1.0, max(0.0, obs.plateau_measure / steady.mass))
    if fraction >= SOLID_FRACTION:
        phase = "solid"
    elif fraction <= LIQUID_FRACTION:
        phase = "liquid"
    else:
        phase = "intermediate"
    return PhaseReport(phase, fraction, obs.sup_density)


def steady_state(cfg: RunConfig) -> TrajectoryRecord:
    """Run to a detected steady state; error if T is exhausted first."""
    if not cfg.steady_tol > 0.0:
        raise ValidationError("steady_state needs a positive steady_tol")
    record = run(cfg)
    if not record.steady_reached:
        raise NumericalError(
            "flow did not reach steady state (tol %g) within T=%g"
            % (cfg.steady_tol, cfg.T)
        )
    return record


def _bisect_on_mass(
    is_solid: Callable[[float], bool],
    bracket0: tuple[float, float],
    tol: float,
) -> tuple[float, float, int, list[tuple[float, bool]]]:
    lo, hi = float(bracket0[0]), float(bracket0[1])
    if not (lo > 0.0 and hi > lo):
        raise ValidationError("mass bracket must satisfy 0 < lo < hi, got %r" % (bracket0,))
    if not tol > 0.0:
        raise ValidationError("bisection tolerance must be positive, got %r" % (tol,))
    history = [(lo, is_solid(lo)), (hi, is_solid(hi))]
    runs = 2
    if history[0][1] or not history[1][1]:
        raise ValidationError(
            "bracket does not straddle the transition: solid(%g)=%s, solid(%g)=%s"
            % (lo, history[0][1], hi, history[1][1])
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        solid = is_solid(mid)
        runs += 1
        history.append((mid, solid))
        non_solid = max(mass for mass, s in history if not s)
        first_solid = min(mass for mass, s in history if s)
        if non_solid >= first_solid:
            raise NumericalError(
                "non-monotone solid classification across masses %g and %g; "
                "runs look under-resolved" % (first_solid, non_solid)
            )
        if solid:
            hi = mid
        else:
            lo = mid
    return lo, hi, runs, history


def critical_mass(
    q: float,
    p: float,
    m: float,
    template: RunConfig,
    bracket0: tuple[float, float],
    tol: float,
) -> CriticalMassResult:
    """Bisect on total mass for the onset of set-valued (solid) steady states.

    Each probe runs the flow to steady state from the template's initial
    data with the mass replaced, then classifies the result.
    """
    if not p < q:
        raise ValidationError("need p < q, got p=%g, q=%g" % (p, q))
    cfg0 = replace(
        template,
        kernel_terms=repulsive_attractive_terms(q, p),
        kernel_unsafe=template.kernel_unsafe or not _exponents_conforming(q, p),
        m=float(m),
    )

    def is_solid(mass: float) -> bool:
        record = steady_state(cfg0.with_mass(mass))
        report = classify_phase(
            record.final_ensemble, record.mollifier, delta=cfg0.delta
        )
        return report.phase == "solid"

    lo, hi, runs, _ = _bisect_on_mass(is_solid, bracket0, tol)
    return CriticalMassResult(float(q), float(p), float(m), 0.5 * (lo + hi), (lo, hi), runs)


def m_sweep(template: RunConfig, m_values: Sequence[float]) -> list[MSweepRow]:
    """One steady-state run per diffusion exponent; observables tabulated."""
    rows = []
    for m in m_values:
        if not m > 1.0:
            raise ValidationError("m values must exceed 1, got %g" % m)
        record = steady_state(replace(template, m=float(m)))
        obs = record.observables[-1]
        en = record.energies[-1]
        rows.append(
            MSweepRow(float(m), obs.support_diam, obs.sup_density, en.total, en.interaction)
        )
    return rows


def initial_data_invariance(
    q: float,
    p: float,
    m: float,
    mass: float,
    template: RunConfig | None = None,
) -> bool:
    """Do Barenblatt- and patch-started flows land on the same steady state?

    Both runs go to steady state; the states are recentered (minimizers
    are unique only up to translation) and must agree within ten times
    the steady tolerance in the 2-Wasserstein metric and classify
    identically.
    """
    base = template if template is not None else desk_config()
    cfg = replace(
        base,
        kernel_terms=repulsive_attractive_terms(q, p),
        kernel_unsafe=base.kernel_unsafe or not _exponents_conforming(q, p),
        m=float(m),
    )
    runs = []
    for init in (
        BarenblattInit(m_star=2.0, tau=0.1, mass=float(mass)),
        PatchInit(left=-1.0, right=1.0, mass=float(mass)),
    ):
        record = steady_state(replace(cfg, init=init))
        report = classify_phase(record.final_ensemble, record.mollifier, delta=cfg.delta)
        runs.append((record.final_ensemble.recentered(), report))
    distance = wasserstein_1d(runs[0][0], runs[1][0], 2.0).distance
    return distance <= 10.0 * cfg.steady_tol and runs[0][1].phase == runs[1][1].phase


def pressure_on_low_set(
    ensemble: ParticleEnsemble, mollifier: Mollifier, m: float, low: float = 0.9
):
    """max of u**m over grid points with u <= low (0 if the set is empty).

    At a constrained steady state the pressure concentrates where the
    density saturates, so this maximum should be negligible.
    """
    _, u, _ = density_grid(ensemble, mollifier)
    mask = u <= low
    if not np.any(mask):
        return 0.0
    with np.errstate(divide="ignore"):
        return float(np.exp(m * np.log(u[mask])).max())
