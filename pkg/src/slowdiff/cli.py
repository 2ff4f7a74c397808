"""Command-line interface: run orchestration and CSV emission.

Subcommands: ``run``, ``sweep-m``, ``sweep-critical-mass``,
``wasserstein``, ``phase``.  Exit codes: 0 success, 1 configuration
error, 2 numerical failure; failures print a single machine-parsable
line on stderr (``error: config: ...`` or ``error: numeric: ...``).
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import parse_config_file
from .dynamics import run
from .ensemble import read_snapshot, write_snapshot
from .errors import ConfigError, NumericalError, ValidationError
from .experiments import classify_phase, critical_mass, m_sweep
from .mollifier import Mollifier
from .transport import wasserstein_1d

OBSERVABLES_COLUMNS = (
    "time,E_total,E_interaction,E_entropy,sup_density,support_diam,"
    "plateau_measure,max_velocity,w2_to_prev"
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse usage errors are config errors
        raise ConfigError(message)


def _fmt(x: float) -> str:
    return "%.17g" % x


def _write_csv(path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _parse_float_list(raw: str, name: str):
    try:
        values = [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError("%s expects comma-separated numbers, got %r" % (name, raw))
    if not values:
        raise ConfigError("%s lists no values" % name)
    return values


def _cmd_run(args) -> int:
    cfg = parse_config_file(args.config)
    record = run(cfg)
    os.makedirs(cfg.output_dir, exist_ok=True)
    rows = []
    for k, t in enumerate(record.times):
        en = record.energies[k]
        obs = record.observables[k]
        rows.append(
            (
                t, en.total, en.interaction, en.entropy, obs.sup_density,
                obs.support_diam, obs.plateau_measure, record.max_velocity[k],
                record.w2_to_prev[k],
            )
        )
        write_snapshot(
            os.path.join(cfg.output_dir, "snapshot_%04d.snap" % k),
            record.ensembles[k],
            t,
            record.mollifier.epsilon,
        )
    _write_csv(os.path.join(cfg.output_dir, "observables.csv"), OBSERVABLES_COLUMNS, rows)
    print(
        "run finished: t=%s steady=%s snapshots=%d -> %s"
        % (_fmt(record.times[-1]), record.steady_reached, len(rows), cfg.output_dir)
    )
    return 0


def _cmd_sweep_m(args) -> int:
    cfg = parse_config_file(args.config)
    values = _parse_float_list(args.m_list, "--m-list")
    rows = m_sweep(cfg, values)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "m_sweep.csv")
    _write_csv(path, "m,support_diam,sup_density,E_m,E_interaction", rows)
    print("m sweep over %d values -> %s" % (len(rows), path))
    return 0


def _repulsion_exponent(cfg) -> float:
    repulsive = [e for c, e in cfg.kernel_terms if c < 0.0]
    if not repulsive:
        raise ConfigError("sweep-critical-mass needs a repulsive-attractive base kernel")
    return max(repulsive)


def _cmd_sweep_critical(args) -> int:
    cfg = parse_config_file(args.config)
    q_values = _parse_float_list(args.q_list, "--q-list")
    lo, hi = args.bracket
    tol = args.tol
    p = _repulsion_exponent(cfg)
    rows = []
    for q in q_values:
        result = critical_mass(q, p, cfg.m, cfg, (lo, hi), tol)
        rows.append(
            (result.q, result.p, result.m, result.critical_mass,
             result.bracket[0], result.bracket[1], result.runs)
        )
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "critical_mass.csv")
    _write_csv(path, "q,p,m,critical_mass,bracket_lo,bracket_hi,runs", rows)
    print("critical-mass sweep over %d q values -> %s" % (len(rows), path))
    return 0


def _cmd_wasserstein(args) -> int:
    ens1, _, _ = read_snapshot(args.snap_a)
    ens2, _, _ = read_snapshot(args.snap_b)
    result = wasserstein_1d(ens1, ens2, args.b)
    print(_fmt(result.distance))
    return 0


def _cmd_phase(args) -> int:
    ens, _, eps = read_snapshot(args.snapshot)
    epsilon = args.epsilon if args.epsilon is not None else eps
    report = classify_phase(ens, Mollifier(epsilon, dim=1), delta=args.delta)
    print(
        "phase=%s plateau_fraction=%s sup_density=%s"
        % (report.phase, _fmt(report.plateau_fraction), _fmt(report.sup_density))
    )
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="slowdiff", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one trajectory")
    p_run.add_argument("config")
    p_run.set_defaults(func=_cmd_run)

    p_msweep = sub.add_parser("sweep-m", help="steady states across diffusion exponents")
    p_msweep.add_argument("config")
    p_msweep.add_argument("--m-list", required=True)
    p_msweep.set_defaults(func=_cmd_sweep_m)

    p_crit = sub.add_parser(
        "sweep-critical-mass", help="bisect the solid-transition mass over q values"
    )
    p_crit.add_argument("config")
    p_crit.add_argument("--q-list", required=True)
    p_crit.add_argument("--bracket", nargs=2, type=float, required=True, metavar=("LO", "HI"))
    p_crit.add_argument("--tol", type=float, default=0.02)
    p_crit.set_defaults(func=_cmd_sweep_critical)

    p_w = sub.add_parser("wasserstein", help="distance between two snapshot files")
    p_w.add_argument("snap_a")
    p_w.add_argument("snap_b")
    p_w.add_argument("--b", type=float, default=2.0)
    p_w.set_defaults(func=_cmd_wasserstein)

    p_phase = sub.add_parser("phase", help="classify a snapshot as liquid/intermediate/solid")
    p_phase.add_argument("snapshot")
    p_phase.add_argument("--epsilon", type=float, default=None)
    p_phase.add_argument("--delta", type=float, default=0.05)
    p_phase.set_defaults(func=_cmd_phase)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except (ConfigError, ValidationError) as exc:
        print("error: config: %s" % exc, file=sys.stderr)
        return 1
    except NumericalError as exc:
        print("error: numeric: %s" % exc, file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())
