"""Run configuration: flat key = value files, parsing, and emission.

The format is deliberately minimal: one ``key = value`` pair per line,
``#`` starts a comment, unknown keys are errors, missing optional keys
take the documented defaults.  Kernel terms are ``coeff,exponent`` pairs
separated by semicolons, e.g. ``kernel.terms = 1,2; -1,1`` for
|x|^2/2 - |x|.  ``kernel.raw_terms`` accepts the unnormalized form
``a,e`` meaning a|x|^e instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

from .errors import ConfigError

__all__ = [
    "BarenblattInit",
    "PatchInit",
    "RunConfig",
    "parse_config",
    "parse_config_file",
    "emit_config",
]


@dataclass(frozen=True)
class BarenblattInit:
    m_star: float
    tau: float
    mass: float


@dataclass(frozen=True)
class PatchInit:
    left: float
    right: float
    mass: float


InitSpec = Union[BarenblattInit, PatchInit]


@dataclass(frozen=True)
class RunConfig:
    kernel_terms: tuple[tuple[float, float], ...]
    m: float
    dt: float
    T: float
    init: InitSpec
    kernel_unsafe: bool = False
    n_particles: int | None = None  # key: N; exactly one of N / h
    h: float | None = None
    epsilon_exponent: float = 0.999
    scheme: str = "euler"
    steady_tol: float = 1.0e-3  # 0 disables early stopping
    snapshot_interval: float | None = None  # default: T / 100
    delta: float = 0.05
    deterministic: bool = True
    output_dir: str = "out"

    def with_mass(self, mass: float) -> "RunConfig":
        return replace(self, init=replace(self.init, mass=float(mass)))


_FLOAT_KEYS = {
    "m", "h", "epsilon_exponent", "dt", "T", "steady_tol",
    "snapshot_interval", "delta",
    "init.m_star", "init.tau", "init.mass", "init.left", "init.right",
}
_INT_KEYS = {"N"}
_BOOL_KEYS = {"kernel.unsafe", "deterministic"}
_STR_KEYS = {"scheme", "init.type", "output_dir"}
_TERM_KEYS = {"kernel.terms", "kernel.raw_terms"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _BOOL_KEYS | _STR_KEYS | _TERM_KEYS

_BARENBLATT_KEYS = {"init.m_star", "init.tau", "init.mass"}
_PATCH_KEYS = {"init.left", "init.right", "init.mass"}


def _parse_terms(raw: str, key: str, lineno: int) -> tuple[tuple[float, float], ...]:
    terms = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p for p in chunk.replace(",", " ").split() if p]
        if len(parts) != 2:
            raise ConfigError(
                "line %d: %s expects 'coeff,exponent' pairs, got %r" % (lineno, key, chunk)
            )
        try:
            terms.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ConfigError("line %d: %s: %r is not numeric" % (lineno, key, chunk))
    if not terms:
        raise ConfigError("line %d: %s lists no terms" % (lineno, key))
    return tuple(terms)


def _parse_scalar(key: str, raw: str, lineno: int):
    if key in _FLOAT_KEYS:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError("line %d: %s expects a number, got %r" % (lineno, key, raw))
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError("line %d: %s expects an integer, got %r" % (lineno, key, raw))
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError("line %d: %s expects true/false, got %r" % (lineno, key, raw))
    return raw


def _positive(key, value):
    if value is not None and not value > 0.0:
        raise ConfigError("%s must be positive, got %g" % (key, value))
    return value


def parse_config(text: str) -> RunConfig:
    """Parse the flat key = value format into a validated RunConfig."""
    entries: dict[str, tuple[object, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError("line %d: expected 'key = value', got %r" % (lineno, line.strip()))
        key, _, raw = body.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _ALL_KEYS:
            raise ConfigError("line %d: unknown key %r" % (lineno, key))
        if key in entries:
            raise ConfigError("line %d: duplicate key %r" % (lineno, key))
        if not raw:
            raise ConfigError("line %d: key %r has no value" % (lineno, key))
        if key in _TERM_KEYS:
            entries[key] = (_parse_terms(raw, key, lineno), lineno)
        else:
            entries[key] = (_parse_scalar(key, raw, lineno), lineno)

    def take(key, default=None):
        return entries.pop(key, (default, 0))[0]

    missing = [k for k in ("m", "dt", "T", "init.type") if k not in entries]
    if "kernel.terms" not in entries and "kernel.raw_terms" not in entries:
        missing.insert(0, "kernel.terms")
    if missing:
        raise ConfigError("missing required keys: %s" % ", ".join(missing))

    if "kernel.terms" in entries and "kernel.raw_terms" in entries:
        raise ConfigError("give kernel.terms or kernel.raw_terms, not both")
    if "kernel.raw_terms" in entries:
        raw_terms = take("kernel.raw_terms")
        kernel_terms = tuple(
            (c if e == 0.0 else c * e, e) for c, e in raw_terms
        )
    else:
        kernel_terms = take("kernel.terms")

    init_type = take("init.type")
    if init_type == "barenblatt":
        wanted, cls = _BARENBLATT_KEYS, BarenblattInit
    elif init_type == "patch":
        wanted, cls = _PATCH_KEYS, PatchInit
    else:
        raise ConfigError("init.type must be 'barenblatt' or 'patch', got %r" % (init_type,))
    for key in sorted(k for k in entries if k.startswith("init.")):
        if key not in wanted:
            raise ConfigError("key %r is not valid for init.type=%s" % (key, init_type))
    absent = sorted(k for k in wanted if k not in entries)
    if absent:
        raise ConfigError("missing required keys: %s" % ", ".join(absent))
    if init_type == "barenblatt":
        init = BarenblattInit(take("init.m_star"), take("init.tau"), take("init.mass"))
        if not init.m_star > 1.0:
            raise ConfigError("init.m_star must exceed 1, got %g" % init.m_star)
        _positive("init.tau", init.tau)
    else:
        init = PatchInit(take("init.left"), take("init.right"), take("init.mass"))
        if not init.left < init.right:
            raise ConfigError("init.left must be below init.right")
    _positive("init.mass", init.mass)

    m = take("m")
    if not m > 1.0:
        raise ConfigError("m must exceed 1, got %g" % m)
    dt = _positive("dt", take("dt"))
    T = take("T")
    if T < 0.0:
        raise ConfigError("T must be nonnegative, got %g" % T)

    n = take("N")
    h = take("h")
    if (n is None) == (h is None):
        raise ConfigError("give exactly one of N or h")
    if n is not None and n < 2:
        raise ConfigError("N must be at least 2, got %d" % n)
    _positive("h", h)

    eps_exp = _positive("epsilon_exponent", take("epsilon_exponent", 0.999))
    scheme = take("scheme", "euler")
    if scheme not in ("euler", "heun"):
        raise ConfigError("scheme must be euler or heun, got %r" % (scheme,))
    steady_tol = take("steady_tol", 1.0e-3)
    if steady_tol < 0.0:
        raise ConfigError("steady_tol must be nonnegative, got %g" % steady_tol)
    snap = take("snapshot_interval")
    if snap is not None and not snap > 0.0:
        raise ConfigError("snapshot_interval must be positive, got %g" % snap)
    delta = take("delta", 0.05)
    if not 0.0 < delta < 1.0:
        raise ConfigError("delta must lie in (0, 1), got %g" % delta)

    return RunConfig(
        kernel_terms=kernel_terms,
        kernel_unsafe=take("kernel.unsafe", False),
        m=m,
        n_particles=n,
        h=h,
        epsilon_exponent=eps_exp,
        dt=dt,
        T=T,
        scheme=scheme,
        init=init,
        steady_tol=steady_tol,
        snapshot_interval=snap,
        delta=delta,
        deterministic=take("deterministic", True),
        output_dir=take("output_dir", "out"),
    )


def parse_config_file(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc))
    return parse_config(text)


def _fmt(x: float) -> str:
    return "%.17g" % x


def emit_config(cfg: RunConfig) -> str:
    """Serialize a RunConfig; parse_config(emit_config(cfg)) == cfg."""
    lines = []
    lines.append(
        "kernel.terms = "
        + "; ".join("%s,%s" % (_fmt(c), _fmt(e)) for c, e in cfg.kernel_terms)
    )
    lines.append("kernel.unsafe = %s" % ("true" if cfg.kernel_unsafe else "false"))
    lines.append("m = %s" % _fmt(cfg.m))
    if cfg.n_particles is not None:
        lines.append("N = %d" % cfg.n_particles)
    else:
        lines.append("h = %s" % _fmt(cfg.h))
    lines.append("epsilon_exponent = %s" % _fmt(cfg.epsilon_exponent))
    lines.append("dt = %s" % _fmt(cfg.dt))
    lines.append("T = %s" % _fmt(cfg.T))
    lines.append("scheme = %s" % cfg.scheme)
    if isinstance(cfg.init, BarenblattInit):
        lines.append("init.type = barenblatt")
        lines.append("init.m_star = %s" % _fmt(cfg.init.m_star))
        lines.append("init.tau = %s" % _fmt(cfg.init.tau))
    else:
        lines.append("init.type = patch")
        lines.append("init.left = %s" % _fmt(cfg.init.left))
        lines.append("init.right = %s" % _fmt(cfg.init.right))
    lines.append("init.mass = %s" % _fmt(cfg.init.mass))
    lines.append("steady_tol = %s" % _fmt(cfg.steady_tol))
    if cfg.snapshot_interval is not None:
        lines.append("snapshot_interval = %s" % _fmt(cfg.snapshot_interval))
    lines.append("delta = %s" % _fmt(cfg.delta))
    lines.append("deterministic = %s" % ("true" if cfg.deterministic else "false"))
    lines.append("output_dir = %s" % cfg.output_dir)
    return "\n".join(lines) + "\n"
