"""Run configuration: defaults, a flat key=value file, and command-line overrides."""

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .exceptions import DomainError

FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by all subcommands.

    Precedence when assembled by :func:`load_config`: explicit overrides,
    then the config file, then these defaults.
    """

    p: float = 3.0
    mu_lo: float = 0.01
    mu_hi: float = 1.0
    mu_count: int = 100
    max_denominator: int = 50
    n_max: int = 3
    quad_rel_tol: float = 1e-11
    ode_tol: float = 1e-11
    root_tol: float = 1e-11
    independence_tol: float = 1e-9
    output_format: str = "csv"
    output_dir: str = "out"

    def __post_init__(self):
        if not self.p > 1.0:
            raise DomainError(f"p={self.p} must exceed 1")
        if not 0.0 < self.mu_lo <= self.mu_hi <= 1.0:
            raise DomainError(f"momentum grid ({self.mu_lo}, {self.mu_hi}) must lie in (0, 1]")
        if self.mu_count < 1 or (self.mu_count > 1 and self.mu_lo == self.mu_hi):
            raise DomainError("momentum grid needs a positive count and a non-empty range")
        if self.max_denominator < 2:
            raise DomainError("max_denominator must be at least 2")
        if self.n_max < 1:
            raise DomainError("n_max must be at least 1")
        for name in ("quad_rel_tol", "ode_tol", "root_tol", "independence_tol"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be positive")
        if self.output_format not in FORMATS:
            raise DomainError(f"output format must be one of {FORMATS}")

    @property
    def mu_grid(self):
        return (self.mu_lo, self.mu_hi, self.mu_count)

    @property
    def out_path(self):
        return Path(self.output_dir)


_ALIASES = {"format": "output_format", "out": "output_dir", "tol_quad": "quad_rel_tol",
            "tol_ode": "ode_tol", "tol_root": "root_tol", "tol_independence": "independence_tol"}


def _field_types():
    return {f.name: f.type for f in fields(RunConfig)}


def _coerce(name, raw):
    kind = _field_types()[name]
    if kind in ("float", float):
        return float(raw)
    if kind in ("int", int):
        return int(raw)
    return str(raw)


def canonical_key(key):
    key = key.strip().lower().replace("-", "_")
    return _ALIASES.get(key, key)


def parse_config_text(text):
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    known = _field_types()
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        key = canonical_key(key)
        if key not in known:
            raise DomainError(f"config line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value.strip())
    return out


def load_config(path=None, overrides=None):
    """Defaults, updated by the file at ``path``, updated by non-None ``overrides``."""
    values = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    for key, value in (overrides or {}).items():
        if value is not None:
            key = canonical_key(key)
            values[key] = _coerce(key, value)
    return replace(RunConfig(), **values)
