"""Solver configuration and the flat ``key = value`` file format.

Example file::

    # DP, single sine mode
    b = 3
    N = 256
    dt = 0.001
    t_end = 1
    strategy = inverse-composition
    dealias = true
    sample_every = 100
    max_amp = 1000
    min_slope = 1e-6
    u0 = 1:0:0.2
    u0_const = 0

``u0`` lists Fourier modes as ``k:cos_coeff:sin_coeff`` separated by commas,
so the initial field is ``u0_const + sum(a cos(2 pi k x) + b sin(2 pi k x))``.
"""
import dataclasses
import hashlib
import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import InvalidConfigError

STRATEGIES = ("inverse-composition", "conjugated-operator")

_KEYS = (
    "b",
    "N",
    "dt",
    "t_end",
    "strategy",
    "dealias",
    "sample_every",
    "max_amp",
    "min_slope",
    "u0",
    "u0_const",
)


@dataclass(frozen=True)
class SolverConfig:
    b: float = 3.0
    N: int = 256
    dt: float = 1e-3
    t_end: float = 1.0
    strategy: str = "inverse-composition"
    dealias: bool = True
    sample_every: int = 100
    max_amp: float = 1e3
    min_slope: float = 1e-6
    u0_modes: tuple = ((1, 0.0, 0.2),)
    u0_const: float = 0.0

    def __post_init__(self):
        modes = tuple((int(k), float(a), float(c)) for k, a, c in self.u0_modes)
        object.__setattr__(self, "u0_modes", modes)
        self.validate()

    def validate(self):
        problems = []
        for name in ("b", "dt", "t_end", "max_amp", "min_slope", "u0_const"):
            if not math.isfinite(getattr(self, name)):
                problems.append(f"{name} must be finite")
        if self.N < 8 or self.N % 2:
            problems.append(f"N must be even and >= 8, got {self.N}")
        if not self.dt > 0:
            problems.append("dt must be positive")
        if not self.t_end > 0:
            problems.append("t_end must be positive")
        if self.sample_every < 1:
            problems.append("sample_every must be >= 1")
        if self.strategy not in STRATEGIES:
            problems.append(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if not self.max_amp > 0 or not self.min_slope >= 0:
            problems.append("guards must be positive")
        for k, a, c in self.u0_modes:
            if k < 0 or k > self.N / 3:
                problems.append(f"u0 mode {k} outside 0..N/3")
            if not (math.isfinite(a) and math.isfinite(c)):
                problems.append(f"u0 mode {k} has non-finite coefficients")
        if not problems and self.dt > 0 and self.t_end > 0:
            n = round(self.t_end / self.dt)
            if n < 1 or abs(n * self.dt - self.t_end) > 1e-9 * self.t_end:
                problems.append("t_end must be an integer multiple of dt")
        if problems:
            raise InvalidConfigError("; ".join(problems))
        return self

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def initial_field(self, N=None):
        """Sample the initial-condition descriptor on an ``N``-point grid."""
        N = self.N if N is None else N
        x = spectral.grid(N)
        u = np.full(N, self.u0_const)
        for k, a, c in self.u0_modes:
            u = u + a * np.cos(2 * np.pi * k * x) + c * np.sin(2 * np.pi * k * x)
        return u

    def to_text(self):
        """Canonical serialization; equal configs give identical text."""
        values = {
            "b": repr(float(self.b)),
            "N": str(self.N),
            "dt": repr(float(self.dt)),
            "t_end": repr(float(self.t_end)),
            "strategy": self.strategy,
            "dealias": "true" if self.dealias else "false",
            "sample_every": str(self.sample_every),
            "max_amp": repr(float(self.max_amp)),
            "min_slope": repr(float(self.min_slope)),
            "u0": ", ".join(f"{k}:{a!r}:{c!r}" for k, a, c in self.u0_modes),
            "u0_const": repr(float(self.u0_const)),
        }
        return "".join(f"{key} = {values[key]}\n" for key in _KEYS)

    def content_hash(self):
        """Git blob hash of the canonical text."""
        data = self.to_text().encode()
        return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()

    def as_dict(self):
        d = dataclasses.asdict(self)
        d["u0_modes"] = [list(m) for m in self.u0_modes]
        return d

    @classmethod
    def from_text(cls, text):
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfigError(f"line {lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _KEYS:
                raise InvalidConfigError(f"line {lineno}: unknown key {key!r}")
            if key in raw:
                raise InvalidConfigError(f"line {lineno}: duplicate key {key!r}")
            raw[key] = value
        kwargs = {}
        try:
            for key in ("b", "dt", "t_end", "max_amp", "min_slope", "u0_const"):
                if key in raw:
                    kwargs[key] = float(raw[key])
            for key in ("N", "sample_every"):
                if key in raw:
                    kwargs[key] = int(raw[key])
            if "strategy" in raw:
                kwargs["strategy"] = raw["strategy"]
            if "dealias" in raw:
                flag = raw["dealias"].lower()
                if flag not in ("true", "false", "1", "0", "yes", "no", "on", "off"):
                    raise InvalidConfigError(f"dealias must be a boolean, got {raw['dealias']!r}")
                kwargs["dealias"] = flag in ("true", "1", "yes", "on")
            if "u0" in raw:
                kwargs["u0_modes"] = _parse_modes(raw["u0"])
        except ValueError as exc:
            if isinstance(exc, InvalidConfigError):
                raise
            raise InvalidConfigError(str(exc)) from exc
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InvalidConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text)


def _parse_modes(text):
    modes = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise InvalidConfigError(f"u0 entry {item!r} is not k:cos:sin")
        modes.append((int(parts[0]), float(parts[1]), float(parts[2])))
    return tuple(modes)
