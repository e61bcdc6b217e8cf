"""Plain-text run configuration and construction of the simulated system.

A config file holds one ``key = value`` pair per line; ``#`` starts a
comment.  Triples are comma separated.  Numeric values may use ``pi`` and
the operators ``+ - * / **`` (``2*pi``, ``pi/2``).  Every key has a default,
so an empty file is a valid config.  Run ``spinwell print-config`` for the
annotated list.
"""
from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, fields, replace

import numpy as np

from .dynamics import Forcing, GalerkinState, GalerkinSystem
from .energy import AnisotropyPotential
from .noise import TruncationPsi, make_noise_family
from .spectral import BasisError, build_bases

__all__ = [
    "ConfigError",
    "SimConfig",
    "InitialData",
    "KEY_DOCS",
    "parse_config",
    "load_config",
    "apply_overrides",
    "build_system",
    "build_initial",
    "make_initial_data",
]


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is set for parse errors."""

    def __init__(self, message, line=None, source=None):
        where = ""
        if source is not None and line is not None:
            where = f"{source}:{line}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
        self.line = line


_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def _eval_number(text):
    """Evaluate a numeric literal or a small arithmetic expression in ``pi``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(f"not a number: {text!r}")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ValueError(f"not a number: {text!r}") from exc


def _float(s):
    return _eval_number(s)


def _int(s):
    v = _eval_number(s)
    if v != int(v):
        raise ValueError(f"expected an integer, got {s!r}")
    return int(v)


def _triple(conv):
    def parse(s):
        parts = [p for p in s.split(",")]
        if len(parts) == 1:
            parts = parts * 3
        if len(parts) != 3:
            raise ValueError(f"expected 1 or 3 comma-separated values, got {s!r}")
        return tuple(conv(p) for p in parts)

    return parse


def _optional_triple(s):
    return None if s.strip().lower() in ("auto", "none", "") else _triple(_float)(s)


def _optional_int_triple(s):
    return None if s.strip().lower() in ("auto", "none", "") else _triple(_int)(s)


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _choice(*opts):
    def parse(s):
        v = s.strip().lower()
        if v not in opts:
            raise ValueError(f"expected one of {', '.join(opts)}, got {s!r}")
        return v

    return parse


def _word(s):
    return s.strip()


# key -> (parser, documentation); defaults live on SimConfig
KEY_DOCS = {
    "lambda1": (_float, "precession coefficient (any real)"),
    "lambda2": (_float, "damping coefficient, must be > 0"),
    "box_lengths": (_triple(_float), "side lengths of the ferromagnet box D"),
    "torus_lengths": (_optional_triple, "side lengths of the periodic torus T, or auto (= 2 x box)"),
    "modes": (_triple(_int), "cosine modes per axis for M"),
    "em_modes": (_triple(_int), "largest Fourier index K per axis for B and E (2K+1 functions per axis)"),
    "quad_nodes": (_optional_int_triple, "quadrature nodes per axis on D, or auto (= 4n+1)"),
    "J": (_int, "number of noise modes"),
    "noise_amplitude": (_float, "amplitude of the first noise mode"),
    "noise_decay": (_float, "noise mode j has amplitude noise_amplitude * j^-noise_decay"),
    "anisotropy_axis": (_triple(_float), "easy axis (normalized on load)"),
    "anisotropy_strength": (_float, "anisotropy constant K >= 0"),
    "anisotropy_cutoff": (_float, "radius beyond which the anisotropy potential vanishes"),
    "forcing": (_choice("zero", "mode"), "applied current: zero, or a single constant-in-time cosine mode"),
    "forcing_mode": (_triple(_int), "cosine mode index of the applied current"),
    "forcing_direction": (_triple(_float), "vector direction of the applied current"),
    "forcing_amplitude": (_float, "coefficient of the applied current"),
    "initial_m": (_choice("wall", "uniform"), "initial magnetization: uniform (exactly unit on every node), or a wall profile along x1 (unit on nodes before projection)"),
    "initial_direction": (_triple(_float), "direction of the uniform initial magnetization"),
    "initial_b": (_choice("equilibrium", "zero"), "initial induction: divergence-free part of pi^Y Mbar0, or zero"),
    "T": (_float, "final time"),
    "dt": (_float, "time step"),
    "seed": (_int, "master seed"),
    "scheme": (_choice("heun", "em-ito"), "time stepper"),
    "ensemble": (_int, "number of paths K for the ensemble command"),
    "correction": (_choice("galerkin", "five-term"), "Ito correction: chain rule of the projected diffusion, or the five-term form"),
    "induction_sign": (_float, "sign s in dB = s curl(E) dt (+1 or -1)"),
    "maxwell": (_bool, "couple to the field equations"),
    "renormalize": (_bool, "project |M| back to 1 at nodes after each step (comparison mode only)"),
    "record_every": (_int, "steps between CSV rows"),
    "snapshot_every": (_int, "steps between binary snapshots (0: initial and final only)"),
    "stability_bound": (_float, "upper bound for dt * (1 + lambda_max) * hypot(lambda1, lambda2)"),
    "check_states": (_int, "random states per identity in the check command"),
    "check_steps": (_int, "time steps of the noise-free run in the check command"),
    "convergence_levels": (_int, "rungs of the refinement ladders in the convergence command"),
    "convergence_T": (_float, "final time of the convergence runs"),
}


@dataclass(frozen=True)
class SimConfig:
    lambda1: float = 1.0
    lambda2: float = 0.5
    box_lengths: tuple = (math.pi, math.pi, math.pi)
    torus_lengths: tuple = None
    modes: tuple = (8, 8, 8)
    em_modes: tuple = (8, 8, 8)
    quad_nodes: tuple = None
    J: int = 8
    noise_amplitude: float = 0.1
    noise_decay: float = 2.0
    anisotropy_axis: tuple = (0.0, 0.0, 1.0)
    anisotropy_strength: float = 0.5
    anisotropy_cutoff: float = 10.0
    forcing: str = "zero"
    forcing_mode: tuple = (0, 0, 0)
    forcing_direction: tuple = (0.0, 1.0, 0.0)
    forcing_amplitude: float = 0.0
    initial_m: str = "uniform"
    initial_direction: tuple = (0.0, 0.0, 1.0)
    initial_b: str = "equilibrium"
    T: float = 1.0
    dt: float = 1e-3
    seed: int = 0
    scheme: str = "heun"
    ensemble: int = 64
    correction: str = "galerkin"
    induction_sign: float = -1.0
    maxwell: bool = True
    renormalize: bool = False
    record_every: int = 10
    snapshot_every: int = 0
    stability_bound: float = 1.0
    check_states: int = 20
    check_steps: int = 100
    convergence_levels: int = 3
    convergence_T: float = 0.1

    @property
    def steps(self):
        return int(round(self.T / self.dt))

    @property
    def lambda_max(self):
        return float(sum((math.pi * (n - 1) / L) ** 2 for n, L in zip(self.modes, self.box_lengths)))

    def stability_number(self):
        return self.dt * (1.0 + self.lambda_max) * math.hypot(self.lambda1, self.lambda2)

    def validate(self):
        if not self.lambda2 > 0:
            raise ConfigError(
                f"lambda2 = {self.lambda2} violates the damping assumption lambda2 > 0 of the model"
            )
        if self.T <= 0 or self.dt <= 0:
            raise ConfigError("T and dt must be positive")
        steps = self.T / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps) or round(steps) < 1:
            raise ConfigError(f"T / dt = {steps} is not a positive whole number of steps")
        if self.stability_number() > self.stability_bound:
            raise ConfigError(
                f"dt * (1 + lambda_max) * hypot(lambda1, lambda2) = {self.stability_number():.4g} exceeds "
                f"stability_bound = {self.stability_bound:g}; reduce dt or modes"
            )
        if any(v <= 0 for v in self.box_lengths):
            raise ConfigError("box lengths must be positive")
        if self.torus_lengths is not None and any(t <= b for t, b in zip(self.torus_lengths, self.box_lengths)):
            raise ConfigError("the torus must strictly contain the box on every axis")
        if any(v < 1 for v in self.modes) or any(v < 1 for v in self.em_modes):
            raise ConfigError("mode counts must be positive")
        if self.J < 0:
            raise ConfigError("J must be nonnegative")
        if self.anisotropy_strength < 0:
            raise ConfigError("anisotropy_strength must be nonnegative")
        if np.linalg.norm(self.anisotropy_axis) == 0:
            raise ConfigError("anisotropy_axis must be nonzero")
        if self.initial_m == "uniform" and np.linalg.norm(self.initial_direction) == 0:
            raise ConfigError("initial_direction must be nonzero")
        if self.induction_sign not in (1.0, -1.0):
            raise ConfigError("induction_sign must be +1 or -1")
        if self.ensemble < 2:
            raise ConfigError("ensemble needs at least 2 paths")
        if self.record_every < 1 or self.snapshot_every < 0:
            raise ConfigError("record_every must be >= 1 and snapshot_every >= 0")
        if self.check_states < 1 or self.check_steps < 1 or self.convergence_levels < 2:
            raise ConfigError("check_states, check_steps must be >= 1 and convergence_levels >= 2")
        if any(k >= n for k, n in zip(self.forcing_mode, self.modes)) or min(self.forcing_mode) < 0:
            raise ConfigError("forcing_mode must index an existing cosine mode")
        return self

    def with_(self, **kw):
        return replace(self, **kw).validate()

    def to_text(self, annotate=True):
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if annotate:
                lines.append(f"# {KEY_DOCS[f.name][1]}")
            lines.append(f"{f.name} = {_format(v)}")
        return "\n".join(lines) + "\n"


def _format(v):
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(_format(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_pairs(pairs, base=None, source=None):
    values = {}
    for line, key, raw in pairs:
        if key not in KEY_DOCS:
            raise ConfigError(f"unknown key {key!r}", line, source)
        try:
            values[key] = KEY_DOCS[key][0](raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", line, source) from None
    cfg = replace(base or SimConfig(), **values)
    axis = np.asarray(cfg.anisotropy_axis, dtype=float)
    if np.linalg.norm(axis) > 0:
        cfg = replace(cfg, anisotropy_axis=tuple(float(x) for x in axis / np.linalg.norm(axis)))
    return cfg.validate()


def parse_config(text, source=None, base=None):
    """Parse config text; raises :class:`ConfigError` with the offending line number."""
    pairs = []
    seen = {}
    for i, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", i, source)
        key, raw = (s.strip() for s in body.split("=", 1))
        if not key or not raw:
            raise ConfigError(f"expected 'key = value', got {body!r}", i, source)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first on line {seen[key]})", i, source)
        seen[key] = i
        pairs.append((i, key, raw))
    return _parse_pairs(pairs, base, source)


def load_config(path, overrides=()):
    with open(path, encoding="utf-8") as fh:
        cfg = parse_config(fh.read(), source=str(path))
    return apply_overrides(cfg, overrides)


def apply_overrides(cfg, overrides):
    """Apply ``key=value`` strings (command-line ``--set``) on top of ``cfg``."""
    pairs = []
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, raw = (s.strip() for s in item.split("=", 1))
        pairs.append((None, key, raw))
    return _parse_pairs(pairs, cfg) if pairs else cfg


@dataclass(frozen=True, eq=False)
class InitialData:
    """Node samples of the initial magnetization and the resulting Galerkin state."""

    m0_nodes: np.ndarray
    state: GalerkinState


def build_system(cfg: SimConfig):
    cfg.validate()
    try:
        bases = build_bases(cfg.box_lengths, cfg.modes, cfg.em_modes, cfg.torus_lengths, cfg.quad_nodes)
    except BasisError as exc:
        raise ConfigError(str(exc)) from None
    phi = AnisotropyPotential(tuple(cfg.anisotropy_axis), cfg.anisotropy_strength, cfg.anisotropy_cutoff)
    try:
        noise = make_noise_family(bases.h, cfg.J, cfg.noise_amplitude, cfg.noise_decay)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    forcing = Forcing(None, cfg.T)
    if cfg.forcing == "mode" and cfg.forcing_amplitude != 0.0:
        c = np.zeros(bases.h.shape)
        d = np.asarray(cfg.forcing_direction, dtype=float)
        c[(slice(None),) + tuple(cfg.forcing_mode)] = cfg.forcing_amplitude * d
        forcing = Forcing(c, cfg.T)
    return GalerkinSystem(
        bases,
        phi,
        noise,
        lambda1=cfg.lambda1,
        lambda2=cfg.lambda2,
        psi=TruncationPsi(),
        forcing=forcing,
        correction=cfg.correction,
        induction_sign=float(cfg.induction_sign),
        maxwell=cfg.maxwell,
    )


def _leray(bases, c):
    """Remove the gradient part mode by mode: ``a -= k (k.a) / |k|^2``."""
    k = bases.y.wave_vectors.T
    k2 = np.sum(k * k, axis=0)
    k2 = np.where(k2 > 0, k2, 1.0)
    return c - k * (np.sum(k * c, axis=0) / k2)


def make_initial_data(cfg: SimConfig, bases) -> InitialData:
    hb = bases.h
    x = hb.grid_points()
    if cfg.initial_m == "uniform":
        d = np.asarray(cfg.initial_direction, dtype=float)
        v = np.broadcast_to((d / np.linalg.norm(d)).reshape(3, 1, 1, 1), x.shape).copy()
    else:
        L1 = hb.box_lengths[0]
        v = np.stack((np.ones_like(x[0]), np.zeros_like(x[0]), 2.0 * np.cos(np.pi * x[0] / L1)))
        v = v / np.sqrt(np.sum(v * v, axis=0))
    m = hb.project(v)
    if cfg.initial_b == "equilibrium" and cfg.maxwell:
        b = _leray(bases, bases.project_extension(m))
    else:
        b = np.zeros(bases.y.shape)
    e = np.zeros(bases.y.shape)
    return InitialData(v, GalerkinState(m, b, e, 0.0))


def build_initial(cfg: SimConfig, system: GalerkinSystem) -> GalerkinState:
    return make_initial_data(cfg, system.bases).state
