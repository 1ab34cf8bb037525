"""Experiment configuration: flat key = value sections, bitwise round trip.

The on-disk format is INI-style with one level of bracketed sections.  A
config serializes to a canonical text form (fixed section, key and float
formatting), so identical configs hash identically and reruns can be
compared byte for byte.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import re
from dataclasses import dataclass, fields, replace

import numpy as np

from . import flux as fluxmod
from .fv import Field, cell_centers
from .paths import DrivingPath, refine, sample_brownian
from .pathwise import RecordOptions
from ._seeds import derive_seed

_NAME_CALL = re.compile(r"^([a-z_][a-z0-9_]*)\s*(?:\(([^)]*)\))?$")


@dataclass(frozen=True)
class ExperimentConfig:
    # [experiment]
    dimension: int = 1
    cells: tuple = (512,)
    flux: str = "burgers"
    initial: str = "sine"
    # [path]
    horizon: float = 1.0
    segments: int = 64
    refine_level: int = 0
    seed: int = 1
    # [scheme]
    numerical_flux: str = "godunov"
    cfl: float = 0.45
    # [record]
    times: str = "geometric(1,1.25)"
    xi_bins: int = 128
    ledger: bool = True
    cell_resolved: bool = False
    lambdas: tuple = ()
    # [regularizer]
    gamma: float = 1.0
    alpha: float = 0.5
    # [ensemble]
    replicas: int = 16
    threads: int = 1
    # [study]
    source_coeff: float = 0.0
    grid_levels: tuple = ()
    fit_window: tuple = (1.0, 0.0)
    lemma_instances: int = 100
    scaling_gammas: tuple = (1.0, 2.0, 4.0, 8.0)
    mc_paths: int = 32
    verify_time: float = 0.1
    test_modes: tuple = (1, 2, 3)
    quad_buckets: int = 16


_SECTIONS = {
    "experiment": ("dimension", "cells", "flux", "initial"),
    "path": ("horizon", "segments", "refine_level", "seed"),
    "scheme": ("numerical_flux", "cfl"),
    "record": ("times", "xi_bins", "ledger", "cell_resolved", "lambdas"),
    "regularizer": ("gamma", "alpha"),
    "ensemble": ("replicas", "threads"),
    "study": ("source_coeff", "grid_levels", "fit_window", "lemma_instances",
              "scaling_gammas", "mc_paths", "verify_time", "test_modes",
              "quad_buckets"),
}

_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(name: str, raw: str):
    raw = raw.strip()
    kind = _FIELD_TYPES[name]
    if kind == "bool":
        if raw.lower() not in ("true", "false"):
            raise ValueError(f"boolean expected for {name}, got {raw!r}")
        return raw.lower() == "true"
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "tuple":
        if raw == "":
            return ()
        items = [s.strip() for s in raw.split(",")]
        if name in ("cells", "grid_levels", "test_modes"):
            return tuple(int(s) for s in items)
        return tuple(float(s) for s in items)
    return raw


def serialize_config(cfg: ExperimentConfig) -> str:
    out = io.StringIO()
    for section, keys in _SECTIONS.items():
        out.write(f"[{section}]\n")
        for key in keys:
            out.write(f"{key} = {_fmt(getattr(cfg, key))}\n")
        out.write("\n")
    return out.getvalue()


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser.read_string(text)
    values = {}
    for section, keys in _SECTIONS.items():
        if not parser.has_section(section):
            continue
        for key, raw in parser.items(section):
            if key not in keys:
                raise ValueError(f"unknown key '{key}' in [{section}]")
            values[key] = _parse_value(key, raw)
    cfg = ExperimentConfig(**values)
    if cfg.dimension not in (1, 2):
        raise ValueError("dimension must be 1 or 2")
    if len(cfg.cells) != cfg.dimension:
        raise ValueError("cells must list one count per dimension")
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:12]


def _name_params(spec: str):
    m = _NAME_CALL.match(spec.strip())
    if not m:
        raise ValueError(f"cannot parse '{spec}'")
    name = m.group(1)
    params = ()
    if m.group(2):
        params = tuple(float(p) for p in m.group(2).split(","))
    return name, params


def make_flux(cfg: ExperimentConfig) -> fluxmod.FluxSpec:
    name, params = _name_params(cfg.flux)
    spec = fluxmod.make_flux(name, params)
    if spec.n_components != cfg.dimension:
        raise ValueError(f"flux '{cfg.flux}' has {spec.n_components} "
                         f"components but dimension is {cfg.dimension}")
    return spec


def _initial_1d(name, params, m):
    x = cell_centers(m)
    if name == "sine":
        amp = params[0] if params else 1.0
        off = params[1] if len(params) > 1 else 0.0
        return off + amp * np.sin(2.0 * np.pi * x)
    if name == "sawtooth":
        return x - 0.5
    if name == "riemann":
        ul, ur = params
        return np.where(x < 0.5, ul, ur)
    if name == "constant":
        return np.full(m, params[0] if params else 0.0)
    if name == "random_fourier":
        nmodes = int(params[0])
        seed = int(params[1]) if len(params) > 1 else 0
        rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence([seed, 0x1D])))
        u = np.zeros(m)
        for n in range(1, nmodes + 1):
            an, bn = rng.standard_normal(2) / n
            u += an * np.cos(2 * np.pi * n * x) + bn * np.sin(2 * np.pi * n * x)
        peak = np.max(np.abs(u))
        return u / peak if peak > 0 else u
    raise ValueError(f"unknown initial data '{name}'")


def make_initial(cfg: ExperimentConfig, cells=None) -> Field:
    name, params = _name_params(cfg.initial)
    cells = tuple(cells) if cells is not None else cfg.cells
    if cfg.dimension == 1:
        return Field(_initial_1d(name, params, cells[0]))
    m1, m2 = cells
    if name == "riemann":
        col = _initial_1d(name, params, m1)
        return Field(np.repeat(col[:, None], m2, axis=1))
    if name == "constant":
        return Field(np.full((m1, m2), params[0] if params else 0.0))
    if name == "sine":
        amp = params[0] if params else 1.0
        off = params[1] if len(params) > 1 else 0.0
        x1, x2 = cell_centers(m1), cell_centers(m2)
        return Field(off + amp * np.outer(np.sin(2 * np.pi * x1),
                                          np.sin(2 * np.pi * x2)))
    # product profiles; the second random_fourier factor shifts its seed
    params2 = params
    if name == "random_fourier":
        seed2 = (params[1] if len(params) > 1 else 0) + 1
        params2 = (params[0], seed2)
    return Field(np.outer(_initial_1d(name, params, m1),
                          _initial_1d(name, params2, m2)))


def make_path(cfg: ExperimentConfig, seed: int | None = None) -> DrivingPath:
    path = sample_brownian(cfg.seed if seed is None else seed,
                           cfg.dimension, cfg.horizon, cfg.segments)
    for _ in range(cfg.refine_level):
        path = refine(path)
    return path


def replica_seed(cfg: ExperimentConfig, index: int) -> int:
    return derive_seed(cfg.seed, index)


def make_record_times(cfg: ExperimentConfig) -> tuple:
    spec = cfg.times.strip()
    if spec in ("", "none"):
        return ()
    name, params = _name_params(spec) if "(" in spec else (None, None)
    if name == "geometric":
        t0, ratio = params[0], params[1]
        tmax = params[2] if len(params) > 2 else cfg.horizon
        out, t = [], t0
        while t <= tmax * (1 + 1e-12):
            out.append(t)
            t *= ratio
        return tuple(out)
    if name == "linspace":
        a, b, n = params
        return tuple(np.linspace(a, b, int(n)))
    return tuple(float(s) for s in spec.split(","))


def make_record_options(cfg: ExperimentConfig, **overrides) -> RecordOptions:
    base = dict(times=make_record_times(cfg), xi_bins=cfg.xi_bins,
                ledger=cfg.ledger, cell_resolved=cfg.cell_resolved,
                lambdas=cfg.lambdas, cfl=cfg.cfl,
                numerical_flux=cfg.numerical_flux)
    base.update(overrides)
    return RecordOptions(**base)


def with_cells(cfg: ExperimentConfig, cells) -> ExperimentConfig:
    return replace(cfg, cells=tuple(int(c) for c in cells))
