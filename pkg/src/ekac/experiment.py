"""Experiment configuration, presets, and the batch pipeline.

A run is described by a small TOML config (input set, polynomial literal,
function specs, truncation policy, moment depth, seed). The pipeline
builds the prime table once, derives both the truncated-window and the
full-window statistics from one cumulative pass, then streams the range in
partitions: truncated values feed the moment accumulator, full values feed
the distribution fit.
"""

from __future__ import annotations

import hashlib
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .additive import (
    StronglyAdditive,
    builtin_omega,
    omega_residue_class,
    range_truncated_values,
    window_up_to,
)
from .errors import ConfigError
from .gaussian import FitReport, fit_normalized
from .inputs import (
    AllIntegers,
    InputSet,
    ShiftedPrimes,
    element_range,
    element_values,
    model_for,
)
from .moments import MomentAccumulator, MomentReport, merge, report
from .poly import eval_terms_on_arrays, parse_poly
from .sieve import PrimeTable, primes_up_to
from .stats import CumulativeStats, StatBundle, choose_z, mu1_loglog_slope


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str  # "all-integers" | "shifted-primes"
    x: int
    shift: int  # used only by shifted-primes
    poly: str
    functions: tuple[str, ...]
    z_policy: str  # "auto" | "full" | "explicit"
    z_value: float | None
    m_max: int
    seed: int
    out_dir: str

    def validate(self) -> "ExperimentConfig":
        if self.kind not in ("all-integers", "shifted-primes"):
            raise ConfigError(f"unknown input kind {self.kind!r}")
        if self.x < 16:
            raise ConfigError(f"x must be at least 16, got {self.x}")
        if self.kind == "shifted-primes":
            if self.shift == 0:
                raise ConfigError("shifted-primes needs a nonzero shift")
            if self.shift >= self.x:
                raise ConfigError(
                    f"shift {self.shift} >= x {self.x} leaves no elements"
                )
        if self.m_max < 2 or self.m_max % 2 != 0:
            raise ConfigError(f"m_max must be even and >= 2, got {self.m_max}")
        if not self.functions:
            raise ConfigError("at least one function spec required")
        if self.z_policy not in ("auto", "full", "explicit"):
            raise ConfigError(f"unknown z policy {self.z_policy!r}")
        if self.z_policy == "explicit":
            if self.z_value is None or not (2.0 <= self.z_value <= self.x):
                raise ConfigError("explicit z must lie in [2, x]")
        try:
            parse_poly(self.poly, nvars=len(self.functions))
        except ValueError as exc:
            raise ConfigError(f"bad polynomial literal: {exc}") from exc
        for spec in self.functions:
            build_function(spec)  # raises ConfigError on bad specs
        return self


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical TOML; parse_config inverts this exactly."""
    lines = ["[input]", f'kind = "{cfg.kind}"', f"x = {cfg.x}"]
    if cfg.kind == "shifted-primes":
        lines.append(f"shift = {cfg.shift}")
    lines += ["", "[law]", f'poly = "{cfg.poly}"']
    fns = ", ".join(f'"{s}"' for s in cfg.functions)
    lines.append(f"functions = [{fns}]")
    lines += ["", "[run]"]
    if cfg.z_policy == "explicit":
        lines.append(f"z = {cfg.z_value!r}")
    else:
        lines.append(f'z = "{cfg.z_policy}"')
    lines += [
        f"m_max = {cfg.m_max}",
        f"seed = {cfg.seed}",
        f'out = "{cfg.out_dir}"',
    ]
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    try:
        inp = data["input"]
        law = data["law"]
        run = data.get("run", {})
        z = run.get("z", "auto")
        if isinstance(z, str):
            z_policy, z_value = z, None  # validate() vets the policy name
        else:
            z_policy, z_value = "explicit", float(z)
        cfg = ExperimentConfig(
            kind=str(inp["kind"]),
            x=int(inp["x"]),
            shift=int(inp.get("shift", 0)),
            poly=str(law["poly"]),
            functions=tuple(str(s) for s in law["functions"]),
            z_policy=z_policy,
            z_value=z_value,
            m_max=int(run.get("m_max", 8)),
            seed=int(run.get("seed", 0)),
            out_dir=str(run.get("out", "out")),
        )
    except KeyError as exc:
        raise ConfigError(f"config missing key: {exc}") from exc
    return cfg.validate()


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            text = fh.read().decode("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:16]


# -- function specs -------------------------------------------------------------


def build_function(spec: str) -> StronglyAdditive:
    """"omega", "omega-mod:M,R", or "file:PATH"."""
    if spec == "omega":
        return builtin_omega()
    if spec.startswith("omega-mod:"):
        try:
            mod_s, res_s = spec[len("omega-mod:") :].split(",")
            return omega_residue_class(int(mod_s), int(res_s))
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"bad class spec {spec!r}: {exc}") from exc
    if spec.startswith("file:"):
        return load_additive_file(spec[len("file:") :])
    raise ConfigError(f"unknown function spec {spec!r}")


def load_additive_file(path: str) -> StronglyAdditive:
    """Custom function from TOML: explicit prime values, residue classes,
    and a default, checked against the declared bound on every query."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot load function file {path}: {exc}") from exc
    name = str(data.get("name", os.path.basename(path)))
    bound = float(data.get("bound", 1.0))
    default = _parse_value(data.get("default", 0))
    values = {int(k): _parse_value(v) for k, v in data.get("values", {}).items()}
    classes = [
        (int(c["mod"]), int(c["residue"]) % int(c["mod"]), _parse_value(c["value"]))
        for c in data.get("classes", [])
    ]

    def fn(p: int):
        if p in values:
            return values[p]
        for mod, res, val in classes:
            if p % mod == res:
                return val
        return default

    return StronglyAdditive(name, fn, bound=bound)


def _parse_value(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, bool):
        raise ConfigError(f"bad function value {v!r}")
    return v


# -- presets ---------------------------------------------------------------------


def preset_config(name: str, x: int = 1_000_000, seed: int = 1) -> ExperimentConfig:
    base = dict(
        kind="all-integers",
        x=x,
        shift=0,
        z_policy="auto",
        z_value=None,
        m_max=8,
        seed=seed,
        out_dir="out",
    )
    if name == "omega-square":
        cfg = ExperimentConfig(poly="T1^2", functions=("omega",), **base)
    elif name == "omega-cube":
        cfg = ExperimentConfig(poly="T1^3", functions=("omega",), **base)
    elif name == "class-product":
        cfg = ExperimentConfig(
            poly="T1*T2",
            functions=("omega-mod:4,1", "omega-mod:3,1"),
            **base,
        )
    elif name == "linear-combo":
        cfg = ExperimentConfig(
            poly="2*T1 + 3*T2",
            functions=("omega-mod:4,1", "omega-mod:3,1"),
            **base,
        )
    elif name == "shifted-omega":
        base.update(kind="shifted-primes", shift=1)
        cfg = ExperimentConfig(poly="T1", functions=("omega",), **base)
    else:
        raise ConfigError(
            f"unknown preset {name!r}; have omega-square, omega-cube, "
            "class-product, linear-combo, shifted-omega"
        )
    return cfg.validate()


PRESET_NAMES = (
    "omega-square",
    "omega-cube",
    "class-product",
    "linear-combo",
    "shifted-omega",
)


# -- pipeline ---------------------------------------------------------------------


def default_workers() -> int:
    env = os.environ.get("EKAC_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"bad EKAC_WORKERS value {env!r}") from exc
    return min(os.cpu_count() or 1, 8)


def build_input_set(cfg: ExperimentConfig) -> InputSet:
    if cfg.kind == "all-integers":
        return AllIntegers(cfg.x)
    return ShiftedPrimes(cfg.x, cfg.shift)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    config_hash: str
    z: float
    bundle_z: StatBundle
    bundle_x: StatBundle
    moment_report: MomentReport
    fit_report: FitReport
    diagnostics: dict
    elapsed: float


def resolve_z(
    cfg: ExperimentConfig,
    gs: list[StronglyAdditive],
    model,
    table: PrimeTable,
) -> float:
    if cfg.z_policy == "full":
        return float(cfg.x)
    if cfg.z_policy == "explicit":
        return float(cfg.z_value)
    return choose_z(float(cfg.x), gs, model, table)


def _chunk_bounds(lo: int, hi: int, chunks: int) -> list[tuple[int, int]]:
    total = hi - lo + 1
    chunks = max(1, min(chunks, total))
    step = (total + chunks - 1) // chunks
    return [(b, min(b + step - 1, hi)) for b in range(lo, hi + 1, step)]


def run_experiment(
    cfg: ExperimentConfig, workers: int | None = None
) -> ExperimentResult:
    """Full pipeline: stats, truncated moments, full-value distribution fit."""
    t0 = time.perf_counter()
    cfg = cfg.validate()
    workers = workers if workers is not None else default_workers()
    input_set = build_input_set(cfg)
    model = model_for(input_set)
    lo, hi = element_range(input_set)
    table = primes_up_to(max(cfg.x, hi))
    gs = [build_function(s) for s in cfg.functions]
    q = parse_poly(cfg.poly, nvars=len(gs))

    z = resolve_z(cfg, gs, model, table)
    cumulative = CumulativeStats(q, gs, model, table)
    bundle_z = cumulative.bundle_at(z)
    bundle_x = cumulative.bundle_at(float(cfg.x))

    cover = window_up_to(table, hi)
    elems = element_values(input_set, table)
    key = (cfg.m_max, config_hash(cfg), z)

    def work(bounds: tuple[int, int]):
        c_lo, c_hi = bounds
        full, trunc = range_truncated_values(gs, cover, c_lo, c_hi, inner_z=z)
        sel = elems[(elems >= c_lo) & (elems <= c_hi)] - c_lo
        acc = MomentAccumulator(cfg.m_max, config_key=key)
        t_coords = [prof[sel] for prof in trunc]
        acc.add_centered_array(eval_terms_on_arrays(q, t_coords) - bundle_z.a_q)
        f_coords = [prof[sel] for prof in full]
        normalized = (
            eval_terms_on_arrays(q, f_coords) - bundle_x.a_q
        ) / bundle_x.b_q
        return acc, normalized

    bounds = _chunk_bounds(lo, hi, workers)
    if len(bounds) == 1:
        parts = [work(bounds[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, bounds))

    acc = parts[0][0]
    for other, _ in parts[1:]:
        acc = merge(acc, other)
    normalized = np.concatenate([buf for _, buf in parts])

    moment_report = report(acc, bundle_z)
    fit_report = fit_normalized(normalized)
    diagnostics = {
        "z": z,
        "a_q_window_shift": bundle_x.a_q - bundle_z.a_q,
        "b_q_window_ratio": (bundle_x.b_q / bundle_z.b_q)
        if bundle_z.b_q > 0
        else float("inf"),
        "mu1_loglog_slope": mu1_loglog_slope(model, table),
    }
    return ExperimentResult(
        config=cfg,
        config_hash=config_hash(cfg),
        z=z,
        bundle_z=bundle_z,
        bundle_x=bundle_x,
        moment_report=moment_report,
        fit_report=fit_report,
        diagnostics=diagnostics,
        elapsed=time.perf_counter() - t0,
    )


def stats_dict(cfg: ExperimentConfig) -> dict:
    """The JSON payload for the stats subcommand."""
    cfg = cfg.validate()
    input_set = build_input_set(cfg)
    model = model_for(input_set)
    table = primes_up_to(max(cfg.x, element_range(input_set)[1]))
    gs = [build_function(s) for s in cfg.functions]
    q = parse_poly(cfg.poly, nvars=len(gs))
    z = resolve_z(cfg, gs, model, table)
    cumulative = CumulativeStats(q, gs, model, table)

    def bundle_payload(b: StatBundle) -> dict:
        return {
            "z": b.window.z,
            "prime_count": len(b.window),
            "means": list(b.means),
            "kappa": [[float(v) for v in row] for row in b.kappa],
            "max_mean": b.frak_m,
            "max_variance": b.frak_k,
            "a_q": b.a_q,
            "b_q_squared": b.b_q_squared,
            "b_q": b.b_q,
        }

    return {
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "x": cfg.x,
        "x_scale": model.x_scale,
        "z": z,
        "at_z": bundle_payload(cumulative.bundle_at(z)),
        "at_x": bundle_payload(cumulative.bundle_at(float(cfg.x))),
        "mu1_loglog_slope": mu1_loglog_slope(model, table),
    }
