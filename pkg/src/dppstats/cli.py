"""Command-line interface: one subcommand per family of computations.

Every run writes a table (CSV or JSON) whose header embeds the canonical
configuration, so ``dppstats --from-config FILE`` reproduces it exactly.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure (nothing
is written in that case).
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import asymptotics, exactdist, montecarlo, specfun
from .ensembles import Ensemble, Family, profile
from .modphi import ModPhiLimit, RateDomainError

COMMANDS = ("tail", "rate", "kernels", "entropy", "ldp", "variance", "sample")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


NUMERIC_ERRORS = (
    specfun.QuadratureError,
    exactdist.WindowBudgetError,
    RateDomainError,
    FloatingPointError,
    ArithmeticError,
    RuntimeError,
)


@dataclass(frozen=True)
class RunConfig:
    """Validated run description; ``canonical_json`` is what output headers embed."""

    command: str
    ensemble: str = "ginibre"
    alpha: int = 0
    rho: Optional[float] = None
    n_particles: Optional[int] = None
    edge_aplus: Optional[float] = None
    radius: tuple = ()
    big_r: tuple = ()
    grid: tuple = ()
    gamma: float = 1.5
    beta: float = 1.0
    tol: float = 1e-10
    eps_window: float = 1e-12
    seed: int = 0
    samples: int = 10000
    format: str = "csv"

    def canonical_json(self) -> str:
        d = dataclasses.asdict(self)
        d = {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = {k: (tuple(v) if isinstance(v, list) else v) for k, v in d.items()}
        return validate(cls(**kw))

    def ensemble_obj(self) -> Ensemble:
        if self.ensemble == Family.HYPERBOLIC.value:
            return Ensemble.hyperbolic(self.rho)
        if self.ensemble == Family.GINIBRE_FINITE.value:
            return Ensemble.finite(self.n_particles, self.alpha)
        return Ensemble.ginibre(self.alpha)


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.ensemble not in {f.value for f in Family}:
        raise ConfigError(f"unknown ensemble {cfg.ensemble!r}")
    if cfg.format not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if not (0 < cfg.tol < 1) or not (0 < cfg.eps_window <= 1e-3):
        raise ConfigError("tol must be in (0, 1) and eps-window in (0, 1e-3]")
    if cfg.ensemble == "hyperbolic":
        if cfg.rho is None or cfg.rho <= 0:
            raise ConfigError("hyperbolic ensemble needs --rho > 0")
        if cfg.alpha != 0 or cfg.n_particles is not None:
            raise ConfigError("--alpha/--n-particles do not apply to the hyperbolic ensemble")
    else:
        if cfg.rho is not None:
            raise ConfigError("--rho only applies to the hyperbolic ensemble")
        if cfg.alpha < 0 or cfg.alpha > specfun.HERMITE_MAX_DEGREE:
            raise ConfigError("--alpha out of range")
    if cfg.ensemble == "ginibre-finite":
        if cfg.n_particles is None or cfg.n_particles < 1:
            raise ConfigError("finite ensemble needs --n-particles >= 1")
    elif cfg.n_particles is not None:
        raise ConfigError("--n-particles only applies to ginibre-finite")
    if cfg.edge_aplus is not None and cfg.ensemble != "ginibre-finite":
        raise ConfigError("--edge-aplus only applies to ginibre-finite")
    if cfg.seed < 0 or cfg.samples < 0:
        raise ConfigError("seed and samples must be non-negative")
    if cfg.beta <= 0:
        raise ConfigError("--beta must be positive")
    for name in ("radius", "big_r", "grid"):
        vals = getattr(cfg, name)
        if any(not math.isfinite(v) for v in vals):
            raise ConfigError(f"--{name.replace('_', '-')} values must be finite")
    if any(v <= 0 for v in cfg.radius) or any(v < 0 for v in cfg.big_r):
        raise ConfigError("radii must be positive")
    need = {
        "tail": ("big_r", "grid"),
        "rate": ("grid",),
        "kernels": ("grid",),
        "entropy": ("radius",),
        "ldp": ("big_r", "grid"),
        "variance": ("radius",),
        "sample": ("big_r",),
    }[cfg.command]
    for name in need:
        if not getattr(cfg, name):
            raise ConfigError(f"command {cfg.command} needs a non-empty --{name.replace('_', '-')}")
    if cfg.command == "tail" and len(cfg.big_r) != 1:
        raise ConfigError("tail takes exactly one --big-r")
    if cfg.command in ("entropy", "ldp", "variance") and cfg.ensemble == "hyperbolic":
        raise ConfigError(f"{cfg.command} is implemented for the planar ensembles")
    if cfg.command in ("ldp", "variance") and (cfg.ensemble != "ginibre" or cfg.alpha != 0):
        raise ConfigError(f"{cfg.command} is implemented for the Ginibre ensemble with alpha = 0")
    if cfg.command == "ldp" and not cfg.gamma > 1:
        raise ConfigError("--gamma must exceed 1")
    if cfg.command == "sample" and cfg.samples < 1:
        raise ConfigError("sample needs --samples >= 1")
    if cfg.command == "kernels" and cfg.ensemble == "hyperbolic" and any(v <= 0 for v in cfg.grid):
        raise ConfigError("hyperbolic kernel grid must be positive")
    return cfg


# --------------------------------------------------------------------------
# Commands

@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)


def _pmap(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def cmd_tail(cfg: RunConfig, workers: int = 1) -> Table:
    e = cfg.ensemble_obj()
    R = float(cfg.big_r[0])
    prof = profile(e, cfg.edge_aplus)
    lim = ModPhiLimit(prof)
    sigma = e.sigma(R)
    law = exactdist.pmf(e, R, cfg.eps_window)
    counts = None
    if cfg.samples > 0:
        counts = montecarlo.sample_count(e, R, cfg.samples, montecarlo.RngSpec(cfg.seed))

    def row(y):
        thr = sigma * y
        exact = law.tail(thr)
        precise = lim.precise_deviation(sigma, y).value if y > 0 else math.nan
        x = thr / math.sqrt(sigma * lim.lambda2_0)
        est = lim.cor_mod_estimates(sigma, x)
        if counts is not None:
            mc = montecarlo.tail_from_counts(counts, law.center, thr)
            mc_vals = [mc.point, mc.ci95[0], mc.ci95[1]]
        else:
            mc_vals = [math.nan] * 3
        return [y, exact, precise, est.moderate_dev_value, est.extended_clt_value] + mc_vals

    cols = ["y", "exact", "precise_dev", "moderate_dev", "extended_clt", "mc_point", "mc_lo", "mc_hi"]
    return Table(cols, _pmap(row, list(cfg.grid), workers))


def cmd_rate(cfg: RunConfig, workers: int = 1) -> Table:
    lim = ModPhiLimit(profile(cfg.ensemble_obj(), cfg.edge_aplus))

    def row(y):
        rp = lim.rate(y)
        return [rp.y, rp.I, rp.Iprime, rp.Idoubleprime]

    return Table(["y", "I", "Iprime", "Idoubleprime"], _pmap(row, list(cfg.grid), workers))


def cmd_kernels(cfg: RunConfig, workers: int = 1) -> Table:
    e = cfg.ensemble_obj()
    pairs = [(s, t) for i, s in enumerate(cfg.grid) for t in cfg.grid[i:]]
    if e.is_hyperbolic:
        def row(st):
            s, t = st
            k = asymptotics.hyper_kernel(e.rho, s, t, fast_path=False)
            closed = min(s, t) ** 2 / (s + t) if e.rho == 1.0 else math.nan
            return [s, t, k, closed]
    else:
        prof = profile(e, cfg.edge_aplus)
        closed_ok = e.alpha == 0 and not prof.is_finite_edge

        def row(st):
            s, t = st
            k = asymptotics.micro_kernel(prof, s, t, tol=cfg.tol)
            closed = asymptotics.ginibre_micro_closed(s / 2, t / 2) / math.sqrt(math.pi) if closed_ok else math.nan
            return [s, t, k, closed]

    return Table(["s", "t", "kernel", "closed_form"], _pmap(row, pairs, workers))


def cmd_entropy(cfg: RunConfig, workers: int = 1) -> Table:
    e = cfg.ensemble_obj()
    coeff = asymptotics.entropy_coefficient(e.alpha, cfg.beta, tol=cfg.tol)

    def row(r):
        ex = exactdist.exact_entropy(e, r, cfg.beta)
        return [r, ex, r * coeff, ex / (r * coeff)]

    return Table(["r", "exact", "r_coefficient", "ratio"], _pmap(row, list(cfg.radius), workers))


def cmd_ldp(cfg: RunConfig, workers: int = 1) -> Table:
    e = cfg.ensemble_obj()
    reg = asymptotics.ldp_regime(cfg.gamma)
    items = [(R, x) for R in cfg.big_r for x in cfg.grid]

    def row(item):
        R, x = item
        if x <= 0:
            raise ConfigError("ldp grid values must be positive")
        th, v = reg.Theta(R), reg.v(R)
        lt = exactdist.log_exact_tail(e, R, x * th)
        return [R, x, -lt / (th * v), asymptotics.ldp_rate(reg, x).integral_0_to_x]

    return Table(["R", "x", "exact_normalized", "J_integral"], _pmap(row, items, workers))


def cmd_variance(cfg: RunConfig, workers: int = 1) -> Table:
    e = cfg.ensemble_obj()

    def row(r):
        ex = exactdist.exact_cumulant(e, r * r, 2, cfg.eps_window)
        return [r, ex, asymptotics.ginibre_cov_exact(r, r), r / math.sqrt(math.pi)]

    return Table(["r", "exact_sum", "bessel_closed", "r_over_sqrt_pi"], _pmap(row, list(cfg.radius), workers))


def cmd_sample(cfg: RunConfig, workers: int = 1) -> Table:
    e = cfg.ensemble_obj()
    rng = montecarlo.RngSpec(cfg.seed)
    radii = sorted(float(R) for R in cfg.big_r)
    if len(radii) == 1:
        data = montecarlo.sample_count(e, radii[0], cfg.samples, rng, eps=cfg.eps_window, workers=workers)[:, None]
    else:
        data = montecarlo.sample_path(e, radii, cfg.samples, rng, eps=cfg.eps_window, workers=workers)
    cols = ["index"] + [f"count_R={R!r}" for R in radii]
    rows = [[i] + [int(v) for v in data[i]] for i in range(data.shape[0])]
    return Table(cols, rows)


HANDLERS = {
    "tail": cmd_tail,
    "rate": cmd_rate,
    "kernels": cmd_kernels,
    "entropy": cmd_entropy,
    "ldp": cmd_ldp,
    "variance": cmd_variance,
    "sample": cmd_sample,
}


def run(cfg: RunConfig, workers: int = 1) -> Table:
    return HANDLERS[cfg.command](validate(cfg), workers)


# --------------------------------------------------------------------------
# Output

def _fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return repr(v) if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))


def _json_value(v: Any):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else None


def render(cfg: RunConfig, table: Table) -> str:
    if cfg.format == "json":
        doc = {
            "config": json.loads(cfg.canonical_json()),
            "columns": table.columns,
            "rows": [[_json_value(v) for v in r] for r in table.rows],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
    buf = io.StringIO()
    buf.write(f"# config: {cfg.canonical_json()}\n")
    buf.write(",".join(table.columns) + "\n")
    for r in table.rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    return buf.getvalue()


def read_config(path: str) -> RunConfig:
    """Recover the configuration embedded in a CSV or JSON output file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.startswith("# config: "):
        first = text.splitlines()[0]
        return RunConfig.from_dict(json.loads(first[len("# config: "):]))
    try:
        return RunConfig.from_dict(json.loads(text)["config"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"no embedded config found in {path}") from exc


def read_table(path: str) -> tuple[RunConfig, list, list]:
    """Parse an output file back into (config, columns, rows of floats)."""
    cfg = read_config(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if cfg.format == "json" and not text.startswith("#"):
        doc = json.loads(text)
        rows = [[math.nan if v is None else float(v) for v in r] for r in doc["rows"]]
        return cfg, doc["columns"], rows
    lines = text.splitlines()
    cols = lines[1].split(",")
    rows = [[float(x) for x in ln.split(",")] for ln in lines[2:] if ln]
    return cfg, cols, rows


# --------------------------------------------------------------------------
# Argument parsing

def _float_list(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip() != "")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dppstats", description=__doc__.splitlines()[0])
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--ensemble", choices=[f.value for f in Family], default="ginibre")
    p.add_argument("--alpha", type=int, default=0, help="Landau level (planar ensembles)")
    p.add_argument("--rho", type=float, help="hyperbolic parameter")
    p.add_argument("--n-particles", type=int, help="N for ginibre-finite")
    p.add_argument("--radius", type=_float_list, default=(), help="disk radii r (comma separated)")
    p.add_argument("--big-r", type=_float_list, default=(), help="unfolded radii R (comma separated)")
    p.add_argument("--grid", type=_float_list, default=(), help="y / x / s-t grid (comma separated)")
    p.add_argument("--edge-aplus", type=float, help="edge parameter a+ for ginibre-finite profiles")
    p.add_argument("--gamma", type=float, default=1.5, help="deviation exponent for ldp")
    p.add_argument("--beta", type=float, default=1.0, help="entropy index")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--eps-window", type=float, default=1e-12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--workers", type=int, default=1, help="threads for grid points (output order is fixed)")
    p.add_argument("--from-config", help="re-run the configuration embedded in an output file")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    if ns.from_config:
        return read_config(ns.from_config)
    if ns.command is None:
        raise ConfigError("a command is required")
    return validate(
        RunConfig(
            command=ns.command,
            ensemble=ns.ensemble,
            alpha=ns.alpha,
            rho=ns.rho,
            n_particles=ns.n_particles,
            edge_aplus=ns.edge_aplus,
            radius=tuple(ns.radius),
            big_r=tuple(ns.big_r),
            grid=tuple(ns.grid),
            gamma=ns.gamma,
            beta=ns.beta,
            tol=ns.tol,
            eps_window=ns.eps_window,
            seed=ns.seed,
            samples=ns.samples,
            format=ns.format,
        )
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = config_from_args(ns)
        with np.errstate(over="ignore", under="ignore"):
            table = run(cfg, workers=max(1, ns.workers))
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(cfg, table)
    if ns.out:
        with open(ns.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
