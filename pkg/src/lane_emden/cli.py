"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 quadrature failure.
Results go to stdout and, for commands that produce artifacts, to files in
the output directory.  Status messages (cache hits, warnings) go to stderr.
"""
from __future__ import annotations

import datetime as _dt
import functools
import hashlib
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

import click
import numpy as np

from . import __version__
from .bubble import expansion_validation
from .errors import DomainError, QuadratureError, SolverError
from .geometry import load_point, minimal_fiber_check, point_from_dict, sigma_gamma
from .ground_state import (RadialProfile, ShootingOptions, fit_derivative_tail_exponents,
                           fit_tail_exponents, ode_residual, solve_ground_state)
from .linearization import kernel_report
from .moments import compute_moments
from .problem_setup import CriticalPair, check_theorem_hypotheses, classify_regime, dual_exponents
from .reduced import compute_c1_c2, predict_concentration, psi

CACHE_ENV = "LANE_EMDEN_CACHE"
DEFAULT_SCHEDULE = (0.04, 0.02, 0.01, 0.005)


@dataclass
class RunConfig:
    """Everything a run needs; loaded from ``--config`` and overridden by flags."""

    N: int | None = None
    p: float | None = None
    q: float | None = None
    alpha: float = 1.0
    beta: float = 1.0
    solver: dict = field(default_factory=dict)
    point: object = None  # path or inline document
    eps_schedule: tuple = DEFAULT_SCHEDULE
    t: float = 1.0
    eta: list | None = None
    out_dir: str = "results"
    cache_dir: str | None = None

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        doc = json.loads(Path(path).read_text())
        pair = doc.pop("pair", {})
        for k in ("N", "p", "q", "alpha", "beta"):
            if k in pair:
                doc.setdefault(k, pair[k])
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise DomainError(f"unknown config keys: {', '.join(unknown)}")
        if "eps_schedule" in doc:
            doc["eps_schedule"] = tuple(float(e) for e in doc["eps_schedule"])
        return cls(**doc)

    def pair(self) -> CriticalPair:
        if self.N is None or self.p is None:
            raise DomainError("N and p are required")
        return CriticalPair(int(self.N), float(self.p), self.q, self.alpha, self.beta)

    def options(self) -> ShootingOptions:
        return ShootingOptions(**self.solver)

    def cache_path(self) -> Path:
        return Path(self.cache_dir or os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "lane_emden")

    def load_point(self):
        if self.point is None:
            raise DomainError("a point document is required (--point)")
        if isinstance(self.point, dict):
            return point_from_dict(self.point)
        return load_point(self.point)


# ------------------------------------------------------------- helpers


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _meta(ctx) -> dict:
    if ctx.obj.get("no_meta"):
        return {}
    return {"meta": {"version": __version__,
                     "generated": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}}


def _write(cfg: RunConfig, name: str, text: str) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _cache_key(pair: CriticalPair, opts: ShootingOptions) -> str:
    opt_hash = hashlib.sha256(json.dumps(opts.to_dict(), sort_keys=True).encode()).hexdigest()[:12]
    return f"profile_N{pair.N}_p{round(pair.p, 12):.12f}_{opt_hash}.json"


def get_profile(cfg: RunConfig, force: bool = False) -> tuple[RadialProfile, bool]:
    """Load the profile from the cache or solve and store it; returns ``(profile, hit)``."""
    pair, opts = cfg.pair(), cfg.options()
    path = cfg.cache_path() / _cache_key(pair, opts)
    if path.exists() and not force:
        return RadialProfile.from_json(path.read_text()), True
    prof = solve_ground_state(pair, opts)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(prof.to_json())
    tmp.replace(path)
    return prof, False


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SolverError as exc:
            click.echo(f"solver error: {exc}", err=True)
            for item in exc.trace[-5:]:
                click.echo(f"  trace: {item}", err=True)
            sys.exit(3)
        except QuadratureError as exc:
            click.echo(f"quadrature error: {exc}", err=True)
            for item in exc.trace:
                click.echo(f"  trace: {item}", err=True)
            sys.exit(4)
        except (DomainError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
            click.echo(f"invalid input: {exc}", err=True)
            sys.exit(2)
    return wrapper


def _config(ctx, **overrides) -> RunConfig:
    cfg = RunConfig.from_file(ctx.obj["config"]) if ctx.obj.get("config") else RunConfig()
    solver = dict(cfg.solver)
    for k, v in overrides.items():
        if v is None:
            continue
        if k == "r_max":
            solver["r_max"] = v
        elif k == "nodes_per_decade":
            solver["nodes_per_decade"] = v
        elif k == "eps_schedule":
            if v:
                cfg.eps_schedule = tuple(v)
        else:
            setattr(cfg, k, v)
    cfg.solver = solver
    return cfg


def _pair_options(f):
    opts = [
        click.option("--N", "N", type=int, help="Dimension."),
        click.option("--p", type=float, help="Smaller exponent."),
        click.option("--q", type=float, help="Larger exponent (default: from the hyperbola)."),
        click.option("--alpha", type=float),
        click.option("--beta", type=float),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _solver_options(f):
    f = click.option("--r-max", "r_max", type=float, help="Outer radius of the profile grid.")(f)
    f = click.option("--nodes-per-decade", type=int)(f)
    f = click.option("--cache-dir", type=click.Path(file_okay=False),
                     help=f"Profile cache (default ${CACHE_ENV} or ~/.cache/lane_emden).")(f)
    f = click.option("--out-dir", type=click.Path(file_okay=False), help="Directory for output files.")(f)
    return f


def _profile_and_constants(cfg, force=False):
    prof, hit = get_profile(cfg, force)
    click.echo("cache hit" if hit else "solved and cached", err=True)
    return prof, compute_moments(prof)


# ------------------------------------------------------------ commands


@click.group()
@click.option("--config", type=click.Path(exists=True, dir_okay=False), help="RunConfig JSON.")
@click.option("--no-meta", is_flag=True, help="Omit timestamps so outputs are byte-identical.")
@click.version_option(__version__)
@click.pass_context
def main(ctx, config, no_meta):
    """Ground states, moment constants and reduced energies for the critical Lane-Emden system."""
    ctx.ensure_object(dict)
    ctx.obj.update(config=config, no_meta=no_meta)


@main.command()
@_pair_options
@click.pass_context
@_handle_errors
def hyperbola(ctx, **kw):
    """Conjugate exponent, dual exponents, decay regime and hypothesis report."""
    cfg = _config(ctx, **kw)
    pair = cfg.pair()
    ps, qs = dual_exponents(pair)
    reg = classify_regime(pair)
    rep = check_theorem_hypotheses(pair)
    click.echo(f"N = {pair.N}")
    click.echo(f"p = {pair.p!r}")
    click.echo(f"q = {pair.q!r}")
    click.echo(f"p* = {ps!r}")
    click.echo(f"q* = {qs!r}")
    click.echo(f"regime = {reg.tag.value} (u_tail = {reg.u_tail_exponent!r}, "
               f"v_tail = {reg.v_tail_exponent!r}, log_factor = {str(reg.log_factor).lower()})")
    click.echo(f"condition = {rep.condition or 'none'}")
    finite = [k for k, v in rep.finite_constants.items() if v]
    click.echo(f"finite constants = {', '.join(finite) if finite else 'none'}")


@main.command()
@_pair_options
@_solver_options
@click.option("--force", is_flag=True, help="Recompute even on a cache hit.")
@click.pass_context
@_handle_errors
def solve(ctx, force, **kw):
    """Solve for the ground state and cache it."""
    cfg = _config(ctx, **kw)
    prof, hit = get_profile(cfg, force)
    click.echo("cache hit" if hit else "solved and cached", err=True)
    su, sv, r2u, r2v = fit_tail_exponents(prof)
    sdu, sdv, _, _ = fit_derivative_tail_exponents(prof)
    doc = {
        "pair": prof.pair.to_dict(), "V0": prof.V[0], "r_max": prof.r_max,
        "ode_residual": ode_residual(prof),
        "tail_slopes": {"U": su, "V": sv, "dU": sdu, "dV": sdv, "r2_U": r2u, "r2_V": r2v},
        "regime": prof.regime.to_dict(),
        "cache_file": _cache_key(prof.pair, prof.options),
    }
    doc.update(_meta(ctx))
    click.echo(_dump(doc), nl=False)


@main.command()
@_pair_options
@_solver_options
@click.pass_context
@_handle_errors
def constants(ctx, **kw):
    """Moment constants L1..L7 and reduced coefficients c1, c2."""
    cfg = _config(ctx, **kw)
    prof, consts = _profile_and_constants(cfg)
    pair = prof.pair
    doc = consts.to_dict()
    doc.update(compute_c1_c2(consts, pair).to_dict())
    doc.update(_meta(ctx))
    text = _dump(doc)
    _write(cfg, "constants.json", text)
    click.echo(text, nl=False)


@main.command()
@_pair_options
@_solver_options
@click.option("--point", type=click.Path(exists=True, dir_okay=False), help="Point geometry JSON.")
@click.pass_context
@_handle_errors
def predict(ctx, **kw):
    """Theta, concentration parameter and feasibility at a point."""
    cfg = _config(ctx, **kw)
    point, wp = cfg.load_point()
    prof, consts = _profile_and_constants(cfg)
    pair = prof.pair
    if point.N != pair.N:
        raise DomainError(f"point dimension {point.N} differs from N={pair.N}")
    coeffs = compute_c1_c2(consts, pair)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pred = predict_concentration(point, consts, coeffs, pair)
    doc = pred.to_dict(cfg.eps_schedule)
    if wp is not None:
        sigma, holds = sigma_gamma(wp, consts, pair)
        doc["warped"] = {"minimal_fiber": minimal_fiber_check(wp), "sigma": sigma,
                         "h_exceeds_sigma": holds}
    doc.update(_meta(ctx))
    text = _dump(doc)
    _write(cfg, "prediction.json", text)
    click.echo(text, nl=False)
    if pred.discrepancy and pred.t_star is not None:
        click.echo(f"warning: t_star = {pred.t_star!r} differs from c2/Theta = {pred.t_unscaled!r} "
                   f"(L3 = {consts.L3!r})", err=True)


@main.command()
@_pair_options
@_solver_options
@click.option("--point", type=click.Path(exists=True, dir_okay=False))
@click.option("--t", type=float, help="Concentration parameter (default 1).")
@click.option("--eps", "eps_schedule", type=float, multiple=True, help="Repeat for a schedule.")
@click.option("--degree", type=int, default=7, show_default=True, help="Sphere rule degree.")
@click.option("--tol", type=float, default=1e-8, show_default=True, help="Radial refinement tolerance.")
@click.pass_context
@_handle_errors
def validate(ctx, degree, tol, **kw):
    """Compare quadrature energies with the small-eps expansion."""
    cfg = _config(ctx, **kw)
    point, _ = cfg.load_point()
    prof, consts = _profile_and_constants(cfg)
    pair = prof.pair
    coeffs = compute_c1_c2(consts, pair)
    table = expansion_validation(prof, point, pair, consts, coeffs, cfg.t, cfg.eta,
                                 cfg.eps_schedule, degree=degree, tol=tol)
    text = table.to_csv()
    _write(cfg, "validation.csv", text)
    click.echo(text, nl=False)
    click.echo(f"verdict: {table.verdict}")


@main.command()
@_pair_options
@_solver_options
@click.option("--point", type=click.Path(exists=True, dir_okay=False))
@click.option("--t-min", type=float, default=1e-3, show_default=True)
@click.option("--t-max", type=float, default=1e3, show_default=True)
@click.option("--n-t", type=int, default=200, show_default=True)
@click.option("--eta-min", type=float, default=0.0, show_default=True)
@click.option("--eta-max", type=float, default=0.0, show_default=True)
@click.option("--n-eta", type=int, default=1, show_default=True)
@click.pass_context
@_handle_errors
def sweep(ctx, t_min, t_max, n_t, eta_min, eta_max, n_eta, **kw):
    """Grid of Psi(t, eta e1) on log-spaced t; the minimizer row is flagged."""
    if not 0 < t_min < t_max or n_t < 2 or n_eta < 1:
        raise DomainError("need 0 < t-min < t-max, n-t >= 2, n-eta >= 1")
    cfg = _config(ctx, **kw)
    point, _ = cfg.load_point()
    prof, consts = _profile_and_constants(cfg)
    pair = prof.pair
    coeffs = compute_c1_c2(consts, pair)
    ts = np.exp(np.linspace(math.log(t_min), math.log(t_max), n_t))
    etas = np.linspace(eta_min, eta_max, n_eta) if n_eta > 1 else np.array([eta_min])
    rows = []
    for e in etas:
        ev = np.zeros(pair.N)
        ev[0] = e
        for t in ts:
            rows.append([float(t), float(e), psi(float(t), ev, point, consts, coeffs, pair)])
    k = int(np.argmin([r[2] for r in rows]))
    lines = ["t,eta,psi,is_min"]
    lines += [f"{t!r},{e!r},{v!r},{int(i == k)}" for i, (t, e, v) in enumerate(rows)]
    text = "\n".join(lines) + "\n"
    _write(cfg, "sweep.csv", text)
    click.echo(text, nl=False)


@main.command("check-kernel")
@_pair_options
@_solver_options
@click.pass_context
@_handle_errors
def check_kernel(ctx, **kw):
    """Residuals of the dilation and translation kernel modes."""
    cfg = _config(ctx, **kw)
    prof, hit = get_profile(cfg)
    click.echo("cache hit" if hit else "solved and cached", err=True)
    doc = kernel_report(prof).to_dict()
    doc.update(_meta(ctx))
    text = _dump(doc)
    _write(cfg, "kernel.json", text)
    click.echo(text, nl=False)


if __name__ == "__main__":  # pragma: no cover
    main()
