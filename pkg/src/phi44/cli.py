"""Command-line front end: ``phi44 <command> [options]``.

Every command writes JSON and CSV files under ``--out``. Settings come from an
optional flat ``key = value`` file (``--config``) and are overridden by flags;
the resolved settings are hashed so equal hashes mean equal outputs.

Exit codes: 0 success, 1 numerical failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

SCHEMA_VERSION = 1
COMMANDS = ("solve0d", "fundamental", "iterate", "loops", "certify")


class ConfigError(ValueError):
    """Invalid setting; the message starts with the offending field."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    mode: str = "4d"
    lam: float = 0.04
    lambda_grid: tuple = ()
    n_max: int = 7
    nu_max: int = 20
    max_iter: int = 500
    tol: float | None = None
    d0: float | None = None
    d0_grid: tuple = ()
    closure: str = "tree"
    pattern: str = "isotropic"
    rho_sign: int = -1
    q2_points: int = 64
    rel_tol: float = 1e-3
    variant: str = "bare"
    which: str = "all"
    q2: tuple = ()
    out: str = "phi44-out"

    def effective_tol(self) -> float:
        if self.tol is not None:
            return self.tol
        return 1e-8 if self.command == "solve0d" or self.mode == "0d" else 1e-5

    def canonical(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("out")
        d["tol"] = self.effective_tol()
        return d

    def digest(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


# config-file key -> RunConfig field
FILE_KEYS = {
    "model.lambda": "lam",
    "model.n_max": "n_max",
    "model.d0": "d0",
    "solver.mode": "mode",
    "solver.tol": "tol",
    "solver.nu_max": "nu_max",
    "solver.max_iter": "max_iter",
    "solver.closure": "closure",
    "mapping.rho_sign": "rho_sign",
    "grid.pattern": "pattern",
    "grid.q2_points": "q2_points",
    "quadrature.rel_tol": "rel_tol",
    "loops.variant": "variant",
    "loops.which": "which",
    "loops.q2": "q2",
    "certify.lambda_grid": "lambda_grid",
    "certify.d0_grid": "d0_grid",
    "output.dir": "out",
}
FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _convert(name: str, raw):
    kind = FIELD_TYPES[name]
    try:
        if kind == "tuple":
            if isinstance(raw, str):
                raw = [x for x in raw.replace(",", " ").split() if x]
            return tuple(float(x) for x in raw)
        if kind == "int":
            return int(raw)
        if kind in ("float", "float | None"):
            return float(raw)
        return str(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        text = Path(path).read_text()
        parser.read_string("[run]\n" + text)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"config: {exc}") from None
    out = {}
    for key, value in parser["run"].items():
        if key not in FILE_KEYS:
            raise ConfigError(f"{key}: unknown configuration key")
        field = FILE_KEYS[key]
        out[field] = _convert(field, value)
    return out


def _check(cond: bool, field: str, msg: str):
    if not cond:
        raise ConfigError(f"{field}: {msg}")


def validate(cfg: RunConfig) -> RunConfig:
    _check(cfg.command in COMMANDS, "command", f"must be one of {', '.join(COMMANDS)}")
    _check(cfg.mode in ("0d", "4d"), "mode", "must be 0d or 4d")
    _check(cfg.closure in ("tree", "asymptotic"), "closure", "must be tree or asymptotic")
    _check(cfg.pattern in ("isotropic", "collinear"), "pattern", "must be isotropic or collinear")
    _check(cfg.variant in ("bare", "weighted"), "variant", "must be bare or weighted")
    _check(cfg.which in ("all", "n2", "n3", "dn3"), "which", "must be all, n2, n3 or dn3")
    _check(all(x >= 0 for x in cfg.q2), "q2", "values must be >= 0")
    _check(cfg.rho_sign in (-1, 1), "rho_sign", "must be -1 or 1")
    _check(cfg.n_max >= 5 and cfg.n_max % 2 == 1, "n_max", "must be odd and >= 5")
    _check(cfg.nu_max >= 1, "nu_max", "must be >= 1")
    _check(cfg.max_iter >= 1, "max_iter", "must be >= 1")
    _check(cfg.q2_points >= 4, "q2_points", "must be >= 4")
    _check(cfg.tol is None or cfg.tol > 0, "tol", "must be > 0")
    _check(cfg.rel_tol > 0, "rel_tol", "must be > 0")
    _check(cfg.d0 is None or cfg.d0 > 0, "d0", "must be > 0")
    _check(all(x > 0 for x in cfg.d0_grid), "d0_grid", "values must be > 0")
    _check(all(x > 0 for x in cfg.lambda_grid), "lambda_grid", "values must be > 0")
    if cfg.command == "solve0d" or (cfg.command == "iterate" and cfg.mode == "0d"):
        _check(0.0 <= cfg.lam <= 0.05, "lambda", "must lie in [0, 0.05]")
    elif cfg.command in ("fundamental", "iterate"):
        _check(0.0 < cfg.lam <= 0.05, "lambda", "must lie in (0, 0.05]")
    else:
        _check(cfg.lam >= 0.0, "lambda", "must be >= 0")
    return cfg


# --------------------------------------------------------------------------
# output helpers


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    if hasattr(x, "dtype"):
        return _fmt(x.item())
    return str(x)


def write_csv(path: Path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "dtype"):
        x = x.tolist()
        return _jsonable(x)
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def write_json(path: Path, command: str, cfg: RunConfig, payload: dict):
    from . import __version__

    doc = {"schema": f"phi44/{command}/{SCHEMA_VERSION}", "version": __version__,
           "config": cfg.canonical(), "config_hash": cfg.digest(), **payload}
    path.write_text(json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n")


# --------------------------------------------------------------------------
# commands


def _quad(cfg: RunConfig):
    from .loops import QuadratureConfig

    return QuadratureConfig(rel_tol=cfg.rel_tol)


def cmd_solve0d(cfg: RunConfig, out: Path) -> int:
    from .splitting import (
        ZERO_DIM,
        default_d0,
        renorm_bound_constants,
        splitting_bounds,
    )
    from .zerodim import factorized_splitting, solve_zerodim

    state, diag = solve_zerodim(cfg.lam, cfg.n_max, cfg.effective_tol(), cfg.max_iter,
                                cfg.closure, cfg.d0)
    rows, ok = [], diag.converged and all(diag.signs_ok)
    if cfg.lam > 0:
        d0 = default_d0(cfg.lam) if cfg.d0 is None else cfg.d0
        bounds = splitting_bounds(cfg.lam, cfg.n_max, renorm_bound_constants(cfg.lam, ZERO_DIM), d0)
        for n, d in sorted(factorized_splitting(state).items()):
            lo, hi = bounds.lower(n), bounds.upper(n)
            inside = lo <= d <= hi
            ok = ok and inside
            rows.append((n, d, lo, hi, inside))
    write_csv(out / "solve0d_deltas.csv", ["n", "delta", "delta_min", "delta_max", "within"], rows)
    ratios = [math.nan] + diag.ratios
    write_csv(out / "solve0d_iterations.csv", ["nu", "distance", "ratio", "signs_ok"],
              [(k + 1, d, ratios[k], diag.signs_ok[k]) for k, d in enumerate(diag.distances)])
    write_json(out / "solve0d.json", "solve0d", cfg, {
        "converged": diag.converged, "iterations": diag.iterations, "ok": ok,
        "h": {str(n): state.value(n) for n in state.orders},
        "deltas": {str(r[0]): {"delta": r[1], "min": r[2], "max": r[3], "within": r[4]}
                   for r in rows},
        "signs_ok": all(diag.signs_ok), "distances": diag.distances, "ratios": diag.ratios})
    return 0 if ok else 1


def _build(cfg: RunConfig):
    import numpy as np

    from .trees import build_fundamental, standard_q2_grid

    q2 = standard_q2_grid(cfg.q2_points)
    return build_fundamental(cfg.lam, _quad(cfg), n_max=cfg.n_max, pattern=cfg.pattern,
                             d0=cfg.d0, q2=np.asarray(q2))


def cmd_fundamental(cfg: RunConfig, out: Path) -> int:
    import numpy as np

    from ._weights import propagator
    from .mapping4d import MappingConfig, membership_violations
    from .norms import build_norm_weights, norm_entries
    from .trees import splitting_at

    seq = _build(cfg)
    g = seq.h2 * propagator(seq.q2)
    write_csv(out / "fundamental_two_point.csv", ["q2", "h2", "h2_delta"],
              zip(seq.q2.tolist(), seq.h2.tolist(), g.tolist()))
    rows, worst = [], 0.0
    for n in range(3, seq.n_max + 1, 2):
        d = splitting_at(seq, n)
        worst = max(worst, float(np.max(np.abs(d / seq.deltas[n] - 1.0))))
        rows += [(n, t, v, dv) for t, v, dv in zip(seq.scales, seq.h[n].tolist(), d.tolist())]
    write_csv(out / "fundamental_orders.csv", ["n", "t", "value", "delta"], rows)
    w = build_norm_weights(cfg.lam, seq.q2, seq.scales, seq.pattern, seq.n_max, _quad(cfg), seq.d0)
    bad = membership_violations(seq, MappingConfig(quad=_quad(cfg)))
    write_json(out / "fundamental.json", "fundamental", cfg, {
        "q2": seq.q2, "h2": seq.h2, "scales": list(seq.scales),
        "orders": {str(n): seq.h[n] for n in seq.h},
        "deltas": {str(n): float(v[0]) for n, v in seq.deltas.items()},
        "near_point_h2_delta": float(g[0]), "rho0": seq.constants.rho, "b0": seq.b0,
        "b1": seq.b1, "splitting_rel_error": worst, "norm_entries": norm_entries(seq, w),
        "membership_violations": bad})
    return 0 if not bad else 1


def _iterate_0d(cfg: RunConfig, out: Path) -> int:
    from .zerodim import apply_m0, distance_0d, free_solution, norm_weights_0d

    weights = norm_weights_0d(cfg.lam, cfg.n_max, cfg.d0)
    start = state = free_solution(cfg.lam, cfg.n_max)
    rows, status, prev = [], "max_steps", None
    for nu in range(1, cfg.nu_max + 1):
        new = apply_m0(state, cfg.closure, cfg.d0)
        d = distance_0d(new, state, weights)
        ratio = d / prev if prev else math.nan
        rows.append((nu, d, distance_0d(new, start, weights), ratio, 0.0))
        prev, state = d, new
        if d < cfg.effective_tol():
            status = "converged"
            break
    return _emit_iteration(cfg, out, rows, status, "", math.nan)


def _emit_iteration(cfg, out, rows, status, message, r0) -> int:
    write_csv(out / "iterate.csv", ["nu", "distance", "ball_distance", "ratio", "band"], rows)
    write_json(out / "iterate.json", "iterate", cfg, {
        "status": status, "message": message, "converged": status == "converged",
        "nu": len(rows), "r0": r0, "distances": [r[1] for r in rows],
        "ball_distances": [r[2] for r in rows], "ratios": [r[3] for r in rows[1:]],
        "bands": [r[4] for r in rows]})
    return 0 if status == "converged" else 1


def cmd_iterate(cfg: RunConfig, out: Path) -> int:
    if cfg.mode == "0d":
        return _iterate_0d(cfg, out)
    import numpy as np

    from .iteration import phi44_iterate
    from .mapping4d import MappingConfig
    from .trees import standard_q2_grid

    quad = _quad(cfg)
    rep = phi44_iterate(cfg.lam, cfg.nu_max, cfg.effective_tol(), cfg.n_max, quad,
                        MappingConfig(quad=quad, closure=cfg.closure, rho_sign=cfg.rho_sign),
                        pattern=cfg.pattern, q2=np.asarray(standard_q2_grid(cfg.q2_points)),
                        d0=cfg.d0)
    return _emit_iteration(cfg, out, rep.rows(), rep.status, rep.message, rep.r0)


def cmd_loops(cfg: RunConfig, out: Path) -> int:
    import numpy as np

    from .loops import log_growth_exponent, n2_tilde, n3_derivative, n3_tilde

    quad = _quad(cfg)
    if cfg.q2:
        q2 = list(cfg.q2)
    else:
        q2 = [0.0] + np.geomspace(1e-4, 1e6, cfg.q2_points).tolist()
    funcs = {"n2": n2_tilde, "n3": n3_tilde, "dn3": n3_derivative}
    which = list(funcs) if cfg.which == "all" else [cfg.which]
    table = {k: [funcs[k](x, cfg.lam, quad, cfg.variant) for x in q2] for k in which}
    if cfg.which == "all":
        cols = ["q2"] + [c for k in which for c in (k, k + "_err")]
        rows = [[x] + [v for k in which for v in (table[k][i].value, table[k][i].error_estimate)]
                for i, x in enumerate(q2)]
    else:
        cols = ["q2", "value", "error"]
        rows = [(x, r.value, r.error_estimate) for x, r in zip(q2, table[cfg.which])]
    write_csv(out / "loops.csv", cols, rows)
    payload = {"points": len(q2)}
    if "n3" in table and cfg.variant == "bare":
        # normalized operation times the propagator: 1 + R3 / (q^2 + m^2)
        sel = [(x, 1.0 + r.value / (x + 1.0)) for x, r in zip(q2, table["n3"]) if 1e2 <= x <= 1e6]
        if len(sel) >= 6:
            p, err = log_growth_exponent([a for a, _ in sel], [b for _, b in sel])
            payload.update(growth_exponent=p, growth_exponent_stderr=err)
    write_json(out / "loops.json", "loops", cfg, payload)
    return 0


def cmd_certify(cfg: RunConfig, out: Path) -> int:
    from .certify import CertifyConfig, certify_all

    kw = {}
    if cfg.lambda_grid:
        kw["contraction_lambdas"] = cfg.lambda_grid
        kw["fd0_lambdas"] = cfg.lambda_grid
    if cfg.d0_grid:
        kw["d0_grid"] = cfg.d0_grid
    try:
        ccfg = CertifyConfig(**kw)
    except ValueError as exc:
        raise ConfigError(f"certify: {exc}") from None
    bundle = certify_all(ccfg)
    names = {"fd0": "fd0_curves.csv", "fd1": "fd1_curves.csv", "contraction": "contraction.csv"}
    for key, cert in bundle.certificates.items():
        write_csv(out / names[key], cert.columns, cert.rows)
    cols, rows = bundle.curves
    write_csv(out / "constant_curves.csv", cols, rows)
    write_json(out / "certify_summary.json", "certify", cfg, bundle.summary())
    return 0 if bundle.passed else 1


HANDLERS = {"solve0d": cmd_solve0d, "fundamental": cmd_fundamental, "iterate": cmd_iterate,
            "loops": cmd_loops, "certify": cmd_certify}


# --------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value settings file")
    common.add_argument("--out", dest="out", help="output directory (default phi44-out)")
    common.add_argument("--rel-tol", dest="rel_tol", type=float, help="quadrature relative tolerance")

    def model(p, lam=True):
        if lam:
            p.add_argument("--lambda", dest="lam", type=float, help="coupling")
        p.add_argument("--nmax", dest="n_max", type=int, help="highest odd order kept")
        p.add_argument("--d0", type=float, help="splitting gap parameter")

    parser = _Parser(prog="phi44", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve0d", parents=[common], help="zero-dimensional fixed point")
    model(p)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--closure", choices=["tree", "asymptotic"])

    p = sub.add_parser("fundamental", parents=[common], help="fundamental sequence tables")
    model(p)
    p.add_argument("--pattern", choices=["isotropic", "collinear"])
    p.add_argument("--q2-points", dest="q2_points", type=int)

    p = sub.add_parser("iterate", parents=[common], help="fixed-point iteration")
    model(p)
    p.add_argument("--numax", dest="nu_max", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--mode", choices=["0d", "4d"])
    p.add_argument("--closure", choices=["tree", "asymptotic"])
    p.add_argument("--pattern", choices=["isotropic", "collinear"])
    p.add_argument("--rho-sign", dest="rho_sign", type=int, choices=[-1, 1])
    p.add_argument("--q2-points", dest="q2_points", type=int)

    p = sub.add_parser("loops", parents=[common], help="renormalized loop integrals on a grid")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--variant", choices=["bare", "weighted"])
    p.add_argument("--which", choices=["all", "n2", "n3", "dn3"])
    p.add_argument("--q2", nargs="+", type=float, help="explicit momentum grid")
    p.add_argument("--q2-points", dest="q2_points", type=int)

    p = sub.add_parser("certify", parents=[common], help="closed-form inequality certificates")
    p.add_argument("--lambda-grid", dest="lambda_grid", nargs="+", type=float)
    p.add_argument("--d0-grid", dest="d0_grid", nargs="+", type=float)
    return parser


def resolve(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = {"command": args.command}
    if args.config:
        values.update(read_config_file(args.config))
    for name, value in vars(args).items():
        if name in ("command", "config") or value is None:
            continue
        values[name] = _convert(name, value) if name in FIELD_TYPES else value
    return validate(RunConfig(**values))


def _apply_threads():
    raw = os.environ.get("PHI4_THREADS")
    if raw is None:
        return
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"PHI4_THREADS: not an integer: {raw!r}") from None
    if n < 1:
        raise ConfigError("PHI4_THREADS: must be >= 1")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        _apply_threads()
        cfg = resolve(argv)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        return HANDLERS[cfg.command](cfg, out)
    except ConfigError as exc:
        print(f"phi44: error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ValueError) as exc:
        print(f"phi44: numerical failure: {exc}", file=sys.stderr)
        return 1


def main(argv=None):
    sys.exit(run(argv))
