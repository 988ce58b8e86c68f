"""Command-line entry point: ``chaplab <command> --config <file> [--out <dir>] [--threads N]``.

Exit codes: 0 ok, 2 configuration error, 3 numeric error, 4 acceptance failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .asymptotics import EXPECTED, classify_regime, compute_coefficients, fit_rates
from .charmap import INV_TOL, CharCoord, PhysCoord, char_map, evaluate_state, map_forward, trace_characteristic
from .errors import ChaplabError, ConfigError, NumericError
from .initial_data import SCENARIO_SETS, InitialDataPair, pair_from_config, validate_assumptions
from .singularity import analyze, build_sigma, detect_assumption_set, envelope, lifespan
from .weakform import Slice, TestFunction, admissible_radius, concentrated_mass, epsilon_sweep, rankine_hugoniot_check

COMMANDS = ("validate", "field", "characteristics", "sigma", "envelope", "blowup", "rates", "weakcheck", "report")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ACCEPTANCE = 0, 2, 3, 4

EPS_FRACTIONS = (0.4, 0.2, 0.1, 0.05)
FIELD_COLUMNS = ("t", "x", "rho", "u", "lambda_minus", "lambda_plus", "u_x", "u_t", "rho_x", "rho_t", "jacobian")


@dataclass
class RunConfig:
    """Parsed run configuration; every numeric knob must be positive.

    ``t_max`` defaults to ``t_frac`` times the life span; ``x_range`` defaults
    to the blowup abscissa plus or minus ``x_half_width``.  ``test_center``
    defaults to the blowup point (the middle of the singular line for line
    kinds); ``test_radius`` defaults to the largest radius up to
    0.5 whose support fits the slice image and stays clear of other
    singularities; ``epsilons`` defaults to the radius times 0.4, 0.2, 0.1
    and 0.05.
    """

    scenario: Any
    command: str | None = None
    output_dir: str = "out"
    quad_tol: float = 1e-12
    inv_tol: float = INV_TOL
    grid_nt: int = 41
    grid_nx: int = 81
    t_frac: float = 0.95
    t_max: float | None = None
    x_range: list[float] | None = None
    x_half_width: float = 2.0
    n_characteristics: int = 21
    n_time: int = 101
    sigma_n: int = 401
    envelope_n: int = 200
    envelope_eps: float | None = None
    epsilons: list[float] | None = None
    test_center: list[float] | None = None
    test_radius: float | None = None
    weak_tol: float = 1e-11
    contact_deltas: list[float] = field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    contact_samples: int = 10
    r_low: float = 0.1
    r_high: float = 10.0
    rate_samples: int = 16
    assumption_set: str | None = None
    acceptance: bool = True

    _POSITIVE = (
        "quad_tol", "inv_tol", "grid_nt", "grid_nx", "t_frac", "t_max", "x_half_width", "n_characteristics",
        "n_time", "sigma_n", "envelope_n", "envelope_eps", "test_radius", "weak_tol", "contact_samples",
        "r_low", "r_high", "rate_samples",
    )
    _INTEGER = ("grid_nt", "grid_nx", "n_characteristics", "n_time", "sigma_n", "envelope_n", "contact_samples", "rate_samples")

    @classmethod
    def from_mapping(cls, obj: Any) -> "RunConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "scenario" not in obj:
            raise ConfigError("config needs a 'scenario'")
        cfg = cls(**obj)
        cfg._check()
        return cfg

    def _check(self) -> None:
        for name in self._POSITIVE:
            v = getattr(self, name)
            if v is None:
                continue
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"{name} must be a positive number, got {v!r}")
            if name in self._INTEGER and int(v) != v:
                raise ConfigError(f"{name} must be an integer, got {v!r}")
        for name, n in (("x_range", 2), ("test_center", 2)):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, list) or len(v) != n or not all(_is_real(e) for e in v)):
                raise ConfigError(f"{name} must be a list of {n} numbers")
        if self.x_range is not None and not self.x_range[0] < self.x_range[1]:
            raise ConfigError("x_range must be increasing")
        for name in ("epsilons", "contact_deltas"):
            v = getattr(self, name)
            if v is None and name == "epsilons":
                continue
            if not isinstance(v, list) or len(v) < 3 or not all(_is_real(e) and e > 0 for e in v):
                raise ConfigError(f"{name} must list at least three positive numbers")
        if not self.r_low < self.r_high:
            raise ConfigError("r_low must be below r_high")
        if self.command is not None and self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not isinstance(self.acceptance, bool):
            raise ConfigError("acceptance must be true or false")


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def load_config(path: str | os.PathLike) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return RunConfig.from_mapping(obj)


# ---------------------------------------------------------------------------
# deterministic writers


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null, tuples to lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return "%.17g" % float(v)


def write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


# ---------------------------------------------------------------------------
# commands


@dataclass
class Context:
    cfg: RunConfig
    data: InitialDataPair
    out: Path
    threads: int

    def scenario_name(self) -> str:
        return self.data.name

    def reports(self):
        return analyze(self.data)

    def t_max(self) -> float:
        if self.cfg.t_max is not None:
            return float(self.cfg.t_max)
        return self.cfg.t_frac * lifespan(self.data)

    def x_range(self) -> tuple[float, float]:
        if self.cfg.x_range is not None:
            return float(self.cfg.x_range[0]), float(self.cfg.x_range[1])
        try:
            x0 = self.reports()[0].blowup.x
        except NumericError:
            x0 = 0.5 * sum(self.data.window)
        return x0 - self.cfg.x_half_width, x0 + self.cfg.x_half_width

    def pmap(self, fn, items):
        if self.threads <= 1:
            return [fn(i) for i in items]
        with ThreadPoolExecutor(self.threads) as ex:
            return list(ex.map(fn, items))


def cmd_validate(ctx: Context) -> dict:
    s = ctx.cfg.assumption_set
    if s is None:
        s, rep = detect_assumption_set(ctx.data)
        if s is None:
            s = SCENARIO_SETS.get(ctx.data.name, "H")
            rep = validate_assumptions(ctx.data, s)
    else:
        rep = validate_assumptions(ctx.data, s)
    d = rep.to_dict()
    d["scenario"] = ctx.scenario_name()
    write_json(ctx.out / "validate.json", d)
    return {"satisfied": rep.satisfied, "assumption_set": s}


def cmd_field(ctx: Context) -> dict:
    ts = np.linspace(0.0, ctx.t_max(), ctx.cfg.grid_nt)
    xs = np.linspace(*ctx.x_range(), ctx.cfg.grid_nx)
    char_map(ctx.data)

    def row_block(t):
        rows = []
        try:
            sl = Slice(ctx.data, float(t))
            x_lo, x_hi = sl.x(np.array([sl.lo, sl.hi]))
        except NumericError:
            x_lo, x_hi = math.inf, -math.inf
        for x in xs:
            if not x_lo <= x <= x_hi:
                rows.append([t, x] + [math.nan] * (len(FIELD_COLUMNS) - 2) + ["outside-image"])
                continue
            try:
                st = evaluate_state(ctx.data, PhysCoord(float(t), float(x)), post_blowup=True, tol=ctx.cfg.inv_tol)
                rows.append([getattr(st, c) for c in FIELD_COLUMNS] + ["ok"])
            except NumericError as exc:
                rows.append([t, x] + [math.nan] * (len(FIELD_COLUMNS) - 2) + [type(exc).__name__])
        return rows

    rows = [r for block in ctx.pmap(row_block, ts) for r in block]
    write_csv(ctx.out / "field.csv", FIELD_COLUMNS + ("status",), rows)
    status = [r[-1] for r in rows]
    return {"points": len(rows), "outside_image": status.count("outside-image"),
            "failed": len(status) - status.count("ok") - status.count("outside-image")}


def cmd_characteristics(ctx: Context) -> dict:
    ts = np.linspace(0.0, ctx.t_max(), ctx.cfg.n_time)
    starts = np.linspace(*ctx.x_range(), ctx.cfg.n_characteristics)
    tab = char_map(ctx.data).table
    rows, cut = [], 0
    for fam in ("minus-family", "plus-family"):
        for s in starts:
            # a line leaves the window once T runs out of range
            T_s = float(tab.eval_T(np.array(float(s))))
            room = tab.T[-1] - T_s if fam == "minus-family" else T_s - tab.T[0]
            t_line = ts[ts <= room]
            cut += len(t_line) < len(ts)
            poly = trace_characteristic(ctx.data, fam, float(s), t_line)
            rows += [[fam, float(s), *r] for r in poly]
    write_csv(ctx.out / "characteristics.csv", ("family", "start", "t", "x", "alpha", "beta"), rows)
    return {"lines": 2 * len(starts), "truncated": cut}


def cmd_sigma(ctx: Context) -> dict:
    sig = build_sigma(ctx.data, n=ctx.cfg.sigma_n).restricted()
    t, x = char_map(ctx.data).forward(sig.alpha, sig.beta) if len(sig.alpha) else (np.array([]), np.array([]))
    rows = list(zip(sig.alpha, sig.beta, sig.f, t, x))
    write_csv(ctx.out / "sigma.csv", ("alpha", "beta", "f", "t", "x"), rows)
    return {"points": len(rows)}


def cmd_envelope(ctx: Context) -> dict:
    rep = ctx.reports()[0]
    if rep.kind != "cusp":
        raise NumericError(f"envelope branches need a cusp singularity; found {rep.kind}")
    env = envelope(ctx.data, rep.witnesses["alpha0"], ctx.cfg.envelope_eps, ctx.cfg.envelope_n)
    rows = [["left", *r] for r in env.left] + [["right", *r] for r in env.right]
    write_csv(ctx.out / "envelope.csv", ("branch", "alpha", "beta", "t", "x", "dt_dx", "d2t_dx2"), rows)
    cert = {c.branch: {**c.__dict__, "ok": c.ok} for c in env.certificates}
    write_json(ctx.out / "envelope.json", {"eps": env.eps, "certificates": cert})
    return {"certified": all(c.ok for c in env.certificates)}


def cmd_blowup(ctx: Context) -> dict:
    reps = ctx.reports()
    singular = []
    for r in reps:
        q = map_forward(ctx.data, CharCoord(r.witnesses["alpha0"], r.witnesses["beta0"]), ctx.cfg.quad_tol)
        d = r.to_dict()
        d.update(t0=q.t, x0=q.x)
        singular.append(d)
    first = min(singular, key=lambda d: d["t0"])
    out = {"t0": first["t0"], "x0": first["x0"], "t_hat": first["t_hat"], "kind": first["kind"], "singularities": singular}
    write_json(ctx.out / "blowup.json", out)
    return {"t0": first["t0"], "x0": first["x0"]}


def cmd_rates(ctx: Context) -> dict:
    out, n_pass, n_rows = [], 0, 0
    for r in ctx.reports():
        cs = compute_coefficients(ctx.data, r)
        entry = {"blowup": [r.blowup.t, r.blowup.x], "coefficients": cs.to_dict(), "rates": []}
        jobs = [(q, case) for (kind, case), table in sorted(EXPECTED.items()) if kind == cs.kind for q in sorted(table)]

        def fit(job):
            q, case = job
            try:
                rep = fit_rates(ctx.data, r, q, case, samples=ctx.cfg.rate_samples)
            except NumericError as exc:
                return {"quantity": q, "path": f"case {case}", "error": f"{type(exc).__name__}: {exc}", "passed": False}
            d = rep.to_dict()
            for s in d["samples"]:
                s["regime"] = classify_regime(cs.kind, s["t_tilde"], s["x_tilde"], ctx.cfg.r_low, ctx.cfg.r_high).case
            return d

        entry["rates"] = ctx.pmap(fit, jobs)
        n_rows += len(jobs)
        n_pass += sum(bool(d["passed"]) for d in entry["rates"])
        out.append(entry)
    write_json(ctx.out / "rates.json", {"scenario": ctx.scenario_name(), "singularities": out})
    return {"rows": n_rows, "passed": n_pass}


def cmd_weakcheck(ctx: Context) -> dict:
    reps = sorted(ctx.reports(), key=lambda q: q.blowup.t)
    r = reps[0]
    cfg = ctx.cfg
    if cfg.test_center is not None:
        center = PhysCoord(*cfg.test_center)
    elif r.line_extent is not None:
        center = PhysCoord(0.5 * (r.line_extent[0] + r.line_extent[1]), r.blowup.x)
    else:
        center = r.blowup
    if cfg.test_radius is not None:
        radius = cfg.test_radius
    else:
        # the disc must not reach singularities the sweep does not excise
        others = [math.hypot(q.blowup.t - center.t, q.blowup.x - center.x) for q in reps[1:]]
        radius = admissible_radius(ctx.data, center, min([0.5] + [0.9 * d for d in others]))
    epsilons = cfg.epsilons if cfg.epsilons is not None else [radius * f for f in EPS_FRACTIONS]
    sweep = epsilon_sweep(ctx.data, TestFunction(center, radius), epsilons, r, tol=cfg.weak_tol)
    out = {"scenario": ctx.scenario_name(), "test_function": {"center": [center.t, center.x], "radius": radius}}
    out["sweep"] = sweep.to_dict()
    summary = {"extrapolated_mass": sweep.extrapolated_mass, "monotone": sweep.monotone}
    if r.line_extent is not None:
        rh = rankine_hugoniot_check(ctx.data, r, deltas=tuple(cfg.contact_deltas), n_samples=cfg.contact_samples)
        out["contact"] = rh.to_dict()
        summary["contact_passed"] = rh.passed
        if r.kind == "line-shape-II":
            t_mid = 0.5 * (r.line_extent[0] + r.line_extent[1])
            out["concentrated_mass"] = {"t": t_mid, "mass": concentrated_mass(ctx.data, t_mid)}
    write_json(ctx.out / "weakcheck.json", out)
    return summary


def cmd_report(ctx: Context) -> dict:
    steps = {}
    for name in COMMANDS[:-1]:
        try:
            steps[name] = {"status": "ok", "result": COMMAND_TABLE[name](ctx)}
        except NumericError as exc:
            steps[name] = {"status": "not-applicable", "error": f"{type(exc).__name__}: {exc}"}
    summary = {"scenario": ctx.scenario_name(), "commands": steps}
    if ctx.cfg.acceptance:
        from .acceptance import run_all

        results = run_all()
        for res in results:
            print(res.line(), file=sys.stderr)
        # wall-clock times are left out so identical configs give identical files
        summary["acceptance"] = [
            {"criterion": a.number, "title": a.title, "passed": a.passed, "budget": a.budget, "details": a.details}
            for a in results
        ]
        summary["acceptance_passed"] = all(a.passed for a in results)
    write_json(ctx.out / "report.json", summary)
    return {"acceptance_passed": summary.get("acceptance_passed")}


COMMAND_TABLE = {
    "validate": cmd_validate,
    "field": cmd_field,
    "characteristics": cmd_characteristics,
    "sigma": cmd_sigma,
    "envelope": cmd_envelope,
    "blowup": cmd_blowup,
    "rates": cmd_rates,
    "weakcheck": cmd_weakcheck,
    "report": cmd_report,
}


# ---------------------------------------------------------------------------


def _threads(arg: int | None) -> int:
    if arg is not None:
        n = arg
    else:
        env = os.environ.get("CHAPLAB_THREADS")
        if env is None:
            return 1
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"CHAPLAB_THREADS must be an integer, got {env!r}") from exc
    if n < 1:
        raise ConfigError("thread count must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chaplab", description="Characteristic-map solver and blowup analysis.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides output_dir in the config)")
    p.add_argument("--threads", type=int, help="worker threads (fallback: CHAPLAB_THREADS, else 1)")
    return p


def run(command: str, cfg: RunConfig, out: str | None = None, threads: int = 1) -> dict:
    """Execute one command; raises ChaplabError subclasses on failure."""
    if cfg.command is not None and cfg.command != command:
        raise ConfigError(f"config is for command {cfg.command!r}, not {command!r}")
    data = pair_from_config(cfg.scenario)
    out_dir = Path(out or cfg.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory: {exc}") from exc
    return COMMAND_TABLE[command](Context(cfg, data, out_dir, threads))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        result = run(args.command, cfg, args.out, _threads(args.threads))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ChaplabError as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps(_clean(result), sort_keys=True))
    if args.command == "report" and result.get("acceptance_passed") is False:
        return EXIT_ACCEPTANCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
