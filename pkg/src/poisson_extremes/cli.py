"""Batch experiment driver.

Subcommands: ``constants`` (limit parameters of a model), ``simulate``
(replicated runs to CSV + JSON manifest), ``verify`` (KS and interval
count checks against the limit law), ``variance`` (U-statistic variance
and Poisson-approximation table), ``beta-integrate`` (RQMC estimate of
the limit constant).  Configuration comes from an optional TOML file
plus flag overrides; everything is keyed off one integer seed, and
replication fan-out is deterministic regardless of worker count.

Exit codes: 0 pass, 1 verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

from . import __version__
from .chaos import BoundIngredients, UStatSpec, dtv_bound, empirical_u_counts, rho_t, sigma_t, variance_u
from .geometry import ConvexBody
from .limits import LimitLaw, beta_numeric, intensity_measure, limit_params, limit_tail, weibull_order_stats
from .models import MODEL_KINDS, ModelSpec, run_model
from .orderstats import EnumerationStrategy
from .sampling import SeededStream
from .stats import (
    calibrate_ks_threshold,
    counts_to_histogram,
    interval_count_test,
    ks_distance_censored,
    tv_distance_counts,
)


@dataclass
class ExperimentConfig:
    """One experiment: model, replication plan, evaluation grid, outputs."""

    model: str = "gilbert"
    d: int = 2
    window: str = "box"
    k: int | None = None
    ell: int | None = None
    j: int | None = None
    delta: str | None = None
    t: list = field(default_factory=lambda: [100.0])
    reps: int = 200
    seed: int = 1
    m: list = field(default_factory=lambda: [1])
    x_grid: list = field(default_factory=lambda: [0.4, 0.8, 1.2])
    x_max: float = 1.2
    strategy: str = "auto"
    out: str | None = None
    ck: float = 10.0
    cfx: float | None = None
    threads: int = 1
    s: list = field(default_factory=lambda: [0.1])
    samples: int = 8192
    randomizations: int = 16
    cal_reps: int = 200

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.window not in ("ball", "box"):
            raise ValueError("window must be 'ball' or 'box'")
        if self.reps < 1:
            raise ValueError("replications must be >= 1")
        self.t = [float(v) for v in self.t]
        self.m = [int(v) for v in self.m]
        self.x_grid = [float(v) for v in self.x_grid]
        self.s = [float(v) for v in self.s]
        if any(v <= 0 for v in self.t):
            raise ValueError("t values must be positive")
        if any(v < 1 for v in self.m):
            raise ValueError("m values must be >= 1")
        if any(v <= 0 for v in self.x_grid) or sorted(self.x_grid) != self.x_grid:
            raise ValueError("x grid must be positive and sorted ascending")
        if self.x_grid and self.x_max < self.x_grid[-1]:
            raise ValueError("x_max must cover the x grid")
        if self.strategy not in ("auto", "brute_force", "grid_prune"):
            raise ValueError("strategy must be auto, brute_force or grid_prune")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(ExperimentConfig)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return ExperimentConfig(**data)

    def model_spec(self) -> ModelSpec:
        if self.model == "sphere_polytope":
            return ModelSpec(kind=self.model, d=self.d)
        body = ConvexBody.unit_ball(self.d) if self.window == "ball" else ConvexBody.unit_cube(self.d)
        kwargs = {"kind": self.model, "d": self.d, "window": body,
                  "k": self.k, "ell": self.ell, "j": self.j}
        if self.delta is not None:
            kwargs["delta_expr"] = self.delta
        return ModelSpec(**kwargs)

    def enumeration_strategy(self) -> EnumerationStrategy | None:
        if self.strategy == "auto":
            return None
        return EnumerationStrategy(kind=self.strategy)


def load_config(path: str | None, overrides: dict) -> ExperimentConfig:
    data = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ValueError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ValueError(f"bad TOML in {path}: {exc}") from exc
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(data)


def _versions() -> dict:
    return {
        "package": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def manifest_path(out: str) -> Path:
    return Path(out).with_suffix(".manifest.json")


def write_manifest(config: ExperimentConfig, out: str) -> Path:
    path = manifest_path(out)
    payload = {"config": config.to_dict(), "versions": _versions(), "seed": config.seed}
    try:
        path.write_text(json.dumps(payload, indent=2) + "\n")
    except OSError as exc:
        raise ValueError(f"cannot write manifest {path}: {exc}") from exc
    return path


def read_manifest(path: str | Path) -> ExperimentConfig:
    try:
        payload = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValueError(f"cannot read manifest {path}: {exc}") from exc
    return ExperimentConfig.from_dict(payload["config"])


def _one_replication(spec, t, config, offset):
    stream = SeededStream(config.seed).child(offset)
    run = run_model(spec, t, config.x_max, max(config.m),
                    stream=stream, strategy=config.enumeration_strategy())
    return run


def simulate_runs(config: ExperimentConfig):
    """All replications for all t, in deterministic replication order."""
    spec = config.model_spec()
    jobs = [(t, rep, ti * config.reps + rep)
            for ti, t in enumerate(config.t) for rep in range(config.reps)]
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            runs = list(pool.map(lambda job: _one_replication(spec, job[0], config, job[2]), jobs))
    else:
        runs = [_one_replication(spec, t, config, off) for t, rep, off in jobs]
    return [(t, rep, run) for (t, rep, _), run in zip(jobs, runs)]


def write_csv(rows, config: ExperimentConfig, out: str) -> None:
    m_max = max(config.m)
    header = ["t", "rep", "n_values", "empty"]
    header += [f"stat_{i}" for i in range(1, m_max + 1)]
    header.append("values")
    try:
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for t, rep, run in rows:
                n = int(run.diagnostics["n_values"])
                record = [repr(float(t)), rep, n, int(n == 0)]
                record += [repr(float(v)) for v in run.order_stats[:m_max]]
                record.append(";".join(repr(float(v)) for v in np.sort(run.rescaled)))
                writer.writerow(record)
    except OSError as exc:
        raise ValueError(f"cannot write {out}: {exc}") from exc


def read_csv(path: str):
    """Rows of (t, rep, order_stats array, rescaled values array)."""
    rows = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            m_max = sum(1 for name in header if name.startswith("stat_"))
            for rec in reader:
                t = float(rec[0])
                rep = int(rec[1])
                stats = np.array([float(v) for v in rec[4:4 + m_max]])
                raw = rec[4 + m_max]
                values = np.array([float(v) for v in raw.split(";")] if raw else [])
                rows.append((t, rep, stats, values))
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc
    return rows


def cmd_constants(config: ExperimentConfig) -> int:
    spec = config.model_spec()
    law = limit_params(spec, samples=config.samples,
                       randomizations=config.randomizations,
                       stream=SeededStream(config.seed), threads=config.threads)
    row = {
        "model": config.model,
        "gamma": law.gamma,
        "beta": law.beta,
        "tau": law.tau,
        "provenance": law.beta_provenance,
        "beta_stderr": law.beta_stderr,
    }
    print(f"{'model':<22}{'gamma':>10}{'beta':>16}{'tau':>10}  provenance")
    stderr = f" +- {law.beta_stderr:.3g}" if law.beta_stderr is not None else ""
    print(f"{config.model:<22}{law.gamma:>10.6g}{law.beta:>16.10g}{law.tau:>10.6g}  "
          f"{law.beta_provenance}{stderr}")
    if config.out:
        _write_json(config.out, row)
    return 0


def cmd_simulate(config: ExperimentConfig) -> int:
    if config.out is None:
        raise ValueError("simulate needs --out for the CSV dataset")
    rows = simulate_runs(config)
    write_csv(rows, config, config.out)
    write_manifest(config, config.out)
    total = sum(int(run.diagnostics["n_values"]) for _, _, run in rows)
    print(f"wrote {len(rows)} replications ({total} rescaled values) to {config.out}")
    return 0


def _limit_cdf(law: LimitLaw, m: int):
    def cdf(x):
        return 1.0 - limit_tail(m, x, law)
    return cdf


def _interval_checks(report, tol_void=0.03, tol_multi=0.03, tol_corr=None):
    if tol_corr is None:
        # null correlation estimate has standard error ~ 1/sqrt(reps)
        tol_corr = max(0.05, 3.0 / math.sqrt(report.reps))
    checks = []
    n = report.reps
    ratio_slack = max(0.1, 3.0 * math.sqrt(2.0 / n))
    for row in report.rows:
        ok_mean = abs(row.mean - row.nu) <= 3.0 * row.mean_se
        ratio = row.variance / row.mean if row.mean > 0 else math.nan
        ok_ratio = abs(ratio - 1.0) <= ratio_slack if math.isfinite(ratio) else False
        band_void = max(tol_void, 3.0 * math.sqrt(row.void_expected * (1 - row.void_expected) / n))
        band_multi = max(tol_multi, 3.0 * math.sqrt(row.multi_expected * (1 - row.multi_expected) / n))
        ok_void = abs(row.void_empirical - row.void_expected) <= band_void
        ok_multi = abs(row.multi_empirical - row.multi_expected) <= band_multi
        checks.append({
            "interval": list(row.interval),
            "nu": row.nu,
            "mean": row.mean,
            "mean_se": row.mean_se,
            "variance_mean_ratio": ratio,
            "void_empirical": row.void_empirical,
            "void_expected": row.void_expected,
            "multi_empirical": row.multi_empirical,
            "multi_expected": row.multi_expected,
            "pass": bool(ok_mean and ok_ratio and ok_void and ok_multi),
        })
    corr = np.asarray(report.correlations)
    off = corr - np.diag(np.diag(corr))
    max_corr = float(np.max(np.abs(off))) if corr.size > 1 else 0.0
    return checks, max_corr, max_corr <= tol_corr


def cmd_verify(config: ExperimentConfig) -> int:
    if config.reps < 100:
        raise ValueError("verify needs at least 100 replications for honest thresholds")
    spec = config.model_spec()
    law = limit_params(spec, samples=config.samples,
                       randomizations=config.randomizations,
                       stream=SeededStream(config.seed), threads=config.threads)
    if config.out and Path(config.out).exists():
        rows = [(t, rep, stats, vals) for t, rep, stats, vals in read_csv(config.out)]
    else:
        rows = [(t, rep, run.order_stats, run.rescaled) for t, rep, run in simulate_runs(config)]
    cal_stream = SeededStream(config.seed).child(1 << 40)
    ks_records = []
    all_pass = True
    interval_records = []
    for ti, t in enumerate(config.t):
        group = [(stats, vals) for tt, _, stats, vals in rows if tt == t]
        if not group:
            raise ValueError(f"dataset has no rows for t={t}")
        n = len(group)
        for mi, m in enumerate(config.m):
            sample = np.array([stats[m - 1] for stats, _ in group])
            cdf = _limit_cdf(law, m)
            report = ks_distance_censored(sample, cdf)

            def null_sample(stream, m=m):
                return weibull_order_stats(law, m, config.x_max, n, stream)[:, m - 1]

            threshold = calibrate_ks_threshold(
                null_sample, cdf, config.cal_reps,
                cal_stream.child(ti * len(config.m) + mi))
            passed = report.distance <= threshold
            all_pass = all_pass and passed
            ks_records.append({
                "t": t, "m": m, "n": report.n_total, "dropped": report.n_dropped,
                "D": report.distance, "threshold": threshold, "pass": bool(passed),
            })
            print(f"t={t:g} m={m}: D={report.distance:.4f} "
                  f"threshold={threshold:.4f} dropped={report.n_dropped} "
                  f"{'PASS' if passed else 'FAIL'}")
        if config.x_grid:
            edges = [0.0] + list(config.x_grid)
            intervals = list(zip(edges[:-1], edges[1:]))
            report = interval_count_test([vals for _, vals in group], intervals, law)
            checks, max_corr, corr_ok = _interval_checks(report)
            iv_pass = corr_ok and all(c["pass"] for c in checks)
            all_pass = all_pass and iv_pass
            interval_records.append({
                "t": t, "intervals": checks, "max_abs_correlation": max_corr,
                "pass": bool(iv_pass),
            })
            print(f"t={t:g} intervals: max|corr|={max_corr:.3f} "
                  f"{'PASS' if iv_pass else 'FAIL'}")
    payload = {
        "model": config.model,
        "t": config.t,
        "reps": config.reps,
        "m": config.m,
        "x_grid": config.x_grid,
        "law": {"gamma": law.gamma, "beta": law.beta, "tau": law.tau,
                "provenance": law.beta_provenance, "beta_stderr": law.beta_stderr},
        "ks": ks_records,
        "intervals": interval_records,
        "pass": bool(all_pass),
    }
    if config.out:
        _write_json(str(Path(config.out).with_suffix(".report.json")), payload)
    print("verdict:", "PASS" if all_pass else "FAIL")
    return 0 if all_pass else 1


def cmd_variance(config: ExperimentConfig) -> int:
    base = config.model_spec()
    stream = SeededStream(config.seed)
    records = []
    print(f"{'t':>8}{'s':>10}{'sigma_t':>14}{'rho_t':>12}{'variance_u':>14}"
          f"{'emp_var':>12}{'tv_emp':>10}{'tv_bound':>12}")
    for ti, t in enumerate(config.t):
        for si, s in enumerate(config.s):
            if s == 0.0:
                rec = {"t": t, "s": 0.0, "sigma_t": 0.0, "rho_t": 0.0,
                       "variance_u": 0.0, "empirical_variance": 0.0,
                       "tv_empirical": 0.0, "tv_bound": 0.0}
                records.append(rec)
                print(f"{t:>8g}{0.0:>10g}" + "".join(f"{0.0:>{w}.4g}" for w in (14, 12, 14, 12, 10, 12)))
                continue
            uspec = UStatSpec(model=base, s=s)
            sig = sigma_t(uspec, t)
            rho = rho_t(uspec, t)
            var = variance_u(uspec, t)
            counts = empirical_u_counts(uspec, t, config.reps,
                                        stream.child(ti * len(config.s) + si))
            emp_var = float(np.var(counts, ddof=1))
            tv = tv_distance_counts(counts_to_histogram(counts), sig)
            bound = dtv_bound(BoundIngredients(sigma_t=sig, rho_t=rho, sigma=sig), config.ck)
            rec = {"t": t, "s": s, "sigma_t": sig, "rho_t": rho, "variance_u": var,
                   "empirical_variance": emp_var, "tv_empirical": tv, "tv_bound": bound}
            records.append(rec)
            print(f"{t:>8g}{s:>10g}{sig:>14.6g}{rho:>12.4g}{var:>14.6g}"
                  f"{emp_var:>12.5g}{tv:>10.4f}{bound:>12.4g}")
    if config.out:
        _write_json(config.out, {"model": config.model, "reps": config.reps,
                                 "ck": config.ck, "rows": records})
    return 0


def cmd_beta_integrate(config: ExperimentConfig) -> int:
    spec = config.model_spec()
    est = beta_numeric(spec, samples=config.samples, stream=SeededStream(config.seed),
                       randomizations=config.randomizations, threads=config.threads)
    print(f"beta = {est.estimate:.8g} +- {est.stderr:.3g} "
          f"(samples={est.n_samples}, randomizations={est.n_randomizations}, "
          f"diverged={est.diverged})")
    if config.out:
        _write_json(config.out, {
            "model": config.model, "beta": est.estimate, "stderr": est.stderr,
            "diverged": est.diverged, "samples": est.n_samples,
            "randomizations": est.n_randomizations,
        })
    return 0


def _write_json(path: str, payload: dict) -> None:
    try:
        Path(path).write_text(json.dumps(payload, indent=2) + "\n")
    except OSError as exc:
        raise ValueError(f"cannot write {path}: {exc}") from exc


def _float_list(text: str) -> list:
    return [float(v) for v in text.replace(",", " ").split()]


def _int_list(text: str) -> list:
    return [int(v) for v in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poisson-extremes",
        description="Simulate Poisson-driven geometric order statistics and "
                    "verify their Weibull-process limits.")
    parser.add_argument("--config", help="TOML config file; flags override its keys")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("constants", "print limit parameters (gamma, beta, tau) for a model"),
        ("simulate", "run replications and write a CSV dataset + manifest"),
        ("verify", "compare simulated order statistics to the limit law"),
        ("variance", "U-statistic variance and Poisson approximation table"),
        ("beta-integrate", "RQMC estimate of the limit constant beta"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--model", choices=MODEL_KINDS, help="model kind (default gilbert)")
        p.add_argument("--d", type=int, help="ambient dimension")
        p.add_argument("--k", type=int, help="flat dimension (flat models)")
        p.add_argument("--ell", type=int, help="number of intersecting flats")
        p.add_argument("--j", type=int, help="intrinsic volume index")
        p.add_argument("--window", choices=("ball", "box"), help="unit ball or unit cube")
        p.add_argument("--delta", help="connection radius expression in t, e.g. 't**-0.5'")
        p.add_argument("--t", type=_float_list, help="intensity values, comma or space separated")
        p.add_argument("--reps", type=int, help="replications per t")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--m", type=_int_list, help="order statistic indices")
        p.add_argument("--x-grid", dest="x_grid", type=_float_list,
                       help="interval edges on the limit scale")
        p.add_argument("--x-max", dest="x_max", type=float, help="rescaled value cutoff")
        p.add_argument("--s", type=_float_list, help="kernel radii (variance command)")
        p.add_argument("--strategy", choices=("auto", "brute_force", "grid_prune"))
        p.add_argument("--out", help="output path (CSV for simulate, JSON otherwise)")
        p.add_argument("--ck", type=float, help="constant C_k in the TV bound")
        p.add_argument("--samples", type=int, help="RQMC samples per randomization")
        p.add_argument("--randomizations", type=int, help="RQMC randomizations")
        p.add_argument("--cal-reps", dest="cal_reps", type=int,
                       help="replications for KS threshold calibration")
        p.add_argument("--threads", type=int, help="worker threads")
    return parser


_COMMANDS = {
    "constants": cmd_constants,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "variance": cmd_variance,
    "beta-integrate": cmd_beta_integrate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "command")}
    try:
        config = load_config(args.config, overrides)
        return _COMMANDS[args.command](config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
