"""Command-line entry point.

Every run writes its artifacts plus ``manifest.json`` (resolved settings and
a sha256 per artifact) into ``--out-dir``. Failures exit nonzero and print a
JSON error object on stderr.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .estimators import adaptive_weights, assemble_gram, ilars_path, min_dk_estimate, penalized_mask_for
from .evaluate import ForecastPairSeries, criteria_csv, dm_test, evaluate
from .forecast import RollingSpec, TrackingSpec, index_track, rolling_forecast
from .ingest import SCHEMAS, ingest_csv, read_ohlc
from .ivcore import Kernel
from .models import DK_METHODS, METHODS, EstimatorConfig, fit_model
from .simulate import DGP_KINDS, DgpSpec, compare_estimators, report_csv, report_table

__all__ = ["RunConfig", "DEFAULTS", "build_parser", "resolve", "run", "main"]

COMMANDS = ("fit", "path", "simulate", "forecast", "track", "eval")

DEFAULTS: Dict[str, object] = {
    "kernel": "5,1,1",
    "gamma": 0.5,
    "lambda": None,
    "lambda_grid": None,
    "folds": 5,
    "fold_scheme": "contiguous",
    "seed": 0,
    "threads": None,
    "schema": "bounds-wide",
    "response": None,
    "add_intercepts": False,
    "penalize_intercept": False,
    "standardize": True,
    "overlap_floor": True,
    "out_dir": "ivlasso-out",
    "input": None,
    "method": "plr",
    "methods": "plr,acix,crm,ccrm,blu",
    "window": 60,
    "lags": 0,
    "fix_lambda": False,
    "dgp": 3,
    "T": "80",
    "reps": 100,
    "train_len": 250,
    "test_len": 21,
    "n_select": 10,
    "selection": "both",
    "index": None,
    "horizon": 1,
    "dm": None,
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    options: Dict[str, object] = field(default_factory=dict)

    def __getitem__(self, key):
        return self.options[key]

    @property
    def kernel(self) -> Kernel:
        k = self.options["kernel"]
        return k if isinstance(k, Kernel) else Kernel.parse(str(k)) if isinstance(k, str) else Kernel(*k)

    @property
    def lambda_grid(self) -> Optional[tuple]:
        g = self.options["lambda_grid"]
        if g is None:
            return None
        vals = tuple(float(v) for v in (g.split(",") if isinstance(g, str) else g))
        if any(b >= a for a, b in zip(vals, vals[1:])) or any(v < 0 for v in vals):
            raise ValueError("lambda grid must be nonnegative and strictly decreasing")
        return vals

    @property
    def threads(self) -> int:
        t = self.options["threads"]
        if t is None:
            t = os.environ.get("IVLASSO_THREADS") or os.cpu_count() or 1
        t = int(t)
        if t < 1:
            raise ValueError("threads must be >= 1")
        return t

    def estimator(self, method: Optional[str] = None) -> EstimatorConfig:
        lam = self.options["lambda"]
        return EstimatorConfig(
            method=method or str(self.options["method"]),
            kernel=self.kernel,
            gamma=float(self.options["gamma"]),
            lam=None if lam is None else float(lam),
            lambda_grid=self.lambda_grid,
            n_folds=int(self.options["folds"]),
            fold_scheme=str(self.options["fold_scheme"]),
            penalize_intercept=bool(self.options["penalize_intercept"]),
            standardize=bool(self.options["standardize"]),
        )

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        unknown = set(self.options) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown settings: {sorted(unknown)}")
        self.kernel
        self.lambda_grid
        return self

    def to_dict(self) -> dict:
        opts = dict(self.options)
        opts["kernel"] = list(self.kernel.as_tuple())
        # neither changes the artifacts
        opts.pop("threads", None)
        opts.pop("out_dir", None)
        return {"command": self.command, "options": opts}


# -- argument parsing -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = common.add_argument_group("shared settings")
    g.add_argument("--config", help="JSON file of settings (flags override it)")
    g.add_argument("--kernel", help="kernel a,b,c (default 5,1,1)")
    g.add_argument("--gamma", type=float)
    g.add_argument("--lambda", dest="lambda", type=float, help="fixed penalty; omit to cross-validate")
    g.add_argument("--lambda-grid", dest="lambda_grid", help="comma-separated decreasing grid")
    g.add_argument("--folds", type=int)
    g.add_argument("--fold-scheme", dest="fold_scheme", choices=["contiguous", "interleaved"])
    g.add_argument("--seed", type=int)
    g.add_argument("--threads", type=int)
    g.add_argument("--penalize-intercept", dest="penalize_intercept", action="store_true")
    g.add_argument("--no-standardize", dest="standardize", action="store_false")
    g.add_argument("--out-dir", dest="out_dir")
    data = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    d = data.add_argument_group("input data")
    d.add_argument("--input")
    d.add_argument("--schema", choices=SCHEMAS)
    d.add_argument("--response")
    d.add_argument("--add-intercepts", dest="add_intercepts", action="store_true")

    parser = argparse.ArgumentParser(prog="ivlasso", description="Penalized interval-valued regression.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common, data], help="fit one estimator", argument_default=argparse.SUPPRESS)
    p.add_argument("--method", choices=METHODS)
    p = sub.add_parser("path", parents=[common, data], help="emit the full penalty path", argument_default=argparse.SUPPRESS)
    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo tables", argument_default=argparse.SUPPRESS)
    p.add_argument("--dgp", type=int, choices=sorted(DGP_KINDS))
    p.add_argument("--T", dest="T", help="sample size(s), comma-separated")
    p.add_argument("--reps", type=int)
    p.add_argument("--methods")
    p = sub.add_parser("forecast", parents=[common, data], help="rolling one-step forecasts", argument_default=argparse.SUPPRESS)
    p.add_argument("--window", type=int)
    p.add_argument("--methods")
    p.add_argument("--lags", type=int, help="append this many response lags as regressors")
    p.add_argument("--fix-lambda", dest="fix_lambda", action="store_true")
    _floor_flags(p)
    p = sub.add_parser("track", parents=[common], help="interval index tracking", argument_default=argparse.SUPPRESS)
    p.add_argument("--input", help="ohlc CSV with index and constituents")
    p.add_argument("--index", help="asset name of the index (default: first asset)")
    p.add_argument("--train-len", dest="train_len", type=int)
    p.add_argument("--test-len", dest="test_len", type=int)
    p.add_argument("--n-select", dest="n_select", type=int)
    p.add_argument("--selection", choices=["interval-plr", "point-lasso", "both"])
    p = sub.add_parser("eval", parents=[common], help="criteria for a forecast file", argument_default=argparse.SUPPRESS)
    p.add_argument("--input", help="CSV with model,pred_L,pred_R,actual_L,actual_R (model optional)")
    p.add_argument("--horizon", type=int)
    p.add_argument("--dm", help="modelA,modelB for a Diebold-Mariano comparison")
    _floor_flags(p)
    return parser


def _floor_flags(p):
    p.add_argument("--overlap-floor", dest="overlap_floor", action="store_true")
    p.add_argument("--no-overlap-floor", dest="overlap_floor", action="store_false")


def resolve(argv: Optional[List[str]] = None) -> RunConfig:
    """Flags over config file over defaults."""
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    opts = dict(DEFAULTS)
    cfg_path = ns.pop("config", None)
    if cfg_path:
        with open(cfg_path) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        opts.update(loaded.get("options", loaded) if "command" in loaded else loaded)
    opts.update(ns)
    return RunConfig(command, opts).validate()


# -- artifacts ------------------------------------------------------------------------


class _Artifacts:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.hashes: Dict[str, str] = {}
        out_dir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str):
        data = text.encode()
        (self.out_dir / name).write_bytes(data)
        self.hashes[name] = hashlib.sha256(data).hexdigest()

    def json(self, name: str, obj):
        self.write(name, json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Kernel):
        return list(obj.as_tuple())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v) -> str:
    return "" if v is None else f"{float(v):.12g}"


def _load(cfg: RunConfig):
    if not cfg["input"]:
        raise ValueError(f"`{cfg.command}` needs --input")
    return ingest_csv(cfg["input"], str(cfg["schema"]), cfg["response"], bool(cfg["add_intercepts"]))


def _methods(cfg: RunConfig) -> List[str]:
    out = [m.strip() for m in str(cfg["methods"]).split(",") if m.strip()]
    for m in out:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    return out


# -- subcommands ------------------------------------------------------------------------


def _cmd_fit(cfg: RunConfig, art: _Artifacts):
    sample = _load(cfg)
    model = fit_model(sample, cfg.estimator())
    out = {"config": model.config.to_dict(), "columns": list(sample.column_names), "T": sample.T}
    if model.coefficients is not None:
        f = model.fit
        out.update(
            coefficients=dict(zip(sample.column_names, map(float, model.coefficients))),
            lam=f.lam,
            active_set=[sample.column_names[j] for j in f.active_set],
            standardized_coefficients=f.coefficients,
            objective=f.objective,
            kkt_violation=f.kkt_violation,
        )
        if model.cv is not None:
            out["cv"] = {"best_lambda": model.cv.best_lambda, "lambdas": model.cv.lambdas,
                         "cv_curve": model.cv.cv_curve, "fold_scheme": model.cv.fold_scheme}
        rows = [[n, _fmt(v)] for n, v in zip(sample.column_names, model.coefficients)]
        art.write("coefficients.csv", _csv(rows, ["column", "coefficient"]))
    else:
        bf = model.bounds_fit
        out["bounds_fit"] = bf.to_dict()
        first, second = ("center", "range") if bf.kind == "center-range" else ("lower", "upper")
        names = ["intercept"] + [sample.column_names[j] for j in bf.columns]
        rows = [[n, _fmt(a), _fmt(b)] for n, a, b in zip(
            names, [bf.first_intercept, *bf.first_coefficients], [bf.second_intercept, *bf.second_coefficients])]
        art.write("coefficients.csv", _csv(rows, ["column", first, second]))
        out["note"] = "coefficients refer to the standardized scale" if model.standardizer else ""
    art.json("fit.json", out)


def _cmd_path(cfg: RunConfig, art: _Artifacts):
    sample = _load(cfg)
    est = cfg.estimator("plr")
    work = sample
    std = None
    if est.standardize:
        from .data import Standardizer

        std = Standardizer.fit(sample, est.kernel, center=not est.penalize_intercept)
        work = std.transform(sample)
    gs = assemble_gram(work, est.kernel)
    w = adaptive_weights(min_dk_estimate(gs), est.gamma)
    path = ilars_path(gs, w, penalized_mask_for(work, est.penalize_intercept))
    rows = []
    for k, lam in enumerate(path.breakpoints):
        v = path.vertices[k] if std is None else std.unscale_coefficients(path.vertices[k])
        events = ";".join(f"{kind}:{sample.column_names[j]}" for kind, j in path.events[k])
        rows.append([k, _fmt(lam), events, len(path.active_sets[k]), *map(_fmt, v)])
    art.write("path.csv", _csv(rows, ["step", "lambda", "events", "n_active", *sample.column_names]))
    art.write("weights.csv", _csv([[n, _fmt(x)] for n, x in zip(sample.column_names, w)], ["column", "weight"]))


def _cmd_simulate(cfg: RunConfig, art: _Artifacts):
    methods = [m for m in _methods(cfg) if m in DK_METHODS] or ["plr", "acix"]
    sizes = [int(t) for t in str(cfg["T"]).split(",")]
    kind = DGP_KINDS[int(cfg["dgp"])]
    csv_parts, tables = [], []
    summary = {}
    for T in sizes:
        spec = DgpSpec(kind, T, seed=int(cfg["seed"]))
        ests = {m.upper(): cfg.estimator(m) for m in methods}
        reports = compare_estimators(spec, ests, int(cfg["reps"]), threads=cfg.threads)
        text = report_csv(reports)
        csv_parts.append(text if not csv_parts else text.split("\n", 1)[1])
        tables.append(report_table(reports, f"DGP {cfg['dgp']} ({kind}), T={T}"))
        summary[str(T)] = {
            name: {"n_failed": r.n_failed, "exact_zero_rate": r.exact_zero_rate,
                   "retained_rate": r.retained_rate, "median_error_norm": r.median_error_norm}
            for name, r in reports.items()
        }
        for name, r in reports.items():
            if r.n_failed:
                summary[str(T)][name]["failures"] = list(r.failures[:10])
    art.write("mc_report.csv", "".join(_prefix_T(p, t, i) for i, (p, t) in enumerate(zip(csv_parts, sizes))))
    art.write("mc_table.txt", "\n".join(tables))
    art.json("mc_summary.json", summary)


def _prefix_T(part: str, T: int, i: int) -> str:
    lines = part.strip("\n").split("\n")
    if i == 0:
        head, lines = lines[0], lines[1:]
        return "T," + head + "\n" + "".join(f"{T},{ln}\n" for ln in lines)
    return "".join(f"{T},{ln}\n" for ln in lines)


def _cmd_forecast(cfg: RunConfig, art: _Artifacts):
    sample = _load(cfg)
    if int(cfg["lags"]):
        sample = sample.with_response_lags(int(cfg["lags"]))
    window = int(cfg["window"])
    rows, reports = [], {}
    for m in _methods(cfg):
        spec = RollingSpec(window, cfg.estimator(m), fix_lambda=bool(cfg["fix_lambda"]))
        res = rolling_forecast(sample, spec, threads=cfg.threads)
        reports[(m.upper(), window)] = evaluate(res.pairs, cfg.kernel, bool(cfg["overlap_floor"]))
        for t, pr, ac, lam in zip(res.origins, res.pairs.predicted, res.pairs.actual, res.lambdas):
            date = sample.dates[t] if sample.dates else ""
            rows.append([m.upper(), window, int(t), date, *map(_fmt, pr), *map(_fmt, ac),
                         "" if np.isnan(lam) else _fmt(lam)])
    art.write("forecasts.csv", _csv(rows, ["model", "window", "row", "date", "pred_L", "pred_R",
                                           "actual_L", "actual_R", "lambda"]))
    art.write("criteria.csv", criteria_csv(reports))


def _cmd_track(cfg: RunConfig, art: _Artifacts):
    if not cfg["input"]:
        raise ValueError("`track` needs --input (ohlc CSV)")
    panel = read_ohlc(cfg["input"])
    idx = panel.assets.index(cfg["index"]) if cfg["index"] else 0
    others = [k for k in range(len(panel.assets)) if k != idx]
    closes = panel.close_returns[:, [idx] + others]
    methods = ["interval-plr", "point-lasso"] if cfg["selection"] == "both" else [str(cfg["selection"])]
    rows, summary = [], {}
    for method in methods:
        spec = TrackingSpec(int(cfg["train_len"]), int(cfg["test_len"]), int(cfg["n_select"]), method,
                            float(cfg["gamma"]), cfg.kernel)
        res = index_track(panel.intervals[:, others], panel.intervals[:, idx], closes, spec)
        summary[method] = {
            "selected": [panel.assets[others[j]] for j in res.selected],
            "weights": res.weights,
            "lambda": res.lam,
        }
        for part in ("train", "test"):
            port = res.train_portfolio if part == "train" else res.test_portfolio
            if port.size == 0:
                continue
            s, m_ = res.errors(part)
            summary[method][f"{part}_S"], summary[method][f"{part}_M"] = s, m_
            cs, cm = res.curves(part)
            rows += [[method, part, tau + 1, _fmt(None if np.isnan(a) else a), _fmt(b)]
                     for tau, (a, b) in enumerate(zip(cs, cm))]
    art.write("tracking.csv", _csv(rows, ["method", "sample", "tau", "S", "M"]))
    art.json("tracking_summary.json", summary)


def _cmd_eval(cfg: RunConfig, art: _Artifacts):
    if not cfg["input"]:
        raise ValueError("`eval` needs --input")
    with open(cfg["input"], newline="") as fh:
        rows = list(csv.DictReader(fh))
    need = ["pred_L", "pred_R", "actual_L", "actual_R"]
    if not rows or any(c not in rows[0] for c in need):
        raise ValueError(f"forecast file must have columns {need}")
    groups: Dict[tuple, list] = {}
    for i, r in enumerate(rows):
        try:
            vals = [float(r[c]) for c in need]
        except ValueError:
            raise ValueError(f"row {i + 2}: non-numeric forecast value") from None
        groups.setdefault((r.get("model", "model"), r.get("window", "")), []).append(vals)
    reports = {}
    for key, vals in groups.items():
        arr = np.array(vals)
        reports[key] = evaluate(ForecastPairSeries(arr[:, :2], arr[:, 2:]), cfg.kernel, bool(cfg["overlap_floor"]))
    art.write("criteria.csv", criteria_csv(reports))
    if cfg["dm"]:
        a, b = str(cfg["dm"]).split(",")
        out = {}
        for key in groups:
            if key[0] != a:
                continue
            other = (b, key[1])
            if other not in groups:
                raise ValueError(f"no forecasts for model {b!r} window {key[1]!r}")
            fa, fb = np.array(groups[key]), np.array(groups[other])
            mid = lambda f: 0.5 * (f[:, 0] + f[:, 1] - f[:, 2] - f[:, 3])  # noqa: E731
            stat, pval = dm_test(mid(fa), mid(fb), int(cfg["horizon"]))
            out[str(key[1])] = {"statistic": stat, "p_value": pval, "loss": "squared midpoint error"}
        art.json("dm_test.json", {"models": [a, b], "results": out})


_COMMANDS = {
    "fit": _cmd_fit,
    "path": _cmd_path,
    "simulate": _cmd_simulate,
    "forecast": _cmd_forecast,
    "track": _cmd_track,
    "eval": _cmd_eval,
}


def run(cfg: RunConfig) -> dict:
    """Execute ``cfg`` and return the manifest (also written to disk)."""
    art = _Artifacts(Path(str(cfg["out_dir"])))
    _COMMANDS[cfg.command](cfg, art)
    manifest = {
        "version": __version__,
        **cfg.to_dict(),
        "seed": cfg["seed"],
        "inputs": {str(cfg["input"]): _file_hash(cfg["input"])} if cfg["input"] else {},
        "artifacts": dict(sorted(art.hashes.items())),
    }
    art.json("manifest.json", manifest)
    return manifest


def main(argv: Optional[List[str]] = None) -> int:
    try:
        cfg = resolve(argv)
        run(cfg)
    except SystemExit:
        raise
    except Exception as err:  # reported as machine-readable JSON
        print(json.dumps({"error": type(err).__name__, "message": str(err)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
