"""Command-line front end.

    bayes-regress {estimate,consistency,risk,compare} --config PATH [--workers N]

Writes ``<command>.csv`` and ``<command>.json`` (metadata) into the
configured ``output_dir``.  Exit status: 0 on success, 2 on an invalid
config or input file, 3 when the experiment itself fails.  Errors are
reported on stderr as a single JSON object.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import __version__
from .conjugate import stats_from_data
from .config import COMMANDS, ExperimentConfig, check_usage, load_config, read_dataset
from .errors import BayesRegressError, ConfigError, DomainError, ExperimentError, UsageError
from .kernels import BACKEND
from .risk import Estimator, bayes_risk, compare_estimators, consistency_paths

HEADERS = {
    "estimate": ["x1", "estimator", "value"],
    "risk": ["n", "loss_k", "estimator", "estimate", "mc_se", "replications", "trimmed"],
    "consistency": ["replication", "n", "x1", "abs_deviation"],
    "compare": ["n", "loss_k", "estimator", "estimate", "mc_se", "replications", "trimmed", "paired_diff", "paired_se"],
}

EXIT_OK, EXIT_CONFIG, EXIT_EXPERIMENT = 0, 2, 3


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _run_estimate(cfg: ExperimentConfig, hyper, workers):
    data = read_dataset(cfg.data)
    try:
        hyper.model().check_data(data)
    except DomainError as exc:
        raise ConfigError("data", str(exc)) from None
    rows, fallbacks = [], {}
    for est_id in cfg.estimator:
        est = Estimator(est_id, hyper, cfg.grid_size, cfg.nw_config())
        if data.n < est.min_n():
            raise ConfigError("data", f"{est_id} needs at least {est.min_n()} observation(s)")
        values, failed = est.curve(data, cfg.x1_eval, theta=None)
        fallbacks[est_id] = int(failed.sum())
        rows.extend((x, est_id, float(v)) for x, v in zip(cfg.x1_eval, values))
    extra = {"n": data.n, "fallbacks": fallbacks}
    if "bayes-closed" in {e.partition(":")[0] for e in cfg.estimator}:
        extra["sufficient_stats"] = {
            k: v for k, v in vars(stats_from_data(hyper, data)).items()
        }
    return rows, extra


def _run_risk(cfg, hyper, workers):
    curve = bayes_risk(
        hyper, cfg.estimator, cfg.n_schedule, cfg.replications, cfg.loss_k, tuple(cfg.trim),
        cfg.seed, cfg.grid_size, cfg.nw_config(), workers,
    )
    rows = [(r.n, r.loss_k, r.estimator, r.estimate, r.mc_se, r.replications, r.trimmed) for r in curve.rows]
    return rows, {"fallbacks": curve.fallbacks}


def _run_compare(cfg, hyper, workers):
    rows, fallbacks, violations = [], {}, []
    for n in cfg.n_schedule:
        table = compare_estimators(
            hyper, cfg.estimator, n, cfg.replications, cfg.loss_k, cfg.seed, tuple(cfg.trim),
            cfg.grid_size, cfg.nw_config(), workers,
        )
        rows.extend(
            (r.n, r.loss_k, r.estimator, r.estimate, r.mc_se, r.replications, r.trimmed, r.paired_diff, r.paired_se)
            for r in table.rows
        )
        fallbacks[str(n)] = table.fallbacks
        violations.extend({"n": n, "estimator": e, "loss_k": k} for e, k in table.violations)
    return rows, {"reference": cfg.estimator[0], "fallbacks": fallbacks, "violations": violations}


def _run_consistency(cfg, hyper, workers):
    report = consistency_paths(
        hyper, cfg.estimator[0], cfg.n_schedule, cfg.replications, cfg.x1_eval, cfg.seed,
        cfg.grid_size, cfg.nw_config(), workers,
    )
    rows = []
    for r in range(report.replications):
        for j, n in enumerate(report.n_schedule):
            for p, x in enumerate(report.x1_eval):
                rows.append((r, n, x, float(report.deviations[r, j, p])))
    q = report.quantiles()
    summary = [
        {"n": n, "q10_max_dev": float(q[0, j]), "median_max_dev": float(q[1, j]), "q90_max_dev": float(q[2, j])}
        for j, n in enumerate(report.n_schedule)
    ]
    return rows, {"fallbacks": report.fallbacks, "summary": summary}


RUNNERS = {"estimate": _run_estimate, "risk": _run_risk, "compare": _run_compare, "consistency": _run_consistency}


def run(command: str, config_path, workers: int | None = None) -> int:
    """Execute one command; returns the process exit status."""
    try:
        cfg = load_config(config_path, command)
        hyper = check_usage(cfg)
        try:
            rows, extra = RUNNERS[cfg.command](cfg, hyper, workers)
        except (UsageError, DomainError) as exc:
            raise ConfigError(cfg.command, str(exc)) from None
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{cfg.command}.csv"
        csv_path.write_bytes(_csv_text(HEADERS[cfg.command], rows).encode("utf-8"))
        meta = {
            "artifact_version": __version__,
            "kernel_backend": BACKEND,
            "seed": cfg.seed,
            "config": cfg.resolved(),
            "csv": csv_path.name,
            **extra,
        }
        (out / f"{cfg.command}.json").write_bytes((json.dumps(meta, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    except ConfigError as exc:
        _report("config", exc.message, exc.field)
        return EXIT_CONFIG
    except ExperimentError as exc:
        _report("experiment", str(exc))
        return EXIT_EXPERIMENT
    except BayesRegressError as exc:
        _report("experiment", str(exc))
        return EXIT_EXPERIMENT
    return EXIT_OK


def _report(kind, message, field=None):
    doc = {"error": kind, "message": message}
    if field is not None:
        doc["field"] = field
    print(json.dumps(doc), file=sys.stderr)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bayes-regress", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="flat JSON config, or metadata JSON of a previous run")
    parser.add_argument("--workers", type=int, default=None, help="worker threads (capped by BAYES_REGRESS_THREADS)")
    args = parser.parse_args(argv)
    return run(args.command, args.config, args.workers)


if __name__ == "__main__":
    sys.exit(main())
