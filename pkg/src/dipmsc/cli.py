"""Command-line interface.

Subcommands
-----------
cluster   cluster a tensor with a fixed K or with dipm-SC, write a JSON report
metrics   burstiness/memory, popularity, tail slopes and KS tests for a report
generate  write a planted-cluster dataset plus a truth sidecar
score     ARI/NMI of a report against truth labels

Validation problems exit with status 1, runtime failures with status 2; in
both cases a JSON object describing the error is written to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import metrics as M
from .distance import shift
from .driver import DipmConfig, dipm_sc
from .errors import DipmError, ValidationError
from .io import FORMATS, load_tensor
from .mksc import ClusteringConfig, m_ksc
from .report import ClusteringReport, ClusterSummary
from .synth import FAMILIES, GeneratorSpec, write_dataset
from .tensor import SeriesTensor, smooth_tensor


class UsageError(ValidationError):
    pass


@dataclass
class ClusterParams:
    mode: str = "dipm"
    k: int | None = None
    q_max: int = 24
    smooth_window: int = 24
    alpha: float = 0.05
    split_threshold: float = 0.01
    split_threshold_kind: str = "ratio"
    bootstrap: int = 1000
    local_runs: int = 10
    max_iters: int = 100
    max_clusters: int | None = None
    seed: int = 0
    lag: int = M.DEFAULT_LAG
    metrics_dim: int = 0

    def validate(self, tensor: SeriesTensor) -> None:
        if self.mode not in ("fixed-k", "dipm"):
            raise UsageError(f"--mode must be fixed-k or dipm, got {self.mode!r}")
        if self.mode == "fixed-k" and self.k is None:
            raise UsageError("--k is required with --mode fixed-k")
        if self.smooth_window < 0:
            raise UsageError("--smooth-window must be >= 0")
        if not 0 <= self.metrics_dim < tensor.n_dims:
            raise UsageError(f"--metrics-dim must lie in [0, {tensor.n_dims - 1}]")
        if self.lag < 1:
            raise UsageError("--lag must be >= 1")


def run_clustering(tensor: SeriesTensor, params: ClusterParams, n_jobs: int = 1, timing: bool = False):
    """Cluster ``tensor`` as the ``cluster`` subcommand does.

    The series are smoothed (unless the window is 0) before any distance is
    computed; burstiness, memory and popularity are taken from the raw
    series. Returns ``(report, smoothed_tensor, assignment)``.
    """
    params.validate(tensor)
    t0 = time.perf_counter()
    work = smooth_tensor(tensor, params.smooth_window)
    history, cap_reached, scores = [], False, None
    if params.mode == "fixed-k":
        cfg = ClusteringConfig(K=params.k, q_max=params.q_max, max_iters=params.max_iters,
                               seed=params.seed, n_jobs=n_jobs)
        res = m_ksc(work, cfg)
    else:
        cfg = DipmConfig(alpha=params.alpha, v=params.split_threshold, q_max=params.q_max, b=params.bootstrap,
                         local_runs=params.local_runs, seed=params.seed, max_clusters=params.max_clusters,
                         threshold_kind=params.split_threshold_kind, max_iters=params.max_iters, n_jobs=n_jobs)
        out = dipm_sc(work, cfg)
        res, cap_reached, scores = out.clustering, out.cap_reached, out.final_scores
        history = [
            {"iteration": h.iteration, "cluster": h.cluster, "size": h.size,
             "scores": [float(s) for s in h.scores], "new_K": h.new_K}
            for h in out.history
        ]
    t_cluster = time.perf_counter() - t0

    a = res.assignment
    bm = M.cluster_burstiness_memory(tensor, a, params.metrics_dim, params.lag)
    pop = M.cumulative_popularity(tensor, a, params.metrics_dim)
    ids = tensor.entity_ids
    clusters = []
    for k in range(res.K):
        idx = a.members(k)
        clusters.append(ClusterSummary(
            cluster=k,
            centroid=res.centroids[k].tolist(),
            members=[ids[i] for i in idx],
            q=[int(a.q_of[i]) for i in idx],
            alpha=[[float(v) for v in a.alpha_of[i]] for i in idx],
            burstiness=bm[k]["burstiness"],
            memory=M.clamp(bm[k]["memory"]),
            popularity=pop[k],
            splitter_score=None if scores is None else float(scores[k]),
        ))
    report = ClusteringReport(
        config={"mode": params.mode, **{k: v for k, v in asdict(params).items() if k != "mode"}},
        K_final=res.K,
        clusters=clusters,
        objective=res.objective,
        iterations=res.iterations,
        converged=res.converged,
        split_history=history,
        cap_reached=cap_reached,
        dimensions=list(tensor.dimension_names),
        entities=list(tensor.entity_ids),
        timing={"cluster_seconds": t_cluster, "total_seconds": time.perf_counter() - t0} if timing else None,
    )
    return report, work, a


def write_plots(report: ClusteringReport, work: SeriesTensor, assignment, out_dir) -> None:
    """Centroid rows and aligned members (``alpha * x_q``) as CSV series."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ids = work.entity_ids
    for s in report.clusters:
        k = s.cluster
        idx = assignment.members(k)
        aligned = {i: shift(work.values[i], int(assignment.q_of[i])) * assignment.alpha_of[i][:, None] for i in idx}
        for d, row in enumerate(s.centroid):
            with open(out_dir / f"cluster_{k}_dim_{d}_centroid.csv", "w", encoding="utf-8") as fh:
                fh.write("t,value\n")
                for t, v in enumerate(row):
                    fh.write(f"{t},{v!r}\n")
            with open(out_dir / f"cluster_{k}_dim_{d}_members.csv", "w", encoding="utf-8") as fh:
                fh.write("t,entity,value\n")
                for i in idx:
                    for t, v in enumerate(aligned[i][d]):
                        fh.write(f"{t},{ids[i]},{float(v)!r}\n")


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_cluster(args) -> int:
    tensor = load_tensor(args.input, args.format)
    params = ClusterParams(
        mode=args.mode, k=args.k, q_max=args.q_max, smooth_window=args.smooth_window, alpha=args.alpha,
        split_threshold=args.split_threshold, split_threshold_kind=args.split_threshold_kind,
        bootstrap=args.bootstrap, local_runs=args.local_runs, max_iters=args.max_iters,
        max_clusters=args.max_clusters, seed=args.seed, lag=args.lag, metrics_dim=args.metrics_dim,
    )
    report, work, assignment = run_clustering(tensor, params, n_jobs=args.threads, timing=args.timing)
    _write(report.to_json(), args.output)
    if args.plots_dir:
        write_plots(report, work, assignment, args.plots_dir)
    return 0


def compute_metrics(tensor: SeriesTensor, report: ClusteringReport, dim: int = 0, lag: int = M.DEFAULT_LAG,
                    threshold="mean", ks_pairs=(), tail_horizon: int = 24) -> dict:
    if not 0 <= dim < tensor.n_dims:
        raise UsageError(f"--dim must lie in [0, {tensor.n_dims - 1}]")
    labels = np.asarray(report.labels(tensor.entity_ids), dtype=np.int64)
    bm = M.cluster_burstiness_memory(tensor, labels, dim, lag, threshold)
    for row in bm:
        row["memory_raw"] = row["memory"]
        row["memory"] = M.clamp(row["memory"])
    pop = M.cumulative_popularity(tensor, labels, dim)
    ks = []
    for a, b in ks_pairs:
        a, b = int(a), int(b)
        if not (0 <= a < len(pop) and 0 <= b < len(pop)):
            raise UsageError(f"--ks clusters must lie in [0, {len(pop) - 1}], got {a} {b}")
        r = M.ks_two_sample(pop[a], pop[b])
        ks.append({"a": a, "b": b, "statistic": r.statistic, "p_value": r.p_value})
    return {
        "schema": 1,
        "dimension": tensor.dimension_names[dim],
        "lag": lag,
        "threshold": threshold,
        "burstiness_memory": bm,
        "popularity": [{"cluster": k, "totals": v} for k, v in enumerate(pop)],
        "tail_slopes": M.cluster_tail_slopes(tensor, labels, dim, tail_horizon),
        "ks": ks,
    }


def cmd_metrics(args) -> int:
    tensor = load_tensor(args.input, args.format)
    with open(args.report, encoding="utf-8") as fh:
        report = ClusteringReport.from_json(fh.read())
    threshold = "mean" if args.threshold == "mean" else float(args.threshold)
    out = compute_metrics(tensor, report, args.dim, args.lag, threshold, args.ks or (), args.tail_horizon)
    _write(json.dumps(out, indent=2, sort_keys=True) + "\n", args.output)
    return 0


def cmd_generate(args) -> int:
    spec = GeneratorSpec(
        K_true=args.k_true, N_per=args.n_per, D=args.dims, T=args.length, shape_family=args.family,
        shift_jitter=args.shift_jitter, scale_jitter=args.scale_jitter, noise_sigma=args.noise,
        seed=args.seed, pulse_width=args.pulse_width, independent_shifts=args.independent_shifts,
    )
    write_dataset(spec, args.output, args.format, args.truth)
    return 0


def cmd_score(args) -> int:
    with open(args.report, encoding="utf-8") as fh:
        report = ClusteringReport.from_json(fh.read())
    with open(args.truth, encoding="utf-8") as fh:
        truth = json.load(fh)["truth"]
    if len(report.entities) != len(truth):
        raise UsageError(f"report has {len(report.entities)} entities but truth has {len(truth)}")
    ari, nmi = M.partition_scores(report.labels(report.entities), truth)
    _write(json.dumps({"ari": ari, "nmi": nmi, "K_final": report.K_final}, indent=2, sort_keys=True) + "\n",
           args.output)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dipmsc", description="Shape-based clustering of multivariate activity series.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("cluster", help="cluster a tensor and write a JSON report")
    c.add_argument("--input", required=True)
    c.add_argument("--format", choices=FORMATS)
    c.add_argument("--mode", choices=["fixed-k", "dipm"], default="dipm")
    c.add_argument("--k", type=int)
    c.add_argument("--q-max", type=int, default=24)
    c.add_argument("--smooth-window", type=int, default=24, help="Gaussian window; 0 disables smoothing")
    c.add_argument("--alpha", type=float, default=0.05)
    c.add_argument("--split-threshold", type=float, default=0.01)
    c.add_argument("--split-threshold-kind", choices=["ratio", "count"], default="ratio")
    c.add_argument("--bootstrap", type=int, default=1000)
    c.add_argument("--local-runs", type=int, default=10)
    c.add_argument("--max-iters", type=int, default=100)
    c.add_argument("--max-clusters", type=int)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--lag", type=int, default=M.DEFAULT_LAG)
    c.add_argument("--metrics-dim", type=int, default=0)
    c.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    c.add_argument("--timing", action="store_true", help="add wall-clock timings (breaks byte-identity)")
    c.add_argument("--output", default="-")
    c.add_argument("--plots-dir")
    c.set_defaults(func=cmd_cluster)

    m = sub.add_parser("metrics", help="temporal metrics for a clustering report")
    m.add_argument("--input", required=True)
    m.add_argument("--format", choices=FORMATS)
    m.add_argument("--report", required=True)
    m.add_argument("--dim", type=int, default=0)
    m.add_argument("--lag", type=int, default=M.DEFAULT_LAG)
    m.add_argument("--threshold", default="mean")
    m.add_argument("--ks", nargs=2, action="append", metavar=("A", "B"))
    m.add_argument("--tail-horizon", type=int, default=24)
    m.add_argument("--output", default="-")
    m.set_defaults(func=cmd_metrics)

    g = sub.add_parser("generate", help="write a planted-cluster dataset")
    g.add_argument("--k-true", type=int, default=3)
    g.add_argument("--n-per", type=int, default=40)
    g.add_argument("--dims", type=int, default=2)
    g.add_argument("--length", type=int, default=48)
    g.add_argument("--family", choices=FAMILIES, default="gaussian-pulse")
    g.add_argument("--shift-jitter", type=int, default=2)
    g.add_argument("--scale-jitter", type=float, default=3.0)
    g.add_argument("--noise", type=float, default=0.05)
    g.add_argument("--pulse-width", type=int, default=8)
    g.add_argument("--independent-shifts", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=FORMATS)
    g.add_argument("--output", required=True)
    g.add_argument("--truth", help="truth sidecar path (default: <output>.truth.json)")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("score", help="ARI/NMI of a report against a truth sidecar")
    s.add_argument("--report", required=True)
    s.add_argument("--truth", required=True)
    s.add_argument("--output", default="-")
    s.set_defaults(func=cmd_score)
    return p


def _fail(exc, code) -> int:
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    entities = getattr(exc, "entities", None)
    if entities:
        doc["entities"] = list(entities)
    sys.stderr.write(json.dumps(doc) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        return _fail(exc, 1)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        return _fail(exc, 1)
    except (DipmError, OSError, ArithmeticError) as exc:
        return _fail(exc, 2)


if __name__ == "__main__":
    sys.exit(main())
