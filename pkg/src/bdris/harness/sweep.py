"""Seeded Monte-Carlo sweep engine writing one CSV row per
(grid point, architecture, realization) followed by mean / standard-error rows.

Random streams: realization ``r`` at grid point ``p`` draws its channels from
numpy's PCG64 generator seeded with ``SeedSequence(entropy=seed,
spawn_key=(r, p))``. A realization therefore yields the same channels whether
it runs alone, in a batch or on another worker.
"""

import csv
import io
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .. import arch
from ..beamform import fp_wsr_precoder, rates, stage1, utilities
from ..chanopt import gen_channels, sum_gain, upper_bound
from ..io import format_float

log = logging.getLogger(__name__)

ID_COLUMNS = [
    "experiment", "row_type", "point", "n", "l", "k",
    "arch_id", "arch", "kind", "g", "q", "q_g", "complexity", "realization",
]
TIMING_COLUMNS = [
    "row_type", "point", "n", "l", "k", "arch_id", "arch", "realization", "method", "stage", "seconds",
]


def realization_rng(seed, realization, point):
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(realization, point)))


def metric_columns(config):
    cols = []
    if config.experiment == "complexity":
        return cols
    if "gain" in config.metrics:
        cols.append("ub")
        cols += [f"gain_{m}" for m in config.methods]
    if "wsr" in config.metrics:
        cols += [f"wsr_{m}" for m in config.methods]
    return cols


def _grid(config):
    """[(point index, (n, l, k), [(arch_id, spec), ...])]"""
    out = []
    for p, (n, l, k) in enumerate(config.points()):  # noqa: E741
        specs = []
        for arch_id, tpl in enumerate(config.archs):
            params = {key: tpl[key] for key in ("g", "q", "q_g") if key in tpl}
            if tpl.get("n", n) != n:
                continue
            try:
                specs.append((arch_id, arch.make_arch(tpl["kind"], n, **params)))
            except (arch.InvalidGrouping, arch.InvalidStemCount):
                log.info("skipping %s at N=%d: not realizable", tpl, n)
        out.append((p, (n, l, k), specs))
    return out


def run_realization(config, r):
    """Metrics and timings of realization ``r`` over the whole grid.

    Returns ``(values, timings)`` where ``values[(point, arch_id)]`` maps metric
    column to value.
    """
    ph = config.physics
    values, timings = {}, []
    for p, (n, l, k), specs in _grid(config):  # noqa: E741
        ch = gen_channels(n, l, k, realization_rng(config.seed, r, p), ph.noise_power, **ph.pathloss)
        ub = upper_bound(ch).ub_value
        for arch_id, spec in specs:
            row = {}
            if "gain" in config.metrics:
                row["ub"] = ub
            for method in config.methods:
                t0 = time.perf_counter()
                qn_opts = config.qn if method == "sosup_qn" else {}
                _, theta = stage1(ch, spec, ph.z0, method, **qn_opts)
                t1 = time.perf_counter()
                timings.append((p, arch_id, method, "stage1", t1 - t0))
                if "gain" in config.metrics:
                    row[f"gain_{method}"] = sum_gain(ch, theta)
                if "wsr" in config.metrics:
                    t0 = time.perf_counter()
                    prec = fp_wsr_precoder(ch, theta, ph.p_t, ph.weights, **config.fp)
                    t1 = time.perf_counter()
                    timings.append((p, arch_id, method, "stage2", t1 - t0))
                    rep = utilities(rates(ch, theta, prec), ph.weights, prec, ph.eta, ph.p_cir)
                    row[f"wsr_{method}"] = rep.wsr
            values[(p, arch_id)] = row
    return values, timings


def _run_one(args):
    config, r = args
    return run_realization(config, r)


def _id_fields(config, p, dims, arch_id, spec, row_type, realization):
    n, l, k = dims  # noqa: E741
    return {
        "experiment": config.experiment,
        "row_type": row_type,
        "point": p,
        "n": n,
        "l": l,
        "k": k,
        "arch_id": arch_id,
        "arch": spec.label(),
        "kind": spec.kind.value,
        "g": "" if spec.g is None else spec.g,
        "q": "" if spec.q is None else spec.q,
        "q_g": "" if spec.q_g is None else spec.q_g,
        "complexity": arch.circuit_complexity(spec),
        "realization": realization,
    }


def _fmt(v):
    if isinstance(v, float):
        return format_float(v)
    return v


def mean_and_stderr(values):
    vals = np.asarray(values, dtype=float)
    mean = math.fsum(vals) / vals.size
    if vals.size < 2:
        return mean, float("nan")
    var = math.fsum((vals - mean) ** 2) / (vals.size - 1)
    return mean, math.sqrt(var / vals.size)


def run_sweep(config, stream=None):
    """Run ``config``, write its CSV and return a summary dict.

    A one-line-per-group summary goes to ``stream`` when given.
    """
    cols = ID_COLUMNS + metric_columns(config)
    grid = _grid(config)
    if config.experiment == "complexity":
        results, timings = None, None
    elif config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outs = list(pool.map(_run_one, [(config, r) for r in range(config.realizations)]))
        results = [o[0] for o in outs]
        timings = [o[1] for o in outs]
    else:
        outs = [run_realization(config, r) for r in range(config.realizations)]
        results = [o[0] for o in outs]
        timings = [o[1] for o in outs]

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    summary = []
    metrics = metric_columns(config)
    for p, dims, specs in grid:
        for arch_id, spec in specs:
            if results is None:
                writer.writerow(_id_fields(config, p, dims, arch_id, spec, "value", ""))
                summary.append({"point": p, "dims": dims, "arch": spec.label(),
                                "complexity": arch.circuit_complexity(spec)})
                continue
            per = [res[(p, arch_id)] for res in results]
            for r, row in enumerate(per):
                fields = _id_fields(config, p, dims, arch_id, spec, "realization", r)
                fields.update({c: _fmt(row[c]) for c in metrics})
                writer.writerow(fields)
            agg = {c: mean_and_stderr([row[c] for row in per]) for c in metrics}
            for idx, name in ((0, "mean"), (1, "stderr")):
                fields = _id_fields(config, p, dims, arch_id, spec, name, "")
                fields.update({c: _fmt(agg[c][idx]) for c in metrics})
                writer.writerow(fields)
            summary.append({"point": p, "dims": dims, "arch": spec.label(),
                            "mean": {c: agg[c][0] for c in metrics},
                            "stderr": {c: agg[c][1] for c in metrics}})

    out_dir = os.path.dirname(os.path.abspath(config.output))
    os.makedirs(out_dir, exist_ok=True)
    with open(config.output, "w", newline="") as fh:
        fh.write(buf.getvalue())

    timing_path = None
    if config.experiment == "timing":
        timing_path = _write_timing(config, grid, timings, summary)

    if stream is not None:
        _print_summary(config, summary, stream)
    return {"output": config.output, "timing_output": timing_path, "groups": summary}


def _write_timing(config, grid, timings, summary):
    root, _ = os.path.splitext(config.output)
    path = root + ".timing.csv"
    labels = {(p, a): (dims, spec) for p, dims, specs in grid for a, spec in specs}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TIMING_COLUMNS)
        collected = {}
        for r, tlist in enumerate(timings):
            for p, a, method, stage, sec in tlist:
                dims, spec = labels[(p, a)]
                writer.writerow(["realization", p, *dims, a, spec.label(), r, method, stage, format_float(sec)])
                collected.setdefault((p, a, method, stage), []).append(sec)
        for (p, a, method, stage), secs in collected.items():
            dims, spec = labels[(p, a)]
            med = float(np.median(secs))
            writer.writerow(["median", p, *dims, a, spec.label(), "", method, stage, format_float(med)])
            for g in summary:
                if g["point"] == p and g["arch"] == spec.label():
                    g.setdefault("median_seconds", {})[f"{method}/{stage}"] = med
    return path


def complexity_slopes(summary):
    """Least-squares slope of log(complexity) versus log(N) per architecture template."""
    by_arch = {}
    for g in summary:
        key = ",".join(p for p in g["arch"].split(",") if not p.startswith("N="))
        by_arch.setdefault(key, []).append((g["dims"][0], g["complexity"]))
    slopes = {}
    for key, pts in by_arch.items():
        if len(pts) < 2:
            continue
        x = np.log([p[0] for p in pts])
        y = np.log([p[1] for p in pts])
        slopes[key] = float(np.polyfit(x, y, 1)[0])
    return slopes


def _print_summary(config, summary, stream):
    if config.experiment == "complexity":
        for g in summary:
            print(f"{g['arch']}\t{g['complexity']}", file=stream)
        for key, slope in complexity_slopes(summary).items():
            print(f"slope[{key}] = {slope:.3f}", file=stream)
        return
    for g in summary:
        means = " ".join(f"{c}={v:.6g}" for c, v in g["mean"].items())
        n, l, k = g["dims"]  # noqa: E741
        line = f"N={n} L={l} K={k} {g['arch']}: {means}"
        if "median_seconds" in g:
            line += " | median s: " + " ".join(f"{m}={s:.4g}" for m, s in g["median_seconds"].items())
        print(line, file=stream)
