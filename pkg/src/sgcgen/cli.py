"""Command-line front end: ``sgcgen {generate,detect,eval,phase-diagram,rank}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .graph import (EmptyGraphError, GraphError, ParseError, format_edge_list,
                    format_label_file, largest_connected_component, parse_label_file,
                    read_edge_list, resolve_labels)
from .lanczos import ConvergenceError
from .metrics import HIGHER_BETTER, accuracy, average_rank, evaluate
from .sbm import Partition, PartitionError, SbmParams, ValidationError, generate_sbm, planted_labels
from .selection import METHOD_NAMES, Mismatch, SelectionConfig, select
from .spectral import sgc_detect

log = logging.getLogger("sgcgen")

WORKERS_ENV = "SGCGEN_WORKERS"
MAX_RETRIES = 5


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_csv(path: str | None, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    _write_text(path, buf.getvalue())


def parse_floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive stop) or a comma-separated list."""
    if ":" in text:
        start, stop, step = (float(t) for t in text.split(":"))
        if step <= 0:
            raise CliError("E_INPUT", f"grid step must be positive: {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(count)]
    return parse_floats(text)


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0] >> 1)


# --- generate ------------------------------------------------------------------

def cmd_generate(args) -> None:
    try:
        if args.params:
            params = SbmParams.from_json(Path(args.params).read_text())
        else:
            if not (args.sizes and args.probs):
                raise CliError("E_INPUT", "give --params or both --sizes and --probs")
            sizes = [int(s) for s in args.sizes.split(",")]
            P = np.array(parse_floats(args.probs))
            if P.size != len(sizes) ** 2:
                raise ValidationError(f"--probs needs {len(sizes) ** 2} row-major entries")
            params = SbmParams(tuple(sizes), P.reshape(len(sizes), len(sizes)))
    except (ValueError, KeyError) as exc:
        raise CliError("E_VALIDATION", str(exc)) from exc
    g, part = generate_sbm(params, args.seed)
    header = f"sgcgen generate seed={args.seed} params={params.to_json()}"
    _write_text(args.output, format_edge_list(g, header=header))
    if args.labels:
        Path(args.labels).write_text(format_label_file(g.original_ids, part.labels, header=header))


# --- detect --------------------------------------------------------------------

def cmd_detect(args) -> None:
    g0 = read_edge_list(args.input)
    g, kept = largest_connected_component(g0)
    cfg = SelectionConfig(method=METHOD_NAMES[args.method], mismatch=Mismatch(args.mismatch),
                          alpha=args.alpha, k_max=args.kmax, seed=args.seed)
    if cfg.k_max > g.n:
        raise CliError("E_INPUT", f"--kmax {cfg.k_max} exceeds the {g.n} nodes of the largest component")
    report = select(g, cfg)
    extra = {"lcc": {"n_input": g0.n, "m_input": g0.m, "n": g.n, "m": g.m,
                     "dropped_nodes": g0.n - g.n}}
    doc = report.to_dict(extra)
    doc["nodes"] = g.original_ids.tolist()
    _write_text(args.output, json.dumps(doc, indent=2) + "\n")
    if args.partition_output:
        Path(args.partition_output).write_text(
            format_label_file(g.original_ids, report.partition.labels,
                              header=f"sgcgen detect seed={args.seed} k_star={report.k_star}"))


# --- eval ----------------------------------------------------------------------

def cmd_eval(args) -> None:
    g0 = read_edge_list(args.input)
    g, _ = largest_connected_component(g0)
    # labels of nodes outside the largest component are not an error
    outside = set(int(i) for i in g0.original_ids) - set(int(i) for i in g.original_ids)
    try:
        pred = _read_partition_lcc(g, args.predicted, outside)
        truth = _read_partition_lcc(g, args.labels, outside) if args.labels else None
    except GraphError as exc:
        raise CliError("E_MISMATCH", str(exc)) from exc
    mv = evaluate(g, pred, truth)
    dataset = args.dataset or Path(args.input).stem
    rows = [[dataset, args.method_name, name, value] for name, value in mv.items()]
    _write_csv(args.output, ["dataset", "method", "metric", "value"], rows)


def _read_partition_lcc(g, path, outside) -> Partition:
    table = parse_label_file(Path(path).read_text())
    known = set(int(i) for i in g.original_ids) | outside
    unknown = set(table) - known
    if unknown:
        raise CliError("E_MISMATCH", f"{path}: {len(unknown)} labeled nodes are not in the graph")
    return Partition.from_any_labels(g, resolve_labels(g, table))


# --- phase diagram -------------------------------------------------------------

def phase_cell(p1: float, q: float, p2: float, sizes: tuple[int, ...], seeds: int,
               base_seed: int, cell: int) -> dict:
    """Run SGC with K=2 on ``seeds`` SBM draws for one (p1, q) grid cell."""
    P = np.array([[p1, q], [q, p2]])
    params = SbmParams(sizes, P)
    truth = planted_labels(sizes)
    accs, thetas = [], []
    for rep in range(seeds):
        for attempt in range(MAX_RETRIES + 1):
            g, _ = generate_sbm(params, derive_seed(base_seed, cell, rep, attempt))
            if g.is_connected():
                break
        else:
            return {"p1": p1, "q": q, "status": "failed", "seeds_ok": rep}
        part, basis = sgc_detect(g, 2, seed=derive_seed(base_seed, cell, rep, 99))
        accs.append(accuracy(part, truth))
        thetas.append(basis.theta)
    return {"p1": p1, "q": q, "status": "ok", "seeds_ok": seeds,
            "accuracy": float(np.mean(accs)), "theta": float(np.mean(thetas))}


def phase_diagram(p1_grid, q_grid, p2, sizes, seeds, base_seed, workers=None) -> list[dict]:
    jobs = [(p1, q, p2, tuple(sizes), seeds, base_seed, i * len(q_grid) + j)
            for i, p1 in enumerate(p1_grid) for j, q in enumerate(q_grid)]
    workers = workers or int(os.environ.get(WORKERS_ENV, os.cpu_count() or 1))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(phase_cell, *zip(*jobs)))
    else:
        results = [phase_cell(*job) for job in jobs]
    for r in results:
        r["q_threshold"] = math.sqrt(r["p1"] * p2)
    return results


def cmd_phase_diagram(args) -> None:
    p1_grid = parse_grid(args.grid_p1)
    q_grid = parse_grid(args.grid_q)
    if not p1_grid or not q_grid:
        raise CliError("E_INPUT", "empty grid")
    sizes = [int(s) for s in args.sizes.split(",")]
    if len(sizes) != 2:
        raise CliError("E_INPUT", "--sizes must give two community sizes")
    try:
        results = phase_diagram(p1_grid, q_grid, args.p2, sizes, args.seeds_per_cell, args.seed)
    except ValidationError as exc:
        raise CliError("E_VALIDATION", str(exc)) from exc
    header = ["p1", "q", "p2", "q_threshold", "mean_accuracy", "mean_theta", "seeds", "seed", "status"]
    rows = [[r["p1"], r["q"], args.p2, r["q_threshold"], r.get("accuracy"), r.get("theta"),
             r["seeds_ok"], args.seed, r["status"]] for r in results]
    _write_csv(args.output, header, rows)


# --- rank ----------------------------------------------------------------------

def read_orientations(path) -> dict[str, bool]:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.replace(",", " ").split()
        if len(tokens) != 2 or tokens[1].lower() not in ("higher", "lower"):
            raise CliError("E_PARSE", f"orientation line must be 'metric higher|lower': {line!r}")
        out[tokens[0]] = tokens[1].lower() == "higher"
    return out


def cmd_rank(args) -> None:
    orientations = read_orientations(args.orientations) if args.orientations else dict(HIGHER_BETTER)
    with open(args.input, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"method", "metric", "value"} - set(reader.fieldnames or [])
        if missing:
            raise CliError("E_PARSE", f"results CSV lacks columns {sorted(missing)}")
        tables: dict[str, dict[str, dict[str, float]]] = {}
        for row in reader:
            if row["metric"] not in orientations:
                raise CliError("E_INPUT", f"no orientation for metric {row['metric']!r}")
            ds = tables.setdefault(row.get("dataset", ""), {})
            ds.setdefault(row["method"], {})[row["metric"]] = float(row["value"])
    rows, metrics = [], None
    for dataset, values in tables.items():
        try:
            table = average_rank(values, orientations)
        except ValueError as exc:
            raise CliError("E_INPUT", f"{dataset}: {exc}") from exc
        if metrics is None:
            metrics = table.metrics
        for i, method in enumerate(table.methods):
            ranks = dict(zip(table.metrics, table.ranks[i]))
            rows.append([dataset, method] + [ranks.get(mt) for mt in metrics] + [table.avg_rank[i]])
    _write_csv(args.output, ["dataset", "method"] + [f"rank_{mt}" for mt in metrics] + ["avg_rank"],
               [[r[0], r[1]] + [int(x) if x is not None and not math.isnan(x) else None for x in r[2:-1]]
                + [r[-1]] for r in rows])


# --- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sgcgen", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample an SBM graph with planted labels")
    p.add_argument("--params", help="JSON file with K, sizes and row-major P")
    p.add_argument("--sizes", help="community sizes, e.g. 250,250")
    p.add_argument("--probs", help="row-major P entries, e.g. '0.2,0.02,0.02,0.1'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="edge list path (stdout if omitted)")
    p.add_argument("--labels", help="ground-truth label file path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("detect", help="spectral community detection with automatic choice of K")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=sorted(METHOD_NAMES), default="sgc")
    p.add_argument("--mismatch", choices=[m.value for m in Mismatch], default="mod")
    p.add_argument("--alpha", type=float, default=None,
                   help="default 1e-4 for sgc, 1e-6 for regsgc")
    p.add_argument("--kmax", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="report JSON path (stdout if omitted)")
    p.add_argument("--partition-output", help="also write the chosen labels as a label file")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="clustering metrics for a predicted partition")
    p.add_argument("--input", required=True, help="graph edge list")
    p.add_argument("--predicted", required=True, help="predicted label file")
    p.add_argument("--labels", help="ground-truth label file")
    p.add_argument("--dataset")
    p.add_argument("--method-name", default="predicted")
    p.add_argument("--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("phase-diagram", help="two-community detectability sweep")
    p.add_argument("--grid-p1", default="0.02:0.20:0.02")
    p.add_argument("--grid-q", default="0.01:0.15:0.01")
    p.add_argument("--p2", type=float, default=0.1)
    p.add_argument("--sizes", default="250,250")
    p.add_argument("--seeds-per-cell", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("rank", help="average competition rank across metrics")
    p.add_argument("--input", required=True, help="CSV with dataset,method,metric,value")
    p.add_argument("--orientations", help="lines 'metric higher|lower'")
    p.add_argument("--output")
    p.set_defaults(func=cmd_rank)
    return ap


ERROR_CODES = [
    (ParseError, "E_PARSE"),
    (EmptyGraphError, "E_EMPTY_GRAPH"),
    (ValidationError, "E_VALIDATION"),
    (PartitionError, "E_PARTITION"),
    (GraphError, "E_GRAPH"),
    (ConvergenceError, "E_CONVERGENCE"),
    (OSError, "E_IO"),
    (ValueError, "E_INPUT"),
]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except CliError as exc:
        print(f"sgcgen: error[{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        for cls, code in ERROR_CODES:
            if isinstance(exc, cls):
                print(f"sgcgen: error[{code}]: {exc}", file=sys.stderr)
                return 1
        raise
    return 0


if __name__ == "__main__":
    sys.exit(main())
