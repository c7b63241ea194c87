"""Command-line front end: generate, reduce, sweep, dendrogram, validate.

Network files are JSON: masses, damping (dense, or damper edge list plus a
vertex-damper coefficient), a stiffness edge list, and a dense input matrix.
All commands are deterministic given explicit seeds; timings are reported
but never influence results.  Exit codes: 0 success, 2 usage, 3 parse,
4 validation, 5 numerical failure.
"""

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import cluster as _cluster
from . import network as _network
from . import reduce as _reduce
from . import sys2 as _sys2
from .errors import (
    FileFormatError,
    GenerationError,
    ModelStructureError,
    NetredError,
)
from .gramian import network_gramian

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_NUMERICAL = 5


# ---------------------------------------------------------------------------
# file formats


def _dump_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON ({exc})") from exc


def network_payload(masses, stiffness_edges, input_matrix, damping=None,
                    damper_edges=None, alpha=None):
    """Assemble the JSON payload of a network file.

    Pass either a dense ``damping`` matrix or ``damper_edges`` plus the
    vertex-damper coefficient ``alpha``.
    """
    masses = np.asarray(masses, dtype=float)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "n": int(masses.shape[0]),
        "m": int(np.asarray(input_matrix).shape[1]),
        "masses": masses.tolist(),
        "stiffness_edges": [[int(i), int(j), float(w)] for i, j, w in stiffness_edges],
        "input_matrix": np.asarray(input_matrix, dtype=float).tolist(),
    }
    if damping is not None:
        payload["damping"] = {"dense": np.asarray(damping, dtype=float).tolist()}
    else:
        payload["damping"] = {
            "edges": [[int(i), int(j), float(w)] for i, j, w in damper_edges],
            "alpha": float(alpha),
        }
    return payload


def write_network(path, payload):
    _dump_json(path, payload)


def read_network(path):
    """Read and validate a network file into a model."""
    raw = _load_json(path)
    try:
        if raw["schema_version"] != SCHEMA_VERSION:
            raise FileFormatError(
                f"{path}: unsupported schema_version {raw['schema_version']!r}"
            )
        n = int(raw["n"])
        masses = np.asarray(raw["masses"], dtype=float)
        damping_spec = raw["damping"]
        if "dense" in damping_spec:
            damping = np.asarray(damping_spec["dense"], dtype=float)
        else:
            damper_graph = _network.WeightedGraph(
                n, tuple((int(i), int(j), float(w)) for i, j, w in damping_spec["edges"])
            )
            damping = _network.laplacian(damper_graph) + np.diag(
                float(damping_spec["alpha"]) * masses
            )
        spring_graph = _network.WeightedGraph(
            n, tuple((int(i), int(j), float(w)) for i, j, w in raw["stiffness_edges"])
        )
        stiffness = _network.laplacian(spring_graph)
        f = np.asarray(raw["input_matrix"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: malformed network file ({exc})") from exc
    return _sys2.validate(masses, damping, stiffness, f)


def read_partition(path):
    raw = _load_json(path)
    try:
        clusters = tuple(tuple(int(v) for v in c) for c in raw["clusters"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{path}: malformed partition file ({exc})") from exc
    try:
        return _network.ClusteringPartition(clusters)
    except ValueError as exc:
        raise FileFormatError(f"{path}: invalid partition ({exc})") from exc


def _partition_payload(partition):
    return {"clusters": [list(c) for c in partition.clusters]}


# ---------------------------------------------------------------------------
# dendrogram export


def _fmt(x):
    return f"{x:.17g}"


def to_newick(dendrogram, n):
    """Newick form with branch lengths = parent height - child height."""
    if n == 1:
        return "1;"
    heights = {i: 0.0 for i in range(1, n + 1)}
    children = {}
    for merge in dendrogram.merges:
        heights[merge.new_id] = merge.height
        children[merge.new_id] = (merge.a, merge.b)
    root = dendrogram.merges[-1].new_id

    def render(node):
        if node <= n:
            return str(node)
        a, b = children[node]
        la = _fmt(heights[node] - heights[a])
        lb = _fmt(heights[node] - heights[b])
        return f"({render(a)}:{la},{render(b)}:{lb})"

    return render(root) + ";"


def to_dot(dendrogram, n):
    """DOT form: leaves labeled by vertex index, internal nodes by height."""
    lines = ["graph dendrogram {"]
    for v in range(1, n + 1):
        lines.append(f'  n{v} [label="{v}" shape=box];')
    for merge in dendrogram.merges:
        lines.append(f'  n{merge.new_id} [label="{_fmt(merge.height)}"];')
        lines.append(f"  n{merge.new_id} -- n{merge.a};")
        lines.append(f"  n{merge.new_id} -- n{merge.b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# the reduction pipeline shared by reduce/sweep


def _clusterize(sys, gram, r, strategy, variant, seed, threads):
    """Dissimilarity + clustering phases; returns (partition, dendrogram, timings)."""
    timings = {}
    dis = None
    dendrogram = None
    if strategy in ("hierarchical", "greedy"):
        start = time.perf_counter()
        if variant == "position":
            dis = _cluster.dissimilarity_position(sys, gram, threads=threads)
        else:
            dis = _cluster.dissimilarity_velocity(sys, gram, threads=threads)
        timings["dissimilarity"] = time.perf_counter() - start
    else:
        timings["dissimilarity"] = 0.0

    start = time.perf_counter()
    if strategy == "hierarchical":
        partition, dendrogram = _cluster.hierarchical_clustering(dis, r)
    elif strategy == "greedy":
        partition = _cluster.greedy_clustering(dis, r)
    elif strategy == "random":
        partition = _cluster.random_clustering(sys.n, r, seed)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    timings["clustering"] = time.perf_counter() - start
    return partition, dendrogram, timings


def _reduce_once(sys, r, strategy, variant, seed, threads, gram=None,
                 partition=None):
    """Full pipeline with per-phase wall-clock timings (seconds)."""
    timings = {}
    if gram is None:
        start = time.perf_counter()
        gram = network_gramian(sys)
        timings["gramian"] = time.perf_counter() - start
    else:
        timings["gramian"] = 0.0

    if partition is None:
        partition, _, t = _clusterize(sys, gram, r, strategy, variant, seed, threads)
        timings.update(t)
    else:
        timings["dissimilarity"] = 0.0
        timings["clustering"] = 0.0

    start = time.perf_counter()
    red = _reduce.project(sys, partition)
    timings["projection"] = time.perf_counter() - start

    start = time.perf_counter()
    error = _reduce.approximation_error_h2(sys, red, variant, gramian=gram)
    timings["error"] = time.perf_counter() - start
    return red, error, gram, timings


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args):
    cfg = _network.BenchmarkConfig(
        m=args.inputs,
        k=args.ws_k,
        beta=args.ws_beta,
        alpha=args.alpha,
        weight_min=args.weight_min,
        weight_max=args.weight_max,
    )
    m_diag, spring, damper, f = _network.benchmark_parts(args.n, cfg, args.seed)
    # the generated model must validate before anything is written
    stiffness = _network.laplacian(spring)
    damping = _network.laplacian(damper) + np.diag(cfg.alpha * m_diag)
    _sys2.validate(m_diag, damping, stiffness, f)
    payload = network_payload(
        m_diag,
        spring.edges,
        f,
        damper_edges=damper.edges,
        alpha=cfg.alpha,
    )
    write_network(args.out, payload)
    print(
        f"generated n={args.n} m={args.inputs} seed={args.seed} "
        f"ws=(k={args.ws_k}, beta={args.ws_beta}) alpha={args.alpha} "
        f"weights=[{args.weight_min}, {args.weight_max}] -> {args.out}"
    )
    return EXIT_OK


def cmd_reduce(args):
    sys_model = read_network(args.network)
    if not 1 <= args.r <= sys_model.n:
        raise ValueError(f"r must be in [1, {sys_model.n}], got {args.r}")
    partition = read_partition(args.partition) if args.partition else None
    if partition is not None:
        if partition.n != sys_model.n:
            raise FileFormatError(
                f"partition covers {partition.n} vertices, network has {sys_model.n}"
            )
        if partition.r != args.r:
            raise ValueError(
                f"partition has {partition.r} clusters but r={args.r} was requested"
            )
    red, error, _, timings = _reduce_once(
        sys_model,
        args.r,
        args.strategy,
        args.variant,
        args.seed,
        args.threads,
        partition=partition,
    )

    reduced_payload = network_payload(
        red.m_hat, red.graph.edges, red.f_hat, damping=red.d_hat
    )
    write_network(f"{args.out}_reduced.json", reduced_payload)
    _dump_json(f"{args.out}_partition.json", _partition_payload(red.partition))
    report = {
        "n": sys_model.n,
        "r": red.r,
        "strategy": "explicit-partition" if args.partition else args.strategy,
        "variant": args.variant,
        "error_h2": error,
        "timings_ms": {k: 1e3 * v for k, v in timings.items()},
    }
    _dump_json(f"{args.out}_report.json", report)
    print(
        f"reduced n={sys_model.n} -> r={red.r} ({report['strategy']}, "
        f"{args.variant}): error_h2 = {_fmt(error)}"
    )
    for phase in ("gramian", "dissimilarity", "clustering", "projection", "error"):
        print(f"  {phase:>13}: {1e3 * timings[phase]:9.3f} ms")
    return EXIT_OK


def cmd_sweep(args):
    sys_model = read_network(args.network)
    r_list = sorted(set(args.r))
    for r in r_list:
        if not 1 <= r <= sys_model.n:
            raise ValueError(f"r must be in [1, {sys_model.n}], got {r}")
    strategies = args.strategies.split(",")
    for strategy in strategies:
        if strategy not in ("hierarchical", "random", "greedy"):
            raise ValueError(f"unknown strategy {strategy!r}")

    gram = network_gramian(sys_model)
    seed_rng = np.random.default_rng(args.seed)
    rows = []
    for r in r_list:
        for strategy in strategies:
            if strategy == "random":
                for trial in range(args.trials):
                    trial_seed = int(seed_rng.integers(0, 2**63 - 1))
                    start = time.perf_counter()
                    _, error, _, _ = _reduce_once(
                        sys_model, r, strategy, args.variant, trial_seed,
                        args.threads, gram=gram,
                    )
                    wall = 1e3 * (time.perf_counter() - start)
                    rows.append((strategy, r, trial, str(trial_seed), error, wall))
            else:
                start = time.perf_counter()
                _, error, _, _ = _reduce_once(
                    sys_model, r, strategy, args.variant, 0, args.threads,
                    gram=gram,
                )
                wall = 1e3 * (time.perf_counter() - start)
                rows.append((strategy, r, 0, "", error, wall))

    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["strategy", "r", "trial", "seed", "error_h2", "wall_ms"])
        for strategy, r, trial, seed, error, wall in rows:
            writer.writerow([strategy, r, trial, seed, _fmt(error), _fmt(wall)])
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_dendrogram(args):
    sys_model = read_network(args.network)
    gram = network_gramian(sys_model)
    if args.variant == "position":
        dis = _cluster.dissimilarity_position(sys_model, gram, threads=args.threads)
    else:
        dis = _cluster.dissimilarity_velocity(sys_model, gram, threads=args.threads)
    _, dendrogram = _cluster.hierarchical_clustering(dis, 1)
    if args.format == "newick":
        text = to_newick(dendrogram, sys_model.n) + "\n"
    else:
        text = to_dot(dendrogram, sys_model.n)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {args.format} dendrogram ({sys_model.n} leaves) to {args.out}")
    return EXIT_OK


def cmd_validate(args):
    raw = _load_json(args.network)
    try:
        n = int(raw["n"])
        masses = np.asarray(raw["masses"], dtype=float)
        damping_spec = raw["damping"]
        if "dense" in damping_spec:
            damping = np.asarray(damping_spec["dense"], dtype=float)
        else:
            damper_graph = _network.WeightedGraph(
                n, tuple((int(i), int(j), float(w)) for i, j, w in damping_spec["edges"])
            )
            damping = _network.laplacian(damper_graph) + np.diag(
                float(damping_spec["alpha"]) * masses
            )
        spring_graph = _network.WeightedGraph(
            n,
            tuple((int(i), int(j), float(w)) for i, j, w in raw["stiffness_edges"]),
        )
        stiffness = _network.laplacian(spring_graph)
        f = np.asarray(raw["input_matrix"], dtype=float)
        violations = _sys2.check_structure(masses, damping, stiffness, f)
    except FileFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{args.network}: malformed network file ({exc})") from exc
    if not violations:
        print(f"{args.network}: pass (n={n}, m={f.shape[1]})")
        return EXIT_OK
    print(f"{args.network}: {len(violations)} structural violation(s)")
    for v in violations:
        print(f"  {v.condition} at {v.location}: magnitude {v.magnitude:.6g}")
        print(f"    {v.message}")
    return EXIT_VALIDATION


# ---------------------------------------------------------------------------
# parser and entry point


def build_parser():
    parser = argparse.ArgumentParser(
        prog="netred",
        description=(
            "Structure-preserving reduction of second-order network systems "
            "by graph clustering."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a seeded benchmark network file")
    p.add_argument("-n", type=int, required=True, help="vertex count")
    p.add_argument("-m", "--inputs", type=int, default=5, help="input count")
    p.add_argument("--ws-k", type=int, default=4, help="small-world mean degree")
    p.add_argument("--ws-beta", type=float, default=0.3, help="rewiring probability")
    p.add_argument("--alpha", type=float, default=0.5, help="vertex damper per unit mass")
    p.add_argument("--weight-min", type=float, default=0.5)
    p.add_argument("--weight-max", type=float, default=1.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output network file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("reduce", help="reduce a network file to a target order")
    p.add_argument("network", help="input network file")
    p.add_argument("-r", type=int, required=True, help="target order")
    p.add_argument(
        "--strategy",
        choices=("hierarchical", "random", "greedy"),
        default="hierarchical",
    )
    p.add_argument("--variant", choices=("position", "velocity"), default="position")
    p.add_argument("--partition", help="explicit partition file (skips clustering)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("sweep", help="error sweep over orders and strategies")
    p.add_argument("network")
    p.add_argument("-r", type=int, action="append", required=True,
                   help="target order (repeatable)")
    p.add_argument("--strategies", default="hierarchical,random,greedy",
                   help="comma-separated strategy list")
    p.add_argument("--trials", type=int, default=50,
                   help="repetitions of the random strategy")
    p.add_argument("--variant", choices=("position", "velocity"), default="position")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dendrogram", help="export the full clustering tree")
    p.add_argument("network")
    p.add_argument("--variant", choices=("position", "velocity"), default="position")
    p.add_argument("--format", choices=("newick", "dot"), default="newick")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dendrogram)

    p = sub.add_parser("validate", help="check a network file against the model structure")
    p.add_argument("network")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ModelStructureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for v in getattr(exc, "violations", []):
            print(f"  {v.condition} at {v.location}: {v.message}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NetredError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
