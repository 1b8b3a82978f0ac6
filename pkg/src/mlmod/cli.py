"""Command-line front end.

Subcommands: ``detect`` (one algorithm, one parameter point), ``sweep``
(label tables across a coupling-strength grid), ``compare`` (the four
algorithms across a coupling-density grid) and ``convert`` (aspect-grid
flattening).  Exit codes: 0 success, 1 solver non-convergence, 2 input
error.  ``MLMOD_WORKERS`` caps the number of concurrent grid points.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .baselines import BaselineConfig, mlouv, sfull_spec, smean_spec
from .datasets import build_karate_replica, load_karate
from .errors import ConvergenceError, DomainError, MlmodError, ParseError
from .io import (
    load_aspect_grid,
    load_couplings,
    load_dataset,
    load_multiplex,
    load_params_file,
    save_multiplex,
    save_result,
)
from .mspec import mspec_detect
from .network import flatten_aspect_grid, generate_couplings
from .params import CouplingSpec, ModularityParams

ALGORITHMS = ("mspec", "mlouv", "smean", "sfull")
DEFAULT_OMEGAS = (0.0, 0.01, 0.1, 1.0, 10.0)
DEFAULT_RHOS = tuple(round(0.1 * i, 1) for i in range(11))


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("MLMOD_WORKERS", "1")))
    except ValueError:
        return 1


def _run_grid(fn, items):
    """Evaluate fn over items, possibly concurrently, preserving order."""
    workers = _workers()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _seed_for(base: int, *key: int) -> int:
    """Deterministic child seed for a grid point."""
    return int(np.random.SeedSequence(entropy=base, spawn_key=key).generate_state(1)[0])


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="multiplex edge-list file")
    p.add_argument("--layers-file", help="layer table: layerId aspectId label")
    p.add_argument("--couplings-file", help="coupling list file")
    p.add_argument("--manifest", help="dataset manifest file")
    p.add_argument("--dataset", choices=("karate", "karate-replica"),
                   help="bundled dataset instead of --input")
    p.add_argument("--nodes", type=int, help="declare the node count")
    p.add_argument("--layers", type=int, default=10,
                   help="layer count for --dataset karate-replica")
    p.add_argument("--gamma", type=float, nargs="+",
                   help="resolution(s): one value or one per layer")
    p.add_argument("--lambda", dest="lam", type=float, nargs="+",
                   help="layer weight(s): one value or one per layer")
    p.add_argument("--omega", type=float, nargs="+", help="coupling strength(s)")
    p.add_argument("--coupling-strategy", default=None,
                   choices=("uniform", "closeness", "temporal", "explicit"))
    p.add_argument("--closeness-file", help="dense closeness matrix file")
    p.add_argument("--params-file", help="key-value parameter file")
    p.add_argument("--seed", type=int, default=0, help="64-bit seed for stochastic steps")
    p.add_argument("--normalized", action="store_true",
                   help="report Q divided by the normalization factor mu")
    p.add_argument("--signed", action="store_true", help="signed-network modularity")
    p.add_argument("--min-community-size", type=int, default=1)
    p.add_argument("--no-refine", action="store_true",
                   help="pure sign-rule spectral recursion, no relocation sweeps")
    p.add_argument("--out", required=True, help="output directory")


def _file_params(args) -> dict:
    return load_params_file(args.params_file) if args.params_file else {}


def _resolve_network(args, fpar: dict):
    """Build the network plus explicit coupling magnitudes if any."""
    explicit = None
    if args.dataset == "karate":
        net, _ = load_karate()
    elif args.dataset == "karate-replica":
        gammas = args.gamma if args.gamma else None
        if gammas is not None and len(gammas) == 1:
            gammas = [gammas[0]] * args.layers
        if gammas is None:
            gammas = [round(0.1 * (s + 1), 10) for s in range(args.layers)]
        if len(gammas) != args.layers:
            raise DomainError(
                f"--gamma must give 1 or {args.layers} values for the replica"
            )
        net, _ = build_karate_replica(args.layers, gammas)
    elif args.manifest:
        net, _ = load_dataset(args.manifest)
    elif args.input:
        net = load_multiplex(args.input, args.layers_file, None, n_nodes=args.nodes)
    else:
        raise DomainError("no input network: pass --input, --manifest or --dataset")
    if args.couplings_file:
        couplings, explicit = load_couplings(args.couplings_file, net, net.n_nodes)
        net = net.with_couplings(couplings)
    return net, explicit


def _resolve_params(args, net, fpar: dict) -> ModularityParams:
    gamma = args.gamma if args.gamma is not None else fpar.get("gamma", 1.0)
    if isinstance(gamma, list) and len(gamma) == 1:
        gamma = gamma[0]
    lam = args.lam if args.lam is not None else fpar.get("lambda", 1.0)
    if isinstance(lam, list) and len(lam) == 1:
        lam = lam[0]
    if args.dataset == "karate-replica" and args.gamma is None and "gamma" not in fpar:
        gamma = [round(0.1 * (s + 1), 10) for s in range(args.layers)]
    signed = args.signed or bool(fpar.get("signed", False))
    normalization = "normalized" if args.normalized else fpar.get("normalization", "raw")
    return ModularityParams.for_network(
        net, gamma=gamma, lam=lam, normalization=normalization, signed=signed,
        gamma_plus=fpar.get("gamma.plus"), gamma_minus=fpar.get("gamma.minus"),
    )


def _resolve_spec(args, fpar: dict, omega: float, explicit) -> CouplingSpec:
    strategy = args.coupling_strategy or fpar.get("coupling.strategy", "uniform")
    closeness = fpar.get("closeness")
    if args.closeness_file:
        closeness = np.loadtxt(args.closeness_file, ndmin=2)
    return CouplingSpec(
        strategy=strategy,
        omega=omega,
        closeness=closeness,
        explicit=explicit or {},
    )


def _single_omega(args, fpar: dict) -> float:
    if args.omega is not None:
        if len(args.omega) != 1:
            raise DomainError("this command takes exactly one --omega value")
        return args.omega[0]
    return float(fpar.get("omega", 1.0))


def _run_algorithm(name, net, spec, params, args, seed):
    if name == "mspec":
        return mspec_detect(
            net, spec, params,
            min_community_size=args.min_community_size,
            refine=not args.no_refine,
        )
    if name == "mlouv":
        return mlouv(net, spec, params, BaselineConfig(seed=seed))
    if name == "smean":
        return smean_spec(net, spec, params, refine=not args.no_refine)
    if name == "sfull":
        return sfull_spec(net, spec, params, refine=not args.no_refine)
    raise DomainError(f"unknown algorithm {name!r}")


def _ensure_out(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _write_table(rows, header, csv_path, txt_path):
    """Emit a table as CSV plus an aligned plain-text rendering."""
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    str_rows = [header] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[c]) for r in str_rows) for c in range(len(header))]
    with open(txt_path, "w", encoding="utf-8") as fh:
        for row in str_rows:
            fh.write("  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip() + "\n")


# -- subcommands ---------------------------------------------------------------


def cmd_detect(args) -> int:
    fpar = _file_params(args)
    net, explicit = _resolve_network(args, fpar)
    params = _resolve_params(args, net, fpar)
    omega = _single_omega(args, fpar)
    spec = _resolve_spec(args, fpar, omega, explicit)
    if args.rho is not None:
        if len(args.rho) != 1:
            raise DomainError("detect takes at most one --rho value")
        net = net.with_couplings(generate_couplings(net, args.rho[0], args.seed))
    algorithm = args.algorithm or "mspec"
    out = _ensure_out(args)
    result = _run_algorithm(algorithm, net, spec, params, args, args.seed)
    path = os.path.join(out, f"result_{algorithm}.txt")
    save_result(result, path, net)
    print(f"algorithm={algorithm} Q={result.q_total!r} "
          f"communities={result.n_communities} result={path}")
    return 0


def cmd_sweep(args) -> int:
    fpar = _file_params(args)
    if args.dataset is None and args.input is None and args.manifest is None:
        args.dataset = "karate-replica"
    net, explicit = _resolve_network(args, fpar)
    params = _resolve_params(args, net, fpar)
    omegas = tuple(args.omega) if args.omega else DEFAULT_OMEGAS
    out = _ensure_out(args)
    runs_dir = os.path.join(out, "runs")
    os.makedirs(runs_dir, exist_ok=True)

    def one(idx_omega):
        idx, omega = idx_omega
        spec = _resolve_spec(args, fpar, omega, explicit)
        result = _run_algorithm(args.algorithm or "mspec", net, spec, params, args,
                                _seed_for(args.seed, idx))
        return result

    items = list(enumerate(omegas))
    results = _run_grid(one, items)

    labels_rows = []
    cells = [(i + 1, s + 1, v + 1)
             for v, aspect in enumerate(net.aspects)
             for s in range(len(aspect.layers))
             for i in range(net.n_nodes)]
    for x, (i, s, v) in enumerate(cells):
        row = [i, s, v] + [int(res.partition.labels[x]) + 1 for res in results]
        labels_rows.append(row)
    header = ["nodeId", "layerId", "aspectId"] + [f"omega={w:g}" for w in omegas]
    _write_table(labels_rows, header,
                 os.path.join(out, "sweep_labels.csv"),
                 os.path.join(out, "sweep_labels.txt"))

    summary = []
    for (idx, omega), res in zip(items, results):
        grid = res.partition.labels.reshape(net.n_cells, net.n_nodes)
        unanimous = (grid == grid[0]).all(axis=0)
        consistency = float(unanimous.mean())
        summary.append([f"{omega:g}", repr(res.q_total), res.n_communities,
                        repr(consistency)])
        save_result(res, os.path.join(runs_dir, f"sweep_omega_{idx}.txt"), net)
    _write_table(summary, ["omega", "Q", "communities", "consistency"],
                 os.path.join(out, "sweep_summary.csv"),
                 os.path.join(out, "sweep_summary.txt"))
    print(f"sweep: {len(omegas)} runs written under {out}")
    return 0


def cmd_compare(args) -> int:
    fpar = _file_params(args)
    if args.dataset is None and args.input is None and args.manifest is None:
        args.dataset = "karate-replica"
    net, explicit = _resolve_network(args, fpar)
    params = _resolve_params(args, net, fpar)
    omega = _single_omega(args, fpar)
    spec = _resolve_spec(args, fpar, omega, explicit)
    rhos = tuple(args.rho) if args.rho else DEFAULT_RHOS
    algorithms = tuple(args.algorithm) if args.algorithm else ALGORITHMS
    for name in algorithms:
        if name not in ALGORITHMS:
            raise DomainError(f"unknown algorithm {name!r}")
    repeats = max(1, args.repeats)
    out = _ensure_out(args)
    runs_dir = os.path.join(out, "runs")
    os.makedirs(runs_dir, exist_ok=True)

    def one(item):
        (ri, rho), rep = item
        coupled = net.with_couplings(
            generate_couplings(net, rho, _seed_for(args.seed, ri, rep))
        )
        row = {}
        for name in algorithms:
            result = _run_algorithm(name, coupled, spec, params, args,
                                    _seed_for(args.seed, ri, rep, ALGORITHMS.index(name)))
            fname = f"compare_rho{ri}_rep{rep}_{name}.txt"
            save_result(result, os.path.join(runs_dir, fname), coupled)
            row[name] = result.q_total
        return row

    items = [((ri, rho), rep)
             for ri, rho in enumerate(rhos) for rep in range(repeats)]
    rows = _run_grid(one, items)

    q_table = {name: np.zeros(len(rhos)) for name in algorithms}
    for ((ri, _), _), row in zip(items, rows):
        for name in algorithms:
            q_table[name][ri] += row[name] / repeats

    table = []
    for name in algorithms:
        qs = q_table[name]
        table.append([name] + [repr(float(q)) for q in qs]
                     + [repr(float(np.var(qs))), repr(float(np.mean(qs)))])
    header = ["algorithm"] + [f"rho={r:g}" for r in rhos] + ["variance", "mean"]
    _write_table(table, header,
                 os.path.join(out, "compare.csv"),
                 os.path.join(out, "compare.txt"))
    print(f"compare: {len(items)} runs over {len(rhos)} densities written under {out}")
    return 0


def cmd_convert(args) -> int:
    dims = None
    if args.grid_dims:
        try:
            dims = tuple(int(tok) for tok in args.grid_dims.lower().split("x"))
        except ValueError:
            raise DomainError(f"bad --grid-dims {args.grid_dims!r}; expected like 2x3")
    if not args.input:
        raise DomainError("convert requires --input with a grid edge file")
    grid = load_aspect_grid(args.input, n_nodes=args.nodes, dims=dims,
                            coupling_path=args.grid_couplings)
    net, location = flatten_aspect_grid(grid)
    out = _ensure_out(args)
    save_multiplex(
        net,
        os.path.join(out, "flat.edges"),
        os.path.join(out, "flat.layers"),
        os.path.join(out, "flat.couplings"),
    )
    map_lines = ["# gridCoords layerId aspectId"]
    for coord in sorted(location):
        s, v = location[coord]
        coord_txt = ",".join(str(c + 1) for c in coord)
        map_lines.append(f"{coord_txt} {s} {v}")
    with open(os.path.join(out, "flat.map"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(map_lines) + "\n")
    print(f"convert: {len(location)} layers written under {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlmod",
        description="Multilayer modularity detection, sweeps and comparisons.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run one algorithm at one parameter point")
    _add_common(p)
    p.add_argument("--algorithm", choices=ALGORITHMS, default="mspec")
    p.add_argument("--rho", type=float, nargs="+",
                   help="generate couplings with this density first")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("sweep", help="one detection per coupling strength")
    _add_common(p)
    p.add_argument("--algorithm", choices=ALGORITHMS, default="mspec")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="algorithms across coupling densities")
    _add_common(p)
    p.add_argument("--algorithm", nargs="+", choices=ALGORITHMS,
                   help="algorithms to compare (default: all four)")
    p.add_argument("--rho", type=float, nargs="+",
                   help="coupling densities (default 0, 0.1, ..., 1)")
    p.add_argument("--repeats", type=int, default=1,
                   help="seeded coupling realizations per density")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("convert", help="flatten an aspect-aspect grid")
    p.add_argument("--input", help="grid edge file with #dims directive")
    p.add_argument("--grid-couplings", help="grid coupling file")
    p.add_argument("--grid-dims", help="grid dimensions, e.g. 2x3")
    p.add_argument("--nodes", type=int, help="declare the node count")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MlmodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
