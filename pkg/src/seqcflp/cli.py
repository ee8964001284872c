"""Command-line workbench.

A thin client of the HTTP service: every subcommand marshals its inputs
through the service's request models and consumes its responses.  By
default the app runs in-process (no server needed); ``--server URL``
targets a remote ``seqcflp serve``.

Exit codes: 0 ok, 1 a solver or enumeration limit was hit, 2 input
error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import httpx

from .workbench.io import InstanceFormatError, read_document
from .workbench.reports import SOLVE_COLUMNS, SWEEP_COLUMNS, solve_row, sweep_row, write_csv

__all__ = ["main", "run_cli"]

EXIT_OK = 0
EXIT_LIMIT = 1
EXIT_INPUT = 2


class _InputError(Exception):
    pass


class _LimitError(Exception):
    pass


def _client(args):
    if args.server:
        return httpx.Client(base_url=args.server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        # starlette warns about its httpx bridge; the sync in-process
        # client is exactly what we want here
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import create_app

    return TestClient(create_app())


def _post(client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code == 413:
        raise _LimitError(response.json().get("detail", "request over budget"))
    if response.status_code != 200:
        try:
            detail = response.json().get("detail")
        except ValueError:
            detail = response.text
        raise _InputError(f"service rejected the request: {detail}")
    return response.json()


def _options(args) -> dict:
    options = {
        "cuts": args.cuts,
        "separation": args.sep,
        "tol": args.tol,
        "time_limit": args.time_limit,
        "log_every": args.log_every,
    }
    if getattr(args, "node_limit", None) is not None:
        options["node_limit"] = args.node_limit
    return options


def _strip_timing(doc):
    if isinstance(doc, dict):
        return {k: _strip_timing(v) for k, v in doc.items() if k != "wall_time"}
    if isinstance(doc, list):
        return [_strip_timing(v) for v in doc]
    return doc


def _emit(doc: dict, args) -> None:
    if args.omit_timing:
        doc = _strip_timing(doc)
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path: str) -> dict:
    return read_document(path)


def _instance_name(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _cmd_gen(args) -> int:
    payload = {
        "num_customers": args.customers,
        "num_sites": args.sites,
        "p": args.p,
        "r": args.r,
        "beta": args.beta,
        "alpha": args.alpha,
        "seed": args.seed,
        "square_side": args.side,
        "demand": args.demand,
    }
    with _client(args) as client:
        doc = _post(client, "/generate", payload)
    name = doc["name"]
    out = args.output
    if out is None or os.path.isdir(out or "."):
        out = os.path.join(out or ".", f"{name}.json")
    text = json.dumps(doc["instance"], indent=2) + "\n"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(out)
    return EXIT_OK


def _cmd_solve(args) -> int:
    instance = _load(args.instance)
    with _client(args) as client:
        doc = _post(client, "/solve", {"instance": instance, "options": _options(args)})
    _emit(doc, args)
    sites = doc.get("best_sites")
    print(
        f"status={doc['status']} z={doc['z_best']:.6f} bound={doc['z_bound']:.6f} "
        f"gap={doc['gap']:.6f} sites={sites} cuts={doc['num_cuts']['total']} "
        f"nodes={doc['num_nodes']}",
        file=sys.stderr,
    )
    return EXIT_OK if doc["status"] == "optimal" else EXIT_LIMIT


def _cmd_approx(args) -> int:
    instance = _load(args.instance)
    with _client(args) as client:
        doc = _post(client, "/approx", {"instance": instance, "options": _options(args)})
    _emit(doc, args)
    print(
        f"status={doc['status']} z_H={doc['z_h']:.6f} ratio>={doc['ratio_lower']:.6f} "
        f"sites={doc['best_sites']}",
        file=sys.stderr,
    )
    return EXIT_OK if doc["status"] == "optimal" else EXIT_LIMIT


def _cmd_oracle(args) -> int:
    instance = _load(args.instance)
    with _client(args) as client:
        doc = _post(client, "/oracle", {"instance": instance, "budget": args.budget})
    _emit(doc, args)
    print(f"z*={doc['z_star']:.6f} sites={doc['best_sites']}", file=sys.stderr)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    instance = _load(args.instance)
    betas = [float(b) for b in args.betas.split(",") if b]
    with _client(args) as client:
        doc = _post(
            client,
            "/sweep-beta",
            {"instance": instance, "betas": betas, "options": _options(args)},
        )
    rows = doc["rows"]
    if args.omit_timing:
        rows = _strip_timing(rows)
    table = [sweep_row(row) for row in rows]
    if args.output:
        write_csv(args.output, SWEEP_COLUMNS, table)
    else:
        print(",".join(SWEEP_COLUMNS))
        for row in table:
            print(",".join(row))
    worst = [row for row in rows if row["status"] != "optimal"]
    return EXIT_LIMIT if worst else EXIT_OK


def _cmd_report(args) -> int:
    configs = [c for c in args.configs.split(",") if c]
    table = []
    hit_limit = False
    with _client(args) as client:
        for path in args.instances:
            instance = _load(path)
            name = _instance_name(path)
            for cuts in configs:
                options = _options(args)
                options["cuts"] = cuts
                doc = _post(client, "/solve", {"instance": instance, "options": options})
                if args.omit_timing:
                    doc = _strip_timing(doc)
                hit_limit |= doc["status"] != "optimal"
                table.append(solve_row(name, doc))
    if args.output:
        write_csv(args.output, SOLVE_COLUMNS, table)
    else:
        print(",".join(SOLVE_COLUMNS))
        for row in table:
            print(",".join(row))
    return EXIT_LIMIT if hit_limit else EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def _add_common(parser, with_output=True):
    parser.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    if with_output:
        parser.add_argument("-o", "--output", default=None, help="write the report here")
        parser.add_argument(
            "--omit-timing",
            action="store_true",
            help="drop wall-clock fields so outputs are byte-reproducible",
        )


def _add_solver_options(parser):
    parser.add_argument("--cuts", choices=("sc", "bi", "scbi"), default="scbi")
    parser.add_argument(
        "--sep",
        choices=("exact", "approx"),
        default="approx",
        help="separation mode; approx tries the sorting bound first",
    )
    parser.add_argument("--time-limit", type=float, default=3600.0)
    parser.add_argument("--tol", type=float, default=1e-6)
    parser.add_argument("--node-limit", type=int, default=None)
    parser.add_argument("--log-every", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqcflp",
        description="Sequential competitive facility location workbench",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a seeded planar instance")
    gen.add_argument("--customers", type=int, required=True)
    gen.add_argument("--sites", type=int, required=True)
    gen.add_argument("-p", type=int, required=True)
    gen.add_argument("-r", type=int, required=True)
    gen.add_argument("--beta", type=float, default=0.1)
    gen.add_argument("--alpha", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--side", type=float, default=50.0)
    gen.add_argument("--demand", choices=("uniform", "random"), default="uniform")
    gen.add_argument("-o", "--output", default=None, help="file or directory")
    gen.add_argument("--server", default=None)
    gen.set_defaults(func=_cmd_gen)

    solve = sub.add_parser("solve", help="exact branch-and-cut")
    solve.add_argument("instance")
    _add_solver_options(solve)
    _add_common(solve)
    solve.set_defaults(func=_cmd_solve)

    approx = sub.add_parser("approx", help="constant-ratio approximation")
    approx.add_argument("instance")
    _add_solver_options(approx)
    _add_common(approx)
    approx.set_defaults(func=_cmd_approx)

    oracle = sub.add_parser("oracle", help="exhaustive enumeration benchmark")
    oracle.add_argument("instance")
    oracle.add_argument("--budget", type=int, default=200_000_000)
    _add_common(oracle)
    oracle.set_defaults(func=_cmd_oracle)

    sweep = sub.add_parser("sweep-beta", help="re-solve over a beta grid")
    sweep.add_argument("instance")
    sweep.add_argument("--betas", default="0.05,0.1,0.2,0.3,0.5,0.8")
    _add_solver_options(sweep)
    _add_common(sweep)
    sweep.set_defaults(func=_cmd_sweep)

    report = sub.add_parser("report", help="benchmark CSV over instances and configs")
    report.add_argument("instances", nargs="+")
    report.add_argument("--configs", default="sc,bi,scbi")
    _add_solver_options(report)
    _add_common(report)
    report.set_defaults(func=_cmd_report)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=_cmd_serve)

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(name)s %(message)s")
        if getattr(args, "log_every", 0) == 0 and hasattr(args, "log_every"):
            args.log_every = 100
    try:
        return args.func(args)
    except InstanceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except _LimitError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except httpx.HTTPError as exc:
        print(f"error: cannot reach the service ({exc})", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
