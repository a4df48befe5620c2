"""Command-line client.

Thin front end over the service dispatcher: parses arguments, loads the
workspace files, runs the command (in process by default, or against a
running service with --server), prints one JSON record per line on stdout
and a human-readable summary on stderr.  Exit codes: 0 all properties
verified, 1 a property failed, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import commands
from .workspace import WorkspaceError, load

COMMON_FLAGS = {
    "--max-degree": dict(dest="max_degree", type=int, default=3,
                         help="truncation degree (default 3)"),
    "--cover-depth": dict(dest="cover_depth", type=int, default=None,
                          help="depth bound for infinite cover checks"),
    "--seed": dict(dest="seed", type=int, default=None,
                   help="seed recorded for randomized property suites"),
    "--convention": dict(dest="convention", choices=["standard", "flipped"],
                         default="standard",
                         help="inner-face sign convention for differentials"),
}

COMMAND_FLAGS = {
    "validate": [],
    "nerve": [("--cat", {}), ("--degree", dict(type=int, default=1))],
    "cover": [("--cover", {}), ("--n", dict(default="inf"))],
    "restrict": [("--cat", {}), ("--functor", {})],
    "glue": [("--descent", {}), ("--n", dict(type=int, default=3))],
    "tensor": [("--left", {}), ("--right", {})],
    "hom": [("--left", {}), ("--right", {}), ("--op", dict(action="store_true"))],
    "arrow": [("--bimodule", {})],
    "recognize-arrow": [("--cat", {}), ("--ideal", {})],
    "hh": [("--cat", {}), ("--coeff", {})],
    "sheaf-check": [("--cover", {})],
    "mv": [("--cover", {}), ("--diagram", {})],
    "support": [("--cat", {}), ("--functor", {}), ("--coeff", {})],
    "localize": [("--cat", {}), ("--decomposition", {}), ("--coeff", {})],
    "triangle": [("--bimodule", {})],
    "censor": [("--cat", {}), ("--subcategory", {}), ("--coeff", {})],
    "groth": [("--diagram", {})],
    "base-change": [("--diagram", {}), ("--functor", {})],
    "cstar": [("--diagram", {}), ("--anchors", {})],
    "chain-mv": [("--diagram", {}), ("--two-set", dict(dest="two_set", action="store_true"))],
    "compare": [("--diagram", {})],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hochcat",
        description="verify map-graded category constructions exactly",
    )
    parser.add_argument("-w", "--workspace", action="append", default=[],
                        help="workspace JSON file (repeatable)")
    parser.add_argument("--server", default=None,
                        help="run against a service at this base URL instead of in process")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, flags in COMMAND_FLAGS.items():
        p = sub.add_parser(name)
        for flag, kw in flags:
            p.add_argument(flag, **kw)
        for flag, kw in COMMON_FLAGS.items():
            p.add_argument(flag, **kw)
    serve_p = sub.add_parser("serve", help="run the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    return parser


def args_dict(ns: argparse.Namespace) -> dict:
    skip = {"workspace", "server", "command", "host", "port"}
    return {k: v for k, v in vars(ns).items() if k not in skip and v is not None}


def emit(report_header, records, text_lines, out=sys.stdout, err=sys.stderr):
    print(json.dumps(report_header, sort_keys=True), file=out)
    for rec in records:
        print(json.dumps(rec, sort_keys=True, default=str), file=out)
    for line in text_lines:
        print(line, file=err)


def run_remote(server: str, command: str, args: dict, paths: list[str]) -> int:
    import httpx

    merged: dict = {}
    for path in paths:
        with open(path) as fh:
            data = json.load(fh)
        for section, decls in data.items():
            merged.setdefault(section, {}).update(decls)
    resp = httpx.post(f"{server.rstrip('/')}/run",
                      json={"command": command, "args": args, "workspace": merged},
                      timeout=600.0)
    if resp.status_code == 422:
        print(f"input error: {resp.json().get('detail')}", file=sys.stderr)
        return 2
    resp.raise_for_status()
    body = resp.json()
    emit(body["header"], body["records"], body["text"])
    return body["exit_code"]


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command == "serve":
        from .service import serve

        serve(ns.host, ns.port)
        return 0
    args = args_dict(ns)
    if ns.server:
        code = run_remote(ns.server, ns.command, args, ns.workspace)
        sys.exit(code)
    try:
        ws = load(ns.workspace)
    except WorkspaceError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        sys.exit(2)
    report = commands.run(ns.command, args, ws)
    emit(report.header, report.records, report.text)
    sys.exit(report.exit_code)


if __name__ == "__main__":
    main()
