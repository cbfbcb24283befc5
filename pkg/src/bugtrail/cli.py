"""Operator command line: ingest app packages, rip event-flow graphs,
serve the HTTP API, export reports.

Exit codes: 0 ok, 2 parse/validation, 3 conflict, 4 not found,
5 environment. Store root and listen address default to the
FUSION_STORE / FUSION_ADDR environment variables.
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys

from .canonical import load_json_bytes
from .errors import ConflictError, NotFoundError, ValidationError
from .report import render_html
from .ripper import RipLimits, rip
from .serialize import decode_report
from .simulator import cross_check_behavior, parse_behavior_model, simulate
from .static_analysis import analyze_package, load_app_package
from .store import StoreHandle

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CONFLICT = 3
EXIT_NOT_FOUND = 4
EXIT_ENV = 5


def _store_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--store",
        default=os.environ.get("FUSION_STORE", "store"),
        help="store root directory (default: $FUSION_STORE or ./store)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bugtrail", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="statically analyze an app package into the store")
    p_ingest.add_argument("package", help="package directory or zip archive")
    _store_flag(p_ingest)
    p_ingest.add_argument("--json", action="store_true", help="machine-readable summary")

    p_rip = sub.add_parser("rip", help="explore an ingested app and persist its event-flow graph")
    p_rip.add_argument("app_id")
    p_rip.add_argument("version")
    _store_flag(p_rip)
    p_rip.add_argument("--max-states", type=int, default=100)
    p_rip.add_argument("--max-actions", type=int, default=1000)
    p_rip.add_argument("--json", action="store_true", help="machine-readable summary")

    p_serve = sub.add_parser("serve", help="run the report service")
    _store_flag(p_serve)
    p_serve.add_argument(
        "--addr",
        default=os.environ.get("FUSION_ADDR", "127.0.0.1:8765"),
        help="host:port to listen on (default: $FUSION_ADDR or 127.0.0.1:8765)",
    )

    p_export = sub.add_parser("export", help="write a report document to stdout or a file")
    p_export.add_argument("report_id", type=int)
    _store_flag(p_export)
    p_export.add_argument("--format", choices=("json", "html"), default="json")
    p_export.add_argument("-o", "--output", help="output file (default: stdout)")

    return parser


def cmd_ingest(args) -> int:
    pkg = load_app_package(args.package)
    universe = analyze_package(pkg)
    if pkg.behavior is not None:
        cross_check_behavior(parse_behavior_model(pkg.behavior), universe)
    store = StoreHandle(args.store)
    store.put_universe(universe.app_id, universe.app_version, universe)
    store.put_package_copy(universe.app_id, universe.app_version, args.package)
    if args.json:
        print(json.dumps({
            "app_id": universe.app_id,
            "version": universe.app_version,
            "descriptors": len(universe.descriptors),
        }, sort_keys=True))
    else:
        print(f"{universe.app_id} {universe.app_version}: {len(universe.descriptors)} descriptors")
    return EXIT_OK


def cmd_rip(args) -> int:
    store = StoreHandle(args.store)
    universe = store.get_universe(args.app_id, args.version)
    package_dir = store.package_dir(args.app_id, args.version)
    if not package_dir.is_dir():
        raise NotFoundError(f"no stored package for {args.app_id}/{args.version}")
    pkg = load_app_package(package_dir)
    driver = simulate(pkg)  # raises when behavior.json is missing
    limits = RipLimits(max_states=args.max_states, max_actions=args.max_actions)
    graph = rip(driver, universe, limits, shots=store.shots)
    store.put_graph(args.app_id, args.version, graph)
    if args.json:
        print(json.dumps({
            "app_id": args.app_id,
            "version": args.version,
            "states": len(graph.states),
            "transitions": len(graph.transitions),
            "truncated": graph.truncated,
        }, sort_keys=True))
    else:
        print(f"states={len(graph.states)} transitions={len(graph.transitions)} truncated={str(graph.truncated).lower()}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port_text = args.addr.rpartition(":")
    if not host or not port_text.isdigit():
        raise ValidationError(f"--addr must be host:port, got {args.addr!r}")
    port = int(port_text)
    # fail fast with a stable exit code when the port is taken
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as exc:
        print(f"cannot listen on {args.addr}: {exc}", file=sys.stderr)
        return EXIT_ENV
    finally:
        probe.close()
    app = create_app(StoreHandle(args.store))
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return EXIT_OK


def cmd_export(args) -> int:
    store = StoreHandle(args.store)
    data = store.get_report_bytes(args.report_id)
    if args.format == "html":
        data = render_html(decode_report(load_json_bytes(data))).encode("utf-8")
    if args.output:
        with open(args.output, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    return EXIT_OK


_COMMANDS = {
    "ingest": cmd_ingest,
    "rip": cmd_rip,
    "serve": cmd_serve,
    "export": cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConflictError as exc:
        print(f"conflict: {exc}", file=sys.stderr)
        return EXIT_CONFLICT
    except NotFoundError as exc:
        print(f"not found: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"environment error: {exc}", file=sys.stderr)
        return EXIT_ENV


if __name__ == "__main__":
    sys.exit(main())
