"""Command-line entry point.

Subcommands: ingest, serve, replay, query, validate-network. The service
config path comes from ``--config`` or the ``EIS_CONFIG`` environment
variable; ``--lambda/--alpha/--theta/--top-k/--tau`` override the adaptation
config where they apply.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import corpus, dbn, service
from .errors import AdasearchError


def _add_tuning_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lambda_weight", type=float, default=None,
                        help="weight of the inferred objective in fusion")
    parser.add_argument("--alpha", type=float, default=None,
                        help="weight of content match in scoring")
    parser.add_argument("--theta", type=float, default=None,
                        help="minimum score for inclusion")
    parser.add_argument("--top-k", dest="top_k", type=int, default=None,
                        help="result cap")
    parser.add_argument("--tau", type=float, default=None,
                        help="activation threshold for query adaptation")


def _apply_tuning(engine: service.Engine, args: argparse.Namespace) -> None:
    overrides = {
        name: getattr(args, name)
        for name in ("lambda_weight", "alpha", "theta", "top_k", "tau")
        if getattr(args, name, None) is not None
    }
    if overrides:
        engine.adaptation_config = replace(engine.adaptation_config, **overrides)


def _config_path(args: argparse.Namespace) -> Path:
    path = args.config or os.environ.get("EIS_CONFIG")
    if not path:
        raise AdasearchError(
            "no service config: pass --config or set EIS_CONFIG")
    return Path(path)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adasearch",
        description="Adaptive publication search with a Bayesian user model.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="parse and index a corpus file")
    p_ingest.add_argument("corpus", type=Path)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", type=Path, default=None)
    _add_tuning_flags(p_serve)

    p_replay = sub.add_parser("replay",
                              help="apply an activity log to a fresh session")
    p_replay.add_argument("log", type=Path)
    p_replay.add_argument("--corpus", type=Path, default=None,
                          help="override the configured corpus file")
    p_replay.add_argument("--config", type=Path, default=None)
    p_replay.add_argument("--out", type=Path, default=None,
                          help="write the report here instead of stdout")
    _add_tuning_flags(p_replay)

    p_query = sub.add_parser("query", help="run a query against a live service")
    p_query.add_argument("text")
    p_query.add_argument("--session", required=True)
    p_query.add_argument("--url", default="http://127.0.0.1:8000")

    p_validate = sub.add_parser("validate-network",
                                help="check a network spec file")
    p_validate.add_argument("spec", type=Path)

    return parser


def cmd_ingest(args: argparse.Namespace) -> int:
    docs = corpus.load_corpus(args.corpus)
    index = corpus.ingest_corpus(docs)
    print(f"indexed {len(index)} documents, "
          f"{len(index.term_postings)} terms, "
          f"{sum(len(v) for v in index.link_graph.values())} links")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    config = service.load_service_config(_config_path(args))
    engine = service.Engine(config)
    _apply_tuning(engine, args)
    app = service.create_app(engine)
    import uvicorn
    uvicorn.run(app, host="127.0.0.1", port=config.port)
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    config = service.load_service_config(_config_path(args))
    if args.corpus is not None:
        config = replace(config, corpus_path=args.corpus.resolve())
    engine = service.Engine(config, persist=False)
    _apply_tuning(engine, args)
    report = service.replay(engine, args.log)
    text = service.render_report(report)
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    import httpx

    response = httpx.post(
        f"{args.url}/sessions/{args.session}/query",
        json={"query": args.text}, timeout=30.0)
    print(json.dumps(response.json(), indent=2, sort_keys=True))
    return 0 if response.status_code == 200 else 1


def cmd_validate_network(args: argparse.Namespace) -> int:
    spec = dbn.load_network(args.spec)
    violations = dbn.validate_network(spec)
    if not violations:
        print(f"ok: {len(spec.variables)} variables, "
              f"{len(spec.cpts)} conditional tables")
        return 0
    for violation in violations:
        print(f"violation: {violation}", file=sys.stderr)
    return 1


_COMMANDS = {
    "ingest": cmd_ingest,
    "serve": cmd_serve,
    "replay": cmd_replay,
    "query": cmd_query,
    "validate-network": cmd_validate_network,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except AdasearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
