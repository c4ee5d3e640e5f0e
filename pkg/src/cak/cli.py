"""Command-line interface: ``cak <command> ...``.

Every command writes exactly one JSON document (or DOT text) to stdout and
logs to stderr.  Exit codes: 0 success, 1 internal failure or unparsable
input for ``validate``, 2 configuration error, 3 class or method not found,
4 LLM endpoint failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any

from cak import analysis, callgraph, testgen
from cak.errors import CakError, EndpointError, NotAFocalMethod, NotFound
from cak.parsing import parse_source
from cak.prompting import LLMEndpointConfig, execute_prompt
from cak.schema import Language, to_jsonable
from cak.session import (
    AnalysisLevel,
    AnalysisSession,
    ToolkitConfig,
    create_session,
    load_session,
    schema_to_json,
)

log = logging.getLogger("cak")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NOT_FOUND, EXIT_ENDPOINT = 0, 1, 2, 3, 4


def _dump(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, ensure_ascii=False) + "\n"


def _session(args: argparse.Namespace, level: AnalysisLevel = AnalysisLevel.SYMBOL_TABLE) -> AnalysisSession:
    if args.snapshot:
        return load_session(args.snapshot)
    if not args.language:
        raise CakError("--language is required with --input")
    wanted = AnalysisLevel(args.level) if args.level else level
    return create_session(ToolkitConfig(args.language, Path(args.input), analysis_level=wanted))


def cmd_analyze(args: argparse.Namespace) -> int:
    session = _session(args, AnalysisLevel.SYMBOL_TABLE)
    text = schema_to_json(session) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_classes(args: argparse.Namespace) -> int:
    sys.stdout.write(_dump(list(analysis.get_classes(_session(args)))))
    return EXIT_OK


def cmd_methods(args: argparse.Namespace) -> int:
    methods = analysis.get_methods_in_class(_session(args), args.klass)
    sys.stdout.write(_dump(list(methods)))
    return EXIT_OK


def cmd_callgraph(args: argparse.Namespace) -> int:
    session = _session(args, AnalysisLevel.CALL_GRAPH)
    if args.klass and args.method:
        graph = callgraph.get_method_call_graph(session, args.klass, args.method)
    else:
        graph = callgraph.get_call_graph(session)
    if args.format == "dot":
        sys.stdout.write(graph.to_dot())
    else:
        sys.stdout.write(
            _dump({"nodes": [n.key for n in graph.nodes], "edges": [[e.caller.key, e.callee.key] for e in graph.edges]})
        )
    return EXIT_OK


def cmd_chain(args: argparse.Namespace) -> int:
    session = _session(args, AnalysisLevel.CALL_GRAPH)
    if args.kind == "inheritance":
        chain = callgraph.get_inheritance_chain(session, args.klass)
    else:
        if not args.method:
            raise CakError("--method is required for --kind private")
        chain = callgraph.get_private_call_chain(session, args.klass, args.method)
    sys.stdout.write(_dump(chain))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    path = Path(args.file)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CakError(f"cannot read {path}: {exc}") from None
    result = parse_source(Language.parse(args.language), data)
    diags = [{**to_jsonable(d), "file": str(args.file)} for d in result.diagnostics]
    sys.stdout.write(json.dumps(diags, indent=2) + "\n")
    return EXIT_OK if result.ok else EXIT_FAIL


def _mockable(args: argparse.Namespace) -> set[str]:
    names = set(args.mockable or ())
    if args.mockable_file:
        try:
            lines = Path(args.mockable_file).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise CakError(f"cannot read {args.mockable_file}: {exc}") from None
        names.update(ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#"))
    return names


def cmd_prompt(args: argparse.Namespace) -> int:
    session = _session(args, AnalysisLevel.CALL_GRAPH)
    context = testgen.build_testgen_context(session, args.klass, args.method, _mockable(args))
    prompt = testgen.render_testgen_prompt(context)
    if not args.execute:
        sys.stdout.write(_dump({"prompt": prompt.text}))
        return EXIT_OK
    config = LLMEndpointConfig(
        base_url=args.endpoint or "http://localhost:8080/complete",
        model_id=args.model or "default",
        timeout=args.timeout,
        max_tokens=args.max_tokens,
        temperature=args.temperature,
    )
    sys.stdout.write(_dump({"completion": execute_prompt(config, prompt)}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cak", description="Multi-language static analysis toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    source = argparse.ArgumentParser(add_help=False)
    group = source.add_mutually_exclusive_group(required=True)
    group.add_argument("--input", help="project directory to analyze")
    group.add_argument("--snapshot", help="JSON snapshot written by 'analyze'")
    source.add_argument("--language", choices=[lang.value for lang in Language])
    source.add_argument("--level", choices=[lvl.value for lvl in AnalysisLevel])

    p = sub.add_parser("analyze", help="write a JSON snapshot", parents=[source])
    p.add_argument("--output", help="file to write (default: stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("classes", help="list qualified type names", parents=[source])
    p.set_defaults(func=cmd_classes)

    p = sub.add_parser("methods", help="list method signatures of a type", parents=[source])
    p.add_argument("--class", dest="klass", required=True)
    p.set_defaults(func=cmd_methods)

    p = sub.add_parser("callgraph", help="print the call graph", parents=[source])
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.add_argument("--class", dest="klass", help="restrict to what this method reaches (with --method)")
    p.add_argument("--method")
    p.set_defaults(func=cmd_callgraph)

    p = sub.add_parser("chain", help="inheritance or private call chain", parents=[source])
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--method")
    p.add_argument("--kind", choices=["inheritance", "private"], default="inheritance")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("validate", help="check that a source file parses")
    p.add_argument("--language", required=True, choices=[lang.value for lang in Language])
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("prompt", help="build (and optionally run) a task prompt", parents=[source])
    p.add_argument("--class", dest="klass", required=True)
    p.add_argument("--method", required=True)
    p.add_argument("--task", choices=["testgen"], default="testgen")
    p.add_argument("--mockable", action="append", help="mockable type name (repeatable)")
    p.add_argument("--mockable-file", help="file with one mockable type name per line")
    p.add_argument("--execute", action="store_true", help="send the prompt to the completion endpoint")
    p.add_argument("--endpoint", help="completion URL (CAK_LLM_ENDPOINT overrides)")
    p.add_argument("--model", help="model id (CAK_LLM_MODEL overrides)")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--max-tokens", type=int, default=1024)
    p.add_argument("--temperature", type=float, default=0.0)
    p.set_defaults(func=cmd_prompt)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (NotFound, NotAFocalMethod) as exc:
        log.error("%s", exc)
        return EXIT_NOT_FOUND
    except EndpointError as exc:
        log.error("%s", exc)
        return EXIT_ENDPOINT
    except (CakError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except Exception:
        log.exception("internal error")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
