"""Write the deterministic artifacts for the fixture projects into a directory.

For each fixture: the JSON snapshot and the DOT call graph.  Plus the rendered
test-generation prompt for ``Circle.area()``.  Running this twice must give
byte-identical files.

    python3 scripts/render_artifacts.py /tmp/out
"""

from __future__ import annotations

import argparse
from pathlib import Path

from cak import callgraph, testgen
from cak.session import AnalysisLevel, ToolkitConfig, create_session, schema_to_json

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
PROJECTS = {"java": FIXTURES / "java-project", "python": FIXTURES / "python-project"}


def render_all(out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name: str, text: str) -> None:
        path = out / name
        path.write_bytes(text.encode("utf-8"))
        written.append(path)

    sessions = {}
    for language, root in PROJECTS.items():
        session = create_session(ToolkitConfig(language, root, analysis_level=AnalysisLevel.CALL_GRAPH))
        sessions[language] = session
        emit(f"{language}_snapshot.json", schema_to_json(session) + "\n")
        emit(f"{language}_callgraph.dot", callgraph.get_call_graph(session).to_dot())
    ctx = testgen.build_testgen_context(sessions["java"], "com.acme.Circle", "area()", set())
    emit("circle_area_prompt.txt", testgen.render_testgen_prompt(ctx).text + "\n")
    return written


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="render snapshot, DOT and prompt artifacts")
    parser.add_argument("out", type=Path)
    args = parser.parse_args(argv)
    for path in render_all(args.out):
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
