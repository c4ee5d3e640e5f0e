"""Class-info extraction through the public API.

Collects what a retrieval-augmented code completion pipeline typically wants
for one class: its body, the names and bodies of its methods, the import
statements of its file and the files that declare its direct supertypes.
Hand-rolled, this takes a page of grammar queries and tree walking; here it
is a handful of API calls.

    python3 scripts/class_info_example.py tests/fixtures/java-project com.acme.Circle
"""

from __future__ import annotations

import argparse
import json

from cak import analysis
from cak.session import ToolkitConfig, create_session


def class_info(project_root: str, class_name: str, language: str = "java") -> dict:
    session = create_session(ToolkitConfig(language, project_root))
    details = analysis.get_class(session, class_name)
    methods = analysis.get_methods_in_class(session, class_name)
    unit = analysis.get_compilation_unit(session, analysis.get_source_file(session, class_name))
    module = analysis.module_of_type(session, class_name)
    parents = [analysis.resolve_type(session, s, module) for s in (*details.super_classes, *details.interfaces)]
    return {
        "class_name": details.type_name,
        "class_body": details.code_body,
        "method_names": [m.method_name for m in methods.values()],
        "method_bodies": [m.code_body for m in methods.values()],
        "imports": [i.raw_text for i in unit.imports],
        "parent_class_filenames": [analysis.get_source_file(session, p) for p in parents if p],
    }


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("project")
    parser.add_argument("class_name", help="qualified class name")
    parser.add_argument("--language", default="java")
    args = parser.parse_args(argv)
    print(json.dumps(class_info(args.project, args.class_name, args.language), indent=2))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
