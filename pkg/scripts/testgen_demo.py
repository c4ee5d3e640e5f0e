"""Unit-test generation pipeline on a project, start to finish.

Lists focal methods, builds the prompt for one of them, optionally sends it
to a completion endpoint and sanitizes whatever comes back.  Without an
endpoint a canned reply stands in for the model, so the post-processing step
is still visible.

    python3 scripts/testgen_demo.py tests/fixtures/java-project com.acme.Circle "area()"
    python3 scripts/testgen_demo.py PROJECT CLASS METHOD --endpoint http://localhost:8080/complete
"""

from __future__ import annotations

import argparse

from cak import testgen
from cak.prompting import LLMEndpointConfig, execute_prompt, render
from cak.session import AnalysisLevel, ToolkitConfig, create_session

CANNED = """Here is a test:
```java
import org.junit.Assert;
import org.junit.Assert;

public class GeneratedTest {
    public void testFocal() {
        Assert.assertTrue(true);
    }
}
```
"""


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="test generation demo")
    parser.add_argument("project")
    parser.add_argument("class_name")
    parser.add_argument("method")
    parser.add_argument("--language", default="java")
    parser.add_argument("--mockable", action="append", default=[])
    parser.add_argument("--endpoint")
    parser.add_argument("--model", default="default")
    args = parser.parse_args(argv)

    session = create_session(ToolkitConfig(args.language, args.project, analysis_level=AnalysisLevel.CALL_GRAPH))
    print("focal methods of", args.class_name + ":", ", ".join(testgen.identify_focal_methods(session, args.class_name)))

    ctx = testgen.build_testgen_context(session, args.class_name, args.method, set(args.mockable))
    prompt = testgen.render_testgen_prompt(ctx)
    print("\n--- prompt ---\n" + prompt.text)

    if args.endpoint:
        reply = execute_prompt(LLMEndpointConfig(args.endpoint, args.model), prompt)
    else:
        reply = CANNED
    package = args.class_name.rpartition(".")[0]
    report = testgen.sanitize_generated_output(args.language, reply, package, ["org.junit.Test"])
    print("\n--- sanitized ---")
    print("fixes:", ", ".join(f.value for f in report.fixes_applied) or "none")
    print("parsable:", report.parsable)
    print(report.final_code)
    if not report.parsable:
        print("--- feedback prompt ---")
        retry = testgen.feedback_prompt(testgen.build_testgen_prompt(ctx), report)
        print(render(retry, {"context": ctx}).text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
