from __future__ import annotations

import subprocess
import sys
from pathlib import Path

from conftest import JAVA_PROJECT

SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"


def run(name, *args):
    return subprocess.run([sys.executable, str(SCRIPTS / name), *args], capture_output=True, text=True, timeout=120)


def test_testgen_demo_sanitizes_canned_reply():
    proc = run("testgen_demo.py", str(JAVA_PROJECT), "com.acme.Circle", "area()")
    assert proc.returncode == 0, proc.stderr
    assert "fixes: ADDED_TEST_ANNOTATION, ADDED_PACKAGE, MERGED_IMPORTS" in proc.stdout
    assert "parsable: True" in proc.stdout


def test_class_info_example_cli():
    proc = run("class_info_example.py", str(JAVA_PROJECT), "com.acme.Circle")
    assert proc.returncode == 0, proc.stderr
    assert '"com/acme/AbstractShape.java"' in proc.stdout


def test_fuzz_script_small_run():
    proc = run("fuzz_parse.py", "--count", "50", "--seed", "3")
    assert proc.returncode == 0 and "50 inputs, 0 failures" in proc.stdout
