"""Feed random bytes to the parsers and report anything that raises.

Half the inputs are uniform random bytes; the other half are fixture files
with random byte runs spliced in, which reach deeper into error recovery.
A native crash kills the process, so callers should check the exit status.

    python3 scripts/fuzz_parse.py --count 10000 --seed 7
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from cak.parsing import extract_module, parse_source

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
SEEDS = {
    "java": sorted((FIXTURES / "java-project").rglob("*.java")),
    "python": sorted((FIXTURES / "python-project").rglob("*.py")),
}
SUFFIX = {"java": ".java", "python": ".py"}


def random_input(rng: random.Random, language: str) -> bytes:
    if rng.random() < 0.5:
        return rng.randbytes(rng.randrange(0, 512))
    base = bytearray(rng.choice(SEEDS[language]).read_bytes())
    for _ in range(rng.randrange(1, 6)):
        pos = rng.randrange(0, len(base) + 1)
        cut = rng.randrange(0, 8)
        base[pos : pos + cut] = rng.randbytes(rng.randrange(0, 8))
    return bytes(base)


def fuzz(count: int, seed: int) -> list[str]:
    rng = random.Random(seed)
    failures = []
    for i in range(count):
        language = "java" if i % 2 == 0 else "python"
        data = random_input(rng, language)
        try:
            parse_source(language, data)
            extract_module(language, f"fuzz{i}{SUFFIX[language]}", data)
        except Exception as exc:  # noqa: BLE001 - any exception is a finding
            failures.append(f"input {i} ({language}, {len(data)} bytes): {type(exc).__name__}: {exc}")
    return failures


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="parser fuzz harness")
    parser.add_argument("--count", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    failures = fuzz(args.count, args.seed)
    for line in failures[:20]:
        print(line, file=sys.stderr)
    print(f"{args.count} inputs, {len(failures)} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
