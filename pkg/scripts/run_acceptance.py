"""Run acceptance criteria 1-12 and print one PASS/FAIL line each.

Usage: python3 scripts/run_acceptance.py
"""
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

import test_acceptance  # noqa: E402


def main() -> int:
    failed = 0
    for name in sorted(n for n in dir(test_acceptance) if n.startswith("test_criterion_")):
        try:
            getattr(test_acceptance, name)()
        except AssertionError:
            failed += 1
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
