"""Run the acceptance criteria and print one PASS/FAIL line per criterion."""
import argparse
import pathlib
import sys

import pytest


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-k", help="pytest -k expression, e.g. 'c01 or c07'")
    args = ap.parse_args()
    root = pathlib.Path(__file__).resolve().parent.parent
    argv = [str(root / "tests" / "test_acceptance.py"), "-q", "-s", "-p", "no:cacheprovider"]
    if args.k:
        argv += ["-k", args.k]
    sys.exit(pytest.main(argv))


if __name__ == "__main__":
    main()
