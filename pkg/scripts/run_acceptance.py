"""Run the acceptance suite with per-criterion PASS/FAIL lines visible.

Usage:  python scripts/run_acceptance.py
"""

import sys
from pathlib import Path

import pytest

if __name__ == "__main__":
    target = Path(__file__).resolve().parents[1] / "tests" / "test_acceptance.py"
    sys.exit(pytest.main(["-v", "-s", str(target)]))
