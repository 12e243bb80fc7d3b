"""Rewrite the CLI golden files in tests/golden from cases.json.

Run after an intentional output change, then review the diff:

    python3 scripts/regenerate_goldens.py
"""
import json
import subprocess
import sys
from pathlib import Path

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"


def run_case(case: dict, outdir: Path) -> subprocess.CompletedProcess:
    args = list(case["args"])
    if "csv" in case:
        args += ["--csv", str(outdir / case["csv"])]
    return subprocess.run(
        [sys.executable, "-m", "momgauge", *args],
        cwd=GOLDEN, capture_output=True, check=False,
    )


def main() -> int:
    cases = json.loads((GOLDEN / "cases.json").read_text())
    for case in cases:
        proc = run_case(case, GOLDEN)
        if proc.returncode != case["exit"]:
            print(f"{case['name']}: exit {proc.returncode}, expected {case['exit']}", file=sys.stderr)
            print(proc.stderr.decode(), file=sys.stderr)
            return 1
        (GOLDEN / f"{case['name']}.json").write_bytes(proc.stdout)
        print(f"wrote {case['name']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
