"""Run the acceptance criteria and print one PASS/FAIL line each."""

import pathlib
import subprocess
import sys

root = pathlib.Path(__file__).resolve().parents[1]
proc = subprocess.run([sys.executable, "-m", "pytest", str(root / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"],
                      capture_output=True, text=True, cwd=root)
lines = [ln for ln in proc.stdout.splitlines() if ln.startswith(("PASS", "FAIL"))]
print("\n".join(lines))
print(f"{sum(ln.startswith('PASS') for ln in lines)}/{len(lines)} criteria pass")
sys.exit(proc.returncode)
