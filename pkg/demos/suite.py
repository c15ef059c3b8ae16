"""
Running the command line and a job suite
========================================

"""

import json
import os
import subprocess
import sys
import tempfile

# a single audit; exit code 0 means every pair held
cmd = [sys.executable, "-m", "hmcx", "audit", "--ineq", "thm4", "--f", "x^2", "--h", "identity",
       "--m", "0.5", "--a", "1", "--b", "2", "--deterministic"]
proc = subprocess.run(cmd, capture_output=True, text=True)
print(proc.returncode)
print(proc.stdout[:400])

# a suite mixes job kinds; per-job seeds derive from the suite seed and index
config = {
    "seed": 7,
    "format": "csv",
    "jobs": [
        {"kind": "check", "f": "sqrt(x)", "h": "identity", "m": 1, "budget": 20000},
        {"kind": "audit", "ineq": "m2", "f": "x^2", "h": "identity", "m": 0.5, "a": 1, "b": 2},
        {"kind": "reduce", "case": "thm8-to-m3", "f": "x^2", "m": 0.5, "a": 0.5, "b": 2},
    ],
}
with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
    json.dump(config, fh)
proc = subprocess.run([sys.executable, "-m", "hmcx", "suite", "--config", fh.name], capture_output=True, text=True)
os.unlink(fh.name)

# exit 1: at least one job found a violation
print(proc.returncode)
print(proc.stdout)
