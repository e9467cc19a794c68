"""The file-driven pipeline: analyze a spec, build a frame, verify it.

Everything the library does is reachable through three subcommands; frames
are serialized with their verifier residuals and can be re-checked from
the raw data alone.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

SPECS = Path(__file__).resolve().parent / "specs"


def run(*args):
    cmd = [sys.executable, "-m", "normframes.cli", *args]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    print("$ normframes", " ".join(args), f"-> exit {proc.returncode}")
    if proc.stderr:
        print("  ", proc.stderr.strip())
    return proc


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    polar = str(SPECS / "polar_euclidean.json")
    sphere = str(SPECS / "unit_sphere.json")

    report = tmp / "polar_report.json"
    run("analyze", polar, "--at", "r=1,theta=0.5", "--out", str(report))
    verdicts = json.loads(report.read_text())["verdicts"]
    print("   flat:", verdicts["flat"], )
    print("   linear at point:", verdicts["linear_at_point"]["value"])

    frame = tmp / "polar_flat_frame.json"
    run("frame", polar, "flat", "--grid", "11x11", "--out", str(frame))
    run("verify", polar, str(frame), "--tol", "1e-6", "--out", str(tmp / "verdict.json"))
    print("   verifier:", json.loads((tmp / "verdict.json").read_text())["pass"])

    # tampering with one node is caught and localized
    doc = json.loads(frame.read_text())
    doc["data"]["matrices"][5][5][0][0] += 0.1
    bad = tmp / "tampered.json"
    bad.write_text(json.dumps(doc))
    proc = run("verify", polar, str(bad), "--tol", "1e-6", "--out", str(tmp / "bad.json"))
    detail = json.loads((tmp / "bad.json").read_text())["detail"]
    print("   tampered node flagged near:", detail["worst_edge"])

    # curvature blocks neighborhood frames: exit code 5 carries the verdict
    run("frame", sphere, "flat", "--grid", "5x5", "--out", str(tmp / "nope.json"))
