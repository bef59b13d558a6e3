#!/usr/bin/env python3
"""Reproduce the campaign's two headline scans at one percent trial counts.

Runs the click / no-click phase scan (with the per-photon-phase fit from
the no-click column) and the differential-versus-overlap scan (with the
one-parameter amplified-split fit), writing CSV + fit JSON under results/.
"""

import subprocess
import sys
from pathlib import Path

RESULTS = Path(__file__).resolve().parents[1] / "results"
SEED = "20260808"
SCALE = "0.01"


def main() -> None:
    RESULTS.mkdir(exist_ok=True)
    for command, name in (("fig3", "phase_scan"), ("fig4", "differential_scan")):
        out = RESULTS / f"{name}.csv"
        argv = [
            sys.executable,
            "-m",
            "wva_sim.cli",
            command,
            "--seed",
            SEED,
            "--trials-scale",
            SCALE,
            "--workers",
            "4",
            "--out",
            str(out),
        ]
        print("+", " ".join(argv[2:]))
        subprocess.run(argv, check=True)
        print(f"  wrote {out}")


if __name__ == "__main__":
    main()
