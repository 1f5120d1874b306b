#!/usr/bin/env python3
"""Run the harmonic-vs-quartic equivalence experiment and print a table.

Both scenarios start from the same Gaussian ensemble; the harmonic run
must keep all three engines indistinguishable while the quartic run
shows the growing gap between classical transport and the commutator
engine.
"""

import argparse
from pathlib import Path

from liouq import emit_outputs, load_scenario, run_equivalence_study

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/equivalence")
    args = parser.parse_args()

    failed = False
    for name in ("harmonic_equivalence.cfg", "quartic_divergence.cfg"):
        scenario = load_scenario(SCENARIOS / name)
        report, curves = run_equivalence_study(scenario)
        outdir = Path(args.out) / name.removesuffix(".cfg")
        emit_outputs(report, curves, outdir)
        print(f"== {name} (hash {report.scenario_hash}) -> {outdir}")
        times = curves["times"]
        dist = curves["distances"]["classical_vs_vonneumann"]["maxnorm"]
        for t, d in zip(times, dist):
            print(f"   t={t:6.3f}  classical-vs-commutator max|diff| = {d:.3e}")
        for check, result in report.checks.items():
            mark = "PASS" if result.passed else "FAIL"
            print(f"   {mark} {check}: {result.observed:.3e}")
        failed |= not report.passed
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
