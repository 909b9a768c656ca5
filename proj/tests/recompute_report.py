#!/usr/bin/env python3
"""Recomputes report.json from the raw trace files and goal XML in a run directory.

Usage: recompute_report.py <run-dir>. Exits 1 on any mismatch beyond 1e-9 relative.
"""

import json
import sys
import xml.etree.ElementTree as ET
from pathlib import Path


def close(a, b, rel=1e-9):
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def required_pegs(goal_file):
    root = ET.parse(goal_file).getroot()
    return sum(1 for c in root.iter("connection") if c.get("requires_peg") == "true")


def main(run_dir):
    run = Path(run_dir)
    report = json.loads((run / "report.json").read_text())
    problems = []
    goal_pct, goal_time = [], []
    for g in report["goals"]:
        gid = g["goal"]
        required = required_pegs(run / "goals" / f"{gid}.xml")
        if required != g["required_pegs"]:
            problems.append(f"{gid}: required_pegs {g['required_pegs']} vs {required} in goal file")
        pcts, times = [], []
        for t in g["trials"]:
            lines = (run / t["trace"]).read_text().splitlines()
            events = [json.loads(line) for line in lines[1:]]
            inserted = sum(1 for e in events if e["kind"] == "peg_inserted")
            ends = [e["t_s"] for e in events if e["kind"] == "run_ended"]
            if len(ends) != 1 or events[-1]["kind"] != "run_ended":
                problems.append(f"{t['trace']}: run_ended must be the single last event")
                continue
            if not g["planned"]:
                pct = 0.0
            elif required == 0:
                pct = 100.0
            else:
                pct = 100.0 * inserted / required
            if not close(pct, t["final_completion_pct"]):
                problems.append(f"{t['trace']}: completion {pct} vs {t['final_completion_pct']}")
            if not close(ends[0], t["total_time_s"]):
                problems.append(f"{t['trace']}: time {ends[0]} vs {t['total_time_s']}")
            pcts.append(pct)
            times.append(ends[0])
        if len(pcts) != 5:
            problems.append(f"{gid}: {len(pcts)} usable trials")
            continue
        mp, mt = sum(pcts) / len(pcts), sum(times) / len(times)
        if not close(mp, g["mean_success_pct"]):
            problems.append(f"{gid}: mean success {mp} vs {g['mean_success_pct']}")
        if not close(mt, g["mean_time_s"]):
            problems.append(f"{gid}: mean time {mt} vs {g['mean_time_s']}")
        goal_pct.append(mp)
        goal_time.append(mt)
    if goal_pct:
        sp, st = sum(goal_pct) / len(goal_pct), sum(goal_time) / len(goal_time)
        if not close(sp, report["summary"]["mean_success_pct"]):
            problems.append(f"summary success {sp} vs {report['summary']['mean_success_pct']}")
        if not close(st, report["summary"]["mean_time_s"]):
            problems.append(f"summary time {st} vs {report['summary']['mean_time_s']}")
    for p in problems:
        print(p)
    print("recomputation: " + ("OK" if not problems else f"{len(problems)} mismatches"))
    return 0 if not problems else 1


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print(__doc__)
        sys.exit(2)
    sys.exit(main(sys.argv[1]))
