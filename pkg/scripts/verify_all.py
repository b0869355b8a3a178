"""Run every verification check, write the report, and print a per-check
summary (rows, failures, excluded points, worst residual, time)."""

import argparse
import sys
import time

from qortho import cli, verification


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="verify_report.csv")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = verification.SweepConfig(seed=args.seed)
    rows, failed_total = [], 0
    print(f"{'check':20s} {'rows':>6s} {'failed':>6s} {'excl':>5s} {'worst':>9s} {'time':>7s}")
    for iid in verification.check_ids():
        t0 = time.perf_counter()
        part = verification.run_checks([iid], cfg)
        dt = time.perf_counter() - t0
        failed = sum(r.failed for r in part)
        excluded = sum(r.passed == verification.EXCLUDED for r in part)
        worst = max((r.residual for r in part if r.passed != verification.EXCLUDED), default=0.0)
        print(f"{iid:20s} {len(part):6d} {failed:6d} {excluded:5d} {worst:9.1e} {dt:6.1f}s")
        rows.extend(part)
        failed_total += failed
    rows.sort(key=lambda r: (r.identity_id, r.param_json))
    cli.emit([r.as_record() for r in rows], cli.REPORT_COLUMNS, cli.RunConfig("verify", output=args.out))
    print(f"{len(rows)} rows, {failed_total} failed; report written to {args.out}")
    return 1 if failed_total else 0


if __name__ == "__main__":
    sys.exit(main())
