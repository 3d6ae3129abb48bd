"""Run the acceptance criteria and write a JSON report.

usage: python scripts/run_acceptance.py [--only 1,5,9] [--out report.json]
"""

import argparse
import json
import sys
from dataclasses import dataclass, field

from weilform.verify import CRITERIA, run_criterion


@dataclass
class AcceptanceConfig:
    criteria: list = field(default_factory=lambda: sorted(CRITERIA))
    out: str | None = None


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--out")
    args = p.parse_args(argv)
    cfg = AcceptanceConfig(out=args.out)
    if args.only:
        cfg.criteria = [int(k) for k in args.only.split(",")]
    reports, code = {}, 0
    for k in cfg.criteria:
        rep = run_criterion(k)
        print(f"criterion {k:2d} {CRITERIA[k][0]}: {'PASS' if rep.passed else 'FAIL'}", flush=True)
        reports[k] = rep.to_json()
        code |= rep.exit_code
    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump(reports, fh, indent=1)
    return code


if __name__ == "__main__":
    sys.exit(main())
