"""Command line front end: ``liability <verb> ...``.

Verbs
  sweep <scenario-file|bundled-name> --out PATH
  region-map --beta V --step V --out PATH
  verify --trials N --seed N [--property ID ...]
  show-thresholds --beta V --py V [--px V]

The worker-thread count comes from the ``LIABILITY_THREADS`` environment
variable (default 1).  Exit status is 0 only when every requested
computation succeeds and, for ``verify``, every property passes.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import List, Optional

from .equilibrium import fine_b, fine_u
from .model import CaseError, InformationEnvironment, ModelError, classify_case, critical_px, delta
from .oracle import PROPERTIES, property_sweep
from .sweep import load_scenario, region_map, run_sweep


def _num(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liability", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("sweep", help="run a parameter sweep and write a CSV table")
    p.add_argument("scenario", help="scenario file or bundled name (fig2a, fig2b, fig3a, fig3b)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("region-map", help="case labels and the equal-fines locus")
    p.add_argument("--beta", type=_num, required=True)
    p.add_argument("--step", type=_num, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("verify", help="run the property suites")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--property", action="append", choices=sorted(PROPERTIES), dest="properties")

    p = sub.add_parser("show-thresholds", help="print the critical fines and precision")
    p.add_argument("--beta", type=_num, required=True)
    p.add_argument("--py", type=_num, required=True)
    p.add_argument("--px", type=_num, default=None)
    return parser


def _show_thresholds(beta: float, p_y: float, p_x: Optional[float]) -> List[str]:
    star = critical_px(beta, p_y)
    lines = [f"p_x*: {'none' if star is None else f'{star:.12g}'}"]
    at = p_x if p_x is not None else star
    if at is None:
        return lines
    env = InformationEnvironment(beta, at, p_y)
    lines.append(f"p_x: {at:.12g}")
    lines.append(f"case: {classify_case(env).value}")
    for name, fn in (("F^u", fine_u), ("F^b", fine_b)):
        try:
            lines.append(f"{name}: {fn(env):.12g}")
        except CaseError:
            lines.append(f"{name}: undefined")
    lines.append(f"delta: {delta(env):.12g}")
    return lines


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "sweep":
            table = run_sweep(load_scenario(args.scenario))
            table.write(args.out)
            failed = sum(1 for r in table.rows if r["status"] != "ok")
            print(f"wrote {len(table.rows)} rows to {args.out} ({failed} flagged)")
            return 0
        if args.verb == "region-map":
            table = region_map(args.beta, args.step)
            table.write(args.out)
            print(f"wrote {len(table.rows)} rows to {args.out}")
            return 0
        if args.verb == "verify":
            ok = True
            for prop in args.properties or sorted(PROPERTIES):
                report = property_sweep(prop, args.trials, args.seed)
                status = "PASS" if report.passed else "FAIL"
                print(f"{status} {prop}: {report.trials - report.failures}/{report.trials}")
                if not report.passed:
                    print(f"  counterexample: {report.counterexample}")
                    ok = False
            return 0 if ok else 1
        if args.verb == "show-thresholds":
            print("\n".join(_show_thresholds(args.beta, args.py, args.px)))
            return 0
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
