#!/usr/bin/env python3
"""Stress study on the two-dimensional model.

Runs the time-convergence ladder for three upwinding policies with the damped
Chebyshev scheme, extracts the spectrum of the scaled operator for the
region-restricted and the global fitting policy, and compares delta slices
near v = 0 across scheme families.  Writes plot-ready CSV files plus a JSON
summary into the output directory.
"""

import argparse
import csv
import json
from pathlib import Path

from stslab.experiments import (DEFAULT_LADDER, ConvergenceStudy, call,
                                default_heston_params, foulon_grid_v,
                                foulon_grid_x, run_delta_comparison,
                                run_time_convergence)
from stslab.operators import UpwindPolicy, assemble_heston, to_sparse
from stslab.schemes import rkc
from stslab.spectra import eigenvalues_dense, write_spectrum

POLICIES = (UpwindPolicy.FOULON_REGION, UpwindPolicy.PARTIAL_FITTING,
            UpwindPolicy.OSULLIVAN)


def slug(text: str) -> str:
    return (text.replace("(", "_").replace(")", "").replace("=", "")
            .replace(".", "p").replace(",", "_"))


def write_rows(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out/heston"))
    ap.add_argument("--m", type=int, default=100,
                    help="price-direction intervals")
    ap.add_argument("--n", type=int, default=50,
                    help="variance-direction intervals")
    ap.add_argument("--l-ref", type=int, default=4000,
                    help="steps for the Crank-Nicolson reference")
    ap.add_argument("--threads", type=int, default=1,
                    help="worker threads per ladder")
    ap.add_argument("--quick", action="store_true",
                    help="small grids and a short ladder for a fast pass")
    args = ap.parse_args(argv)

    params = default_heston_params()
    if args.quick:
        m, n, l_ref, ladder = 40, 20, 400, (10, 20, 40, 80, 200)
    else:
        m, n, l_ref, ladder = args.m, args.n, args.l_ref, DEFAULT_LADDER
    gx = foulon_grid_x(params.strike, m)
    gv = foulon_grid_v(n)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    summary: dict = {"grid": f"m={m},n={n}", "ladder": list(ladder)}

    for policy in POLICIES:
        study = ConvergenceStudy(
            params=params, gx=gx, gv=gv, policy=policy, family=rkc(10.0),
            payoff=call(params.strike), ladder=ladder, l_ref=l_ref,
            validate_reference=True, grid_label=f"m={m},n={n}",
            max_workers=args.threads)
        res = run_time_convergence(study)
        write_rows(out / f"convergence_{policy.value}.csv",
                   ["l", "rms_error", "osc_metric", "exploded",
                    "price_at_spot"],
                   ((r.l, repr(r.rms_error), repr(r.osc_metric),
                     str(r.exploded).lower(), repr(r.price_at_spot))
                    for r in res.reports))
        summary[policy.value] = {
            "reference_check": res.reference_check,
            "explosions": [r.l for r in res.reports if r.exploded],
        }
        print(f"{policy.value}:")
        for r in res.reports:
            flag = "  EXPLODED" if r.exploded else ""
            print(f"  l={r.l:>5d}  rms={r.rms_error:.4e}  "
                  f"osc={r.osc_metric:.4e}{flag}")

    for policy in (UpwindPolicy.FOULON_REGION, UpwindPolicy.PARTIAL_FITTING):
        op = assemble_heston(params, gx, gv, policy)
        spec = eigenvalues_dense(to_sparse(op), scale=params.expiry / 16.0)
        write_spectrum(spec, out / f"spectrum_{policy.value}.csv")
        summary.setdefault("spectrum", {})[policy.value] = {
            "max_real": spec.max_real, "max_abs_imag": spec.max_abs_imag}
        print(f"spectrum {policy.value}: max Re = {spec.max_real:.3e}, "
              f"max |Im| = {spec.max_abs_imag:.3e}")

    deltas = run_delta_comparison(params, gx, gv,
                                  UpwindPolicy.PARTIAL_FITTING, l=10)
    summary["delta_osc"] = {}
    for label, res in deltas.items():
        write_rows(out / f"delta_{slug(label)}.csv", ["x", "delta"],
                   ((repr(float(x)), repr(float(d)))
                    for x, d in zip(gx.nodes, res["delta"])))
        summary["delta_osc"][label] = res["osc"]
        print(f"delta osc {label}: {res['osc']:.4e}")

    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
