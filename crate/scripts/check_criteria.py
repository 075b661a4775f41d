"""Grades the CSV outputs written by reproduce.sh, one PASS/FAIL line each."""
import csv
import math
import sys
from pathlib import Path


def rows(path):
    with open(path) as f:
        return list(csv.DictReader(line for line in f if not line.startswith("#")))


def landau(out):
    vals = [float(r["eigenvalue"]) for r in rows(out / "1/spectrum.csv")]
    worst = max(abs(v - math.sqrt(2 * max(1, round(v * v / 2)))) for v in vals)
    seen = {max(1, round(v * v / 2)) for v in vals}
    return worst < 1e-3 and {1, 2, 3} <= seen, f"{len(vals)} eigenvalues, max error {worst:.2e}"


def gap(out):
    inside = len(rows(out / "2/plus/spectrum.csv")) + len(rows(out / "2/minus/spectrum.csv"))
    half = float(rows(out / "2/b2/gap.csv")[0]["half_gap"])
    return inside == 0 and abs(half - 2) <= 0.01, f"{inside} eigenvalues in the gap, half-gap at B0=2 {half:.5f}"


def table(out):
    items = "".join(r["item"] or "-" for r in rows(out / "3/sweep.csv"))
    return items == "ccdeebb", f"labels {items}"


def accumulation(out):
    c = [int(r["count"]) for r in rows(out / "4/c/accumulation.csv")]
    e = [int(r["count"]) for r in rows(out / "4/e/accumulation.csv")]
    radii = [float(r["radius"]) for r in rows(out / "4/e/accumulation.csv")]
    mean_r, mean_e = sum(radii) / len(radii), sum(e) / len(e)
    slope = sum((r - mean_r) * (x - mean_e) for r, x in zip(radii, e)) / sum((r - mean_r) ** 2 for r in radii)
    labels = rows(out / "4/c/classify.csv")[0]["item"] + rows(out / "4/e/classify.csv")[0]["item"]
    half = c[len(c) // 2:]
    ok = labels == "ce" and len(set(half)) == 1 and all(b > a for a, b in zip(e, e[1:])) and slope > 0.5
    return ok, f"(c) {c}, (e) {e} slope {slope:.1f}"


def zero_modes(out):
    r = rows(out / "5/zeromode.csv")
    ident = max(float(x["dstar_rel_err"]) for x in r)
    res = max(float(x["residual_d"]) for x in r)
    order = min(float(x["fd_order"]) for x in r)
    return ident <= 1e-8 and res < 1e-3 and order >= 1.8, f"identity {ident:.1e}, residual {res:.1e}, order {order:.2f}"


def bounded(out):
    r = rows(out / "6/bound.csv")
    ratio = max(float(x["ratio"]) for x in r)
    grad = float(r[0]["grad_term"])
    lower = all(float(x["psi_over_omega"]) >= float(x["psi_lower_bound"]) for x in r)
    return ratio <= grad + 1e-6 and lower, f"max ratio {ratio:.4f} vs {grad:.4f}"


def quasimodes(out):
    r = rows(out / "7/quasimode.csv")
    t1 = max(float(x["T1"]) for x in r)
    s = [float(x["ratio_sum"]) for x in r]
    fd = [float(x["ratio_fd"]) for x in r]
    dec = all(b < a for a, b in zip(s, s[1:]))
    agree = all(abs(a / b - 1) <= 0.10 for a, b in zip(s, fd))
    ok = t1 < 1e-12 and dec and s[-1] < 0.05 and agree
    return ok, f"sum {[round(x, 4) for x in s]}, fd {[round(x, 4) for x in fd]}, within 10%: {agree}"


def ladder(out):
    r = rows(out / "8/ladder.csv")
    ok = all(
        float(x["phi_lower"]) <= float(x["phi_sq"]) <= float(x["phi_upper"])
        and float(x["psi_sq"]) >= float(x["psi_lower"])
        for x in r
    )
    return ok, f"{len(r)} cases"


def eigensolver(out):
    return (out / "9.status").read_text().strip() == "ok", "see 9.log"


def main():
    out = Path(sys.argv[1])
    checks = [landau, gap, table, accumulation, zero_modes, bounded, quasimodes, ladder, eigensolver]
    failed = 0
    for i, check in enumerate(checks, 1):
        ok, detail = check(out)
        failed += not ok
        print(f"criterion {i}: {'PASS' if ok else 'FAIL'} | {detail}")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
