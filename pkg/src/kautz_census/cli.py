"""Command-line front end.

Exit codes: 0 pass, 1 identity failure, 2 usage, 3 resource cap,
4 missing calibration, 5 calibration failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

from . import __version__
from .errors import CalibrationError, KautzError
from .necklace import necklace_count
from .oracle import delta_census, rho_census, sigma_census, verify_identities
from .tables import build_tables, cross_check, extend, seed
from .transfer import (
    REFERENCE_DELTAS,
    MaskSchedule,
    build_transfer,
    calibrate_schedule,
    dump_schedule,
    load_schedule,
    per_start_counts,
    pin_schedule,
)
from .words import GraphParams

SCHEDULE_ENV = "KAUTZ_SCHEDULE"
CONVENTION = {"word_length": "m = D", "edge_count": "(d+1)*d^D", "row_offset": 0}


def _counts_body(counts: dict[int, int]) -> dict[str, str]:
    return {str(k): str(v) for k, v in sorted(counts.items())}


def render_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def render_csv(rows: list[tuple[int, int, int, str, int]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["d", "D", "k", "kind", "count"])
    for d, D, k, kind, count in rows:
        writer.writerow([d, D, k, kind, str(count)])
    return buf.getvalue()


def parse_json_document(text: str) -> tuple[dict, dict]:
    doc = json.loads(text)
    return doc["meta"], doc["body"]


def parse_csv_document(text: str) -> dict[tuple[int, int, str], dict[int, int]]:
    """``(d, D, kind) -> {k: count}`` from the CSV table format."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != ["d", "D", "k", "kind", "count"]:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    out: dict[tuple[int, int, str], dict[int, int]] = {}
    for row in reader:
        key = (int(row["d"]), int(row["D"]), row["kind"])
        out.setdefault(key, {})[int(row["k"])] = int(row["count"])
    return out


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=target.name, suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, target)


def _meta(**extra) -> dict:
    meta = {"convention": CONVENTION, "tool_version": __version__}
    meta.update(extra)
    return meta


def _schedule_path(arg: str | None) -> str:
    return arg or os.environ.get(SCHEDULE_ENV, "schedule.json")


def _load_masks(path: str | None) -> dict[int, list[int]] | None:
    if path is None:
        return None
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return {int(s): list(diag) for s, diag in raw.items()}


def _document(args, meta: dict, body: dict, csv_rows, extra: dict | None = None) -> str:
    if getattr(args, "format", "json") == "csv":
        return render_csv(csv_rows)
    doc = {"meta": meta, "body": body}
    doc.update(extra or {})
    return render_json(doc)


# --- commands ------------------------------------------------------------------


def cmd_spectrum(args) -> int:
    params = GraphParams(args.d, args.D)
    schedule = None
    if args.method == "oracle":
        if args.kind == "rho":
            spec = rho_census(params, cap=args.cap)
        else:
            spec = sigma_census(params, pair_cap=args.pair_cap)
        counts = spec.counts
    else:
        if args.delta_source != "oracle":
            schedule = load_schedule(_schedule_path(args.schedule))
        D0 = min(3, args.D)
        tables = extend(seed(args.d, D0, cap=args.cap), args.D, args.delta_source, schedule=schedule, cap=args.cap)
        row = tables[args.D]
        counts = (row.rho if args.kind == "rho" else row.sigma).counts
    meta = _meta(
        d=args.d,
        D=args.D,
        kind=args.kind,
        method=args.method,
        delta_source=args.delta_source if args.method == "recursion" else None,
        schedule=schedule.descriptor() if schedule else None,
    )
    rows = [(args.d, args.D, k, args.kind, v) for k, v in sorted(counts.items())]
    _emit(_document(args, meta, _counts_body(counts), rows), args.out)
    return 0


def cmd_delta(args) -> int:
    GraphParams(args.d, args.D)
    extra = None
    schedule = None
    if args.method == "oracle":
        counts = delta_census(args.d, args.D, cap=args.cap).counts
    else:
        schedule = load_schedule(_schedule_path(args.schedule))
        system = build_transfer(args.d + 1, _load_masks(args.masks))
        # A row+1 schedule has no value at k = D; list it rather than guess.
        ks = [k for k in range(1, args.D + 1) if k <= schedule.formula_row(args.D)]
        per_start = {k: per_start_counts(system, schedule, args.d, args.D, k) for k in ks}
        counts = {k: system.n * v[0] for k, v in per_start.items()}
        extra = {"per_start": {str(k): [str(x) for x in v] for k, v in per_start.items()}}
    meta = _meta(
        d=args.d, D=args.D, kind="delta", method=args.method,
        schedule=schedule.descriptor() if schedule else None,
    )
    if schedule is not None:
        meta["out_of_domain"] = [k for k in range(1, args.D + 1) if k not in counts]
    rows = [(args.d, args.D, k, "delta", v) for k, v in sorted(counts.items())]
    _emit(_document(args, meta, _counts_body(counts), rows, extra), args.out)
    return 0


def cmd_verify(args) -> int:
    census = verify_identities(args.d, args.D_max, D_min=args.D_min, cap=args.cap)
    D0 = max(args.D_min, min(3, args.D_max))
    tables = build_tables(args.d, args.D_max, "oracle", D0=D0)
    table_report = cross_check(tables)
    passed = census["passed"] and table_report["passed"]
    if args.strict:
        passed = passed and table_report["claim_failures"] == 0
    failing = [r for r in census["records"] + table_report["records"] if not r["passed"]]
    body = {
        "passed": passed,
        "census": {k: census[k] for k in ("passed", "checked", "failures")},
        "tables": {k: table_report[k] for k in ("passed", "checked", "failures", "claim_failures")},
        "failing_records": failing,
    }
    if args.full:
        body["census"]["records"] = census["records"]
        body["tables"]["records"] = table_report["records"]
    meta = _meta(d=args.d, D_range=[args.D_min, args.D_max], method="verify", strict=args.strict)
    _emit(render_json({"meta": meta, "body": body}), args.out)
    return 0 if passed else 1


def cmd_necklace(args) -> int:
    result = necklace_count(args.n, args.q, args.method, cap=args.cap)
    body = {
        "primitive_count": str(result.primitive_count),
        "oriented_edge_count": str(result.oriented_edge_count),
    }
    _emit(render_json({"meta": _meta(n=args.n, q=args.q, method=args.method), "body": body}), args.out)
    return 0


def _mismatch_table(report: dict) -> str:
    lines = [f"{'schedule':<52} {'mismatches':>10} {'ref':>6} {'chosen':>7}"]
    for c in report["candidates"]:
        lines.append(
            f"{c['label']:<52} {c['mismatches']:>10} "
            f"{c['reference_values_reproduced']:>3}/{len(REFERENCE_DELTAS)} {'yes' if c['chosen'] else '':>7}"
        )
    lines.append(f"outcome: {report['outcome']}")
    return "\n".join(lines) + "\n"


def cmd_calibrate(args) -> int:
    code = 0
    try:
        _, report = calibrate_schedule(args.d, range(args.D_min, args.D_max + 1))
    except CalibrationError as exc:
        report = exc.report
        print(f"calibration failed: {exc}", file=sys.stderr)
        code = exc.exit_code
    if args.pin:
        report = pin_schedule(report, MaskSchedule.from_label(args.pin))
        code = 0
    _emit(dump_schedule(report), args.out)
    sys.stdout.write(_mismatch_table(report))
    return code


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kautz-census", description="Exact edge-girth censuses of Kautz digraphs")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--out", help="write the document here instead of stdout")
        p.add_argument("--cap", type=int, default=None, help="override the enumeration cap")
        if fmt:
            p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("spectrum", help="rho or sigma spectrum of one row")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--kind", choices=("rho", "sigma"), default="rho")
    p.add_argument("--method", choices=("oracle", "recursion"), default="oracle")
    p.add_argument("--delta-source", choices=("oracle", "transfer", "recursion"), default="oracle")
    p.add_argument("--schedule", help=f"frozen schedule file (default ${SCHEDULE_ENV} or ./schedule.json)")
    p.add_argument("--pair-cap", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("delta", help="delta row of one D")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--method", choices=("oracle", "transfer"), default="oracle")
    p.add_argument("--schedule")
    p.add_argument("--masks", help="JSON file {offset: [0/1 diagonal]} for q != 3")
    common(p)
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("verify", help="run every identity check")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--D-max", dest="D_max", type=int, required=True)
    p.add_argument("--D-min", dest="D_min", type=int, default=1)
    p.add_argument("--strict", action="store_true", help="also fail on the necklace top-value claim")
    p.add_argument("--full", action="store_true", help="include every record, not only failures")
    common(p, fmt=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("necklace", help="primitive proper necklace count")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--method", choices=("formula", "enumerate"), default="formula")
    common(p, fmt=False)
    p.set_defaults(func=cmd_necklace)

    p = sub.add_parser("calibrate", help="resolve the mask schedule against the oracle")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--D-max", dest="D_max", type=int, required=True)
    p.add_argument("--D-min", dest="D_min", type=int, default=2)
    p.add_argument("--out", default="schedule.json")
    p.add_argument("--pin", help="freeze this schedule label even if it does not match")
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KautzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
