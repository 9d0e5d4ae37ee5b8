"""Row-by-row propagation of rho / sigma / delta tables.

A new row ``D`` is assembled from row ``D - 1`` without enumerating the graph:

* ``rho_k(D) = rho_k(D-1) + delta_k(D)`` for ``k < D``;
* ``rho_D(D)`` closes the edge partition ``sum_k rho_k = |E|``;
* ``sigma_1(D) = |E|`` and ``sigma_{k+1}(D) = d^2 sigma_k(D-1) - rho_k(D-1)``.

Only the delta values need an outside source: the oracle, the transfer
product, or the transfer product restricted to the non-vanishing window.
Every cell records which of those produced it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

from .errors import ConsistencyError, DomainError, NegativeResult, NotApplicable
from .necklace import rho_top_closed_form
from .oracle import (
    DeltaRow,
    Spectrum,
    delta_census,
    delta_from_rows,
    rho_census,
    sigma_census,
    window_start,
)
from .transfer import MaskSchedule, TransferSystem, build_transfer, delta_by_transfer
from .words import GraphParams

Provenance = Literal["oracle", "transfer", "recursion", "closed_form", "closure"]
DeltaSource = Callable[[int, int], tuple[dict[int, int], dict[int, str]]]

CLAIMS = frozenset({"necklace_top"})


@dataclass(frozen=True)
class Row:
    rho: Spectrum
    sigma: Spectrum
    delta: DeltaRow
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class TableSet:
    d: int
    rows: dict[int, Row] = field(default_factory=dict)
    provenance: dict[tuple[int, int, str], str] = field(default_factory=dict)

    def __getitem__(self, D: int) -> Row:
        return self.rows[D]

    @property
    def D_range(self) -> list[int]:
        return sorted(self.rows)

    def cells(self) -> dict[tuple[int, int, str], int]:
        out = {}
        for D, row in self.rows.items():
            for k in range(1, D + 1):
                out[D, k, "rho"] = row.rho[k]
                out[D, k, "sigma"] = row.sigma[k]
                out[D, k, "delta"] = row.delta[k]
        return out


def sigma_step(sigma_k: int, rho_k: int, d: int) -> int:
    """sigma_{k+1} of the line digraph from sigma_k and rho_k of the base graph."""
    out = d * d * sigma_k - rho_k
    if out < 0:
        raise NegativeResult(f"d^2*sigma_k - rho_k = {d * d}*{sigma_k} - {rho_k} < 0")
    return out


def census_row(d: int, D: int, sigma: bool = True, cap: int | None = None) -> Row:
    p = GraphParams(d, D)
    rho = rho_census(p, cap=cap)
    prev = rho_census(GraphParams(d, D - 1), cap=cap) if D >= 2 else None
    sig = sigma_census(p) if sigma else Spectrum(p, "sigma", {})
    return Row(rho, sig, delta_from_rows(d, D, rho, prev))


def seed(d: int, D0: int = 3, cap: int | None = None) -> TableSet:
    row = census_row(d, D0, cap=cap)
    prov = {(D0, k, kind): "oracle" for k in range(1, D0 + 1) for kind in ("rho", "sigma", "delta")}
    return TableSet(d, {D0: row}, prov)


def census_tables(d: int, D_max: int, D_min: int = 1, cap: int | None = None) -> TableSet:
    """Every row straight from the brute-force censuses (all-pairs sigma included)."""
    rows, prov = {}, {}
    for D in range(D_min, D_max + 1):
        rows[D] = census_row(d, D, cap=cap)
        prov.update({(D, k, kind): "oracle" for k in range(1, D + 1) for kind in ("rho", "sigma", "delta")})
    return TableSet(d, rows, prov)


# --- delta sources -------------------------------------------------------------


def oracle_source(cap: int | None = None) -> DeltaSource:
    def source(d: int, D: int) -> tuple[dict[int, int], dict[int, str]]:
        row = delta_census(d, D, cap=cap)
        return {k: row[k] for k in range(1, D)}, {k: "oracle" for k in range(1, D)}

    return source


def transfer_source(schedule: MaskSchedule, system: TransferSystem | None = None) -> DeltaSource:
    def source(d: int, D: int) -> tuple[dict[int, int], dict[int, str]]:
        sys_ = system or build_transfer(d + 1)
        vals = {k: delta_by_transfer(sys_, schedule, d, D, k) for k in range(1, D)}
        return vals, {k: "transfer" for k in vals}

    return source


def recursion_source(schedule: MaskSchedule, system: TransferSystem | None = None) -> DeltaSource:
    """Zero below floor(D/2) + 2, transfer product inside the window."""

    def source(d: int, D: int) -> tuple[dict[int, int], dict[int, str]]:
        sys_ = system or build_transfer(d + 1)
        vals, prov = {}, {}
        for k in range(1, D):
            if k < window_start(D):
                vals[k], prov[k] = 0, "recursion"
            else:
                vals[k], prov[k] = delta_by_transfer(sys_, schedule, d, D, k), "transfer"
        return vals, prov

    return source


def _resolve_source(
    delta_source: str | DeltaSource, schedule: MaskSchedule | None, cap: int | None
) -> DeltaSource:
    if callable(delta_source):
        return delta_source
    if delta_source == "oracle":
        return oracle_source(cap)
    if delta_source in ("transfer", "recursion"):
        if schedule is None:
            raise DomainError(f"delta source {delta_source!r} needs a mask schedule")
        return transfer_source(schedule) if delta_source == "transfer" else recursion_source(schedule)
    raise DomainError(f"unknown delta source {delta_source!r}")


def _next_row(
    tables: TableSet, source: DeltaSource, necklace: str
) -> tuple[int, Row, dict[tuple[int, int, str], str]]:
    d = tables.d
    prev_D = max(tables.rows)
    prev = tables.rows[prev_D]
    D = prev_D + 1
    p = GraphParams(d, D)
    delta, dprov = source(d, D)
    prov: dict[tuple[int, int, str], str] = {}

    rho = {}
    for k in range(1, D):
        rho[k] = prev.rho[k] + delta[k]
        if rho[k] < 0:
            raise ConsistencyError(f"rho_{k}(d={d}, D={D}) would be negative ({rho[k]})")
        prov[D, k, "rho"] = "recursion"
        prov[D, k, "delta"] = dprov[k]
    top = p.edge_count - sum(rho.values())
    if top < 0:
        raise ConsistencyError(
            f"partition closure gives rho_{D}(d={d}, D={D}) = {top} < 0",
            {"closure": top},
        )
    rho[D] = top
    delta = {**{k: delta[k] for k in range(1, D)}, D: top}
    prov[D, D, "rho"] = "closure"
    prov[D, D, "delta"] = "closure"

    sigma = {1: p.edge_count}
    prov[D, 1, "sigma"] = "closed_form"
    for k in range(1, D):
        sigma[k + 1] = sigma_step(prev.sigma[k], prev.rho[k], d)
        prov[D, k + 1, "sigma"] = "recursion"

    notes = [f"closure constant |E| = (d+1)*d^D = {p.edge_count}"]
    try:
        closed = rho_top_closed_form(d, D)
    except NotApplicable:
        closed = None
    if closed is not None and closed != top:
        if necklace == "strict":
            raise ConsistencyError(
                f"closure top {top} differs from the necklace closed form {closed} at D={D}",
                {"closure": top, "necklace": closed},
            )
        notes.append(f"necklace closed form {closed} differs from closure top {top}")

    row = Row(Spectrum(p, "rho", rho), Spectrum(p, "sigma", sigma), DeltaRow(d, D, delta), tuple(notes))
    return D, row, prov


def extend(
    tables: TableSet,
    to_D: int,
    delta_source: str | DeltaSource = "oracle",
    schedule: MaskSchedule | None = None,
    necklace: str = "record",
    cap: int | None = None,
) -> TableSet:
    """Return a new table set extended row by row up to ``to_D``.

    ``necklace="strict"`` halts with :class:`ConsistencyError` (both candidate
    values attached) when the closure top disagrees with the necklace closed
    form; ``"record"`` keeps going and notes the disagreement on the row.
    """
    if not tables.rows:
        raise DomainError("extend needs a seeded table")
    if necklace not in ("record", "strict"):
        raise DomainError(f"necklace policy must be 'record' or 'strict', got {necklace!r}")
    source = _resolve_source(delta_source, schedule, cap)
    rows = dict(tables.rows)
    prov = dict(tables.provenance)
    current = TableSet(tables.d, rows, prov)
    while max(rows) < to_D:
        D, row, new_prov = _next_row(current, source, necklace)
        rows[D] = row
        prov.update(new_prov)
        current = TableSet(tables.d, rows, prov)
    return current


def build_tables(
    d: int,
    D_max: int,
    route: str = "oracle",
    schedule: MaskSchedule | None = None,
    D0: int = 3,
    necklace: str = "record",
) -> TableSet:
    """``census`` enumerates every row; other routes seed at ``D0`` and extend."""
    if route == "census":
        return census_tables(d, D_max)
    return extend(seed(d, D0), D_max, route, schedule=schedule, necklace=necklace)


# --- checks -----------------------------------------------------------------------


def _rec(identity: str, D: int, k: int | None, expected, actual, passed: bool) -> dict:
    return {
        "identity": identity,
        "category": "claim" if identity in CLAIMS else "identity",
        "D": D,
        "k": k,
        "expected": str(expected),
        "actual": str(actual),
        "passed": bool(passed),
    }


def cross_check(tables: TableSet) -> dict:
    """Check every table invariant cell by cell.

    Records in the ``claim`` category (the necklace top value) are
    reported but do not decide ``passed``.
    """
    d = tables.d
    records: list[dict] = []
    for D in tables.D_range:
        row = tables.rows[D]
        p = GraphParams(d, D)
        records.append(_rec("rho_partition", D, None, p.edge_count, row.rho.total(), row.rho.total() == p.edge_count))
        if row.sigma.counts:
            pairs = p.vertex_count * (p.vertex_count - 1)
            records.append(_rec("sigma_partition", D, None, pairs, row.sigma.total(), row.sigma.total() == pairs))
        for k in range(1, D + 1):
            records.append(_rec("delta_nonnegative", D, k, ">= 0", row.delta[k], row.delta[k] >= 0))
        for k in range(1, D):
            if k < window_start(D):
                records.append(_rec("vanishing_window", D, k, 0, row.delta[k], row.delta[k] == 0))
            else:
                records.append(_rec("window_positivity", D, k, "> 0", row.delta[k], row.delta[k] > 0))
        if D - 1 in tables.rows:
            prev = tables.rows[D - 1]
            for k in range(1, D):
                want = prev.rho[k] + row.delta[k]
                records.append(_rec("decomposition", D, k, want, row.rho[k], row.rho[k] == want))
            if prev.sigma.counts and row.sigma.counts:
                for k in range(1, D):
                    want = d * d * prev.sigma[k] - prev.rho[k]
                    got = row.sigma[k + 1]
                    records.append(_rec("sigma_recursion", D - 1, k, want, got, got == want))
        if D >= 2:
            closed = rho_top_closed_form(d, D)
            records.append(_rec("necklace_top", D, D, closed, row.rho[D], closed == row.rho[D]))
    identity_failures = [r for r in records if not r["passed"] and r["category"] == "identity"]
    claim_failures = [r for r in records if not r["passed"] and r["category"] == "claim"]
    return {
        "passed": not identity_failures,
        "checked": len(records),
        "failures": len(identity_failures),
        "claim_failures": len(claim_failures),
        "records": records,
    }


def compare_tables(a: TableSet, b: TableSet) -> list[dict]:
    """Cells present in both sets whose values differ."""
    ca, cb = a.cells(), b.cells()
    diffs = []
    for key in sorted(set(ca) & set(cb)):
        if ca[key] != cb[key]:
            D, k, kind = key
            diffs.append({"D": D, "k": k, "kind": kind, "left": str(ca[key]), "right": str(cb[key])})
    return diffs
