"""Terminal-letter transfer matrix and the masked product for delta rows.

The state space is the ``n = q(q-1)`` ordered pairs ``[l, r]`` with ``l != r``
in lexicographic order.  One Kautz extension maps ``[l, r] -> [r, y]`` with
``y != r``.  A delta value is claimed to be

    n * e^T (prod_j S Lambda(s_j)) S (I - Lambda(0)) 1

for diagonal 0/1 boundary masks ``Lambda(s)``.  How the offsets ``s_j`` are
scheduled is underdetermined, so :class:`MaskSchedule` makes each reading
explicit and :func:`calibrate_schedule` tests all of them against the
oracle.

All products use Python integers.  The mask search is the one exception: it
runs on ``int64`` batches and checks the bound before it starts.
"""

from __future__ import annotations

import itertools
import json
from functools import partial
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import Ambiguous, CapExceeded, DomainError, MissingCalibration, MissingMasks, NoFit, NoMatch

Diagonal = tuple[int, ...]
DeltaLookup = Callable[[int, int], int]

SCHEDULE_FORMAT = "kautz-census/schedule@1"

# (row D, k) -> reference delta value for d = 2.
REFERENCE_DELTAS: dict[tuple[int, int], int] = {
    (10, 7): 12,
    (10, 8): 36,
    (10, 9): 162,
    (11, 7): 6,
    (11, 8): 18,
    (11, 9): 96,
    (11, 10): 384,
    (15, 12): 360,
}

# Reference per-start values; each equals the delta value divided by 6.
REFERENCE_PER_START: dict[tuple[int, int], int] = {
    (10, 9): 27,
    (10, 8): 6,
    (10, 7): 2,
    (11, 10): 64,
    (11, 9): 16,
    (11, 8): 3,
    (11, 7): 1,
    (15, 12): 60,
}


def state_space(q: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(q) for b in range(q) if a != b]


def masks_d2() -> dict[int, Diagonal]:
    return {
        0: (0, 0, 1, 0, 1, 0),
        1: (1, 0, 1, 1, 0, 1),
        2: (1, 1, 0, 1, 0, 1),
    }


@dataclass(frozen=True)
class TransferSystem:
    q: int
    states: tuple[tuple[int, int], ...]
    S: tuple[tuple[int, ...], ...]
    masks: Mapping[int, Diagonal] | None = None

    @property
    def n(self) -> int:
        return len(self.states)

    def mask(self, s: int) -> Diagonal:
        if self.masks is None:
            raise MissingMasks(
                f"no boundary masks known for q={self.q}; supply custom masks or run search_masks"
            )
        return self.masks.get(s, (1,) * self.n)

    def with_masks(self, masks: Mapping[int, Sequence[int]]) -> TransferSystem:
        clean = {int(s): tuple(int(x) for x in diag) for s, diag in masks.items()}
        for s, diag in clean.items():
            if len(diag) != self.n or any(x not in (0, 1) for x in diag):
                raise DomainError(f"mask at offset {s} must be a 0/1 vector of length {self.n}")
        return TransferSystem(self.q, self.states, self.S, clean)


def build_transfer(q: int, masks: Mapping[int, Sequence[int]] | None = None) -> TransferSystem:
    if q < 3:
        raise DomainError(f"q must be >= 3, got {q}")
    states = state_space(q)
    S = tuple(
        tuple(1 if x == r and y != r else 0 for (x, y) in states) for (_, r) in states
    )
    system = TransferSystem(q, tuple(states), S, None)
    if masks is not None:
        return system.with_masks(masks)
    if q == 3:
        return system.with_masks(masks_d2())
    return system


OFFSET_FORMULAS = ("sectionA", "sectionB")
ORDERS = ("as-written", "reversed")
PLACEMENTS = ("mask-after-transfer", "mask-before-transfer")
ROW_OFFSETS = (0, 1)


@dataclass(frozen=True)
class MaskSchedule:
    """One reading of the masked product.

    ``sectionA`` uses ``s_j = (D-1) - k + j``, ``sectionB`` uses ``s_j = D - k + j``.
    ``row_offset`` shifts the canonical row to the formula's row:
    ``D_formula = D - row_offset``.
    """

    offset_formula: str = "sectionB"
    order: str = "as-written"
    placement: str = "mask-after-transfer"
    row_offset: int = 0

    def __post_init__(self) -> None:
        if self.offset_formula not in OFFSET_FORMULAS:
            raise DomainError(f"unknown offset formula {self.offset_formula!r}")
        if self.order not in ORDERS:
            raise DomainError(f"unknown order {self.order!r}")
        if self.placement not in PLACEMENTS:
            raise DomainError(f"unknown placement {self.placement!r}")
        if self.row_offset not in ROW_OFFSETS:
            raise DomainError(f"row_offset must be 0 or 1, got {self.row_offset}")

    @property
    def label(self) -> str:
        return f"{self.offset_formula}/{self.order}/{self.placement}/row+{self.row_offset}"

    def descriptor(self) -> dict:
        return asdict(self)

    @classmethod
    def from_descriptor(cls, desc: Mapping) -> MaskSchedule:
        return cls(**{k: desc[k] for k in ("offset_formula", "order", "placement", "row_offset")})

    @classmethod
    def from_label(cls, label: str) -> MaskSchedule:
        try:
            formula, order, placement, row = label.split("/")
            return cls(formula, order, placement, int(row.removeprefix("row+")))
        except ValueError:
            raise DomainError(f"bad schedule label {label!r}") from None

    def formula_row(self, D: int) -> int:
        return D - self.row_offset

    def offsets(self, D_formula: int, k: int) -> list[int]:
        base = D_formula - k - (1 if self.offset_formula == "sectionA" else 0)
        offs = [base + j for j in range(1, k)]
        return offs[::-1] if self.order == "reversed" else offs


def all_schedules() -> list[MaskSchedule]:
    return [
        MaskSchedule(f, o, p, r)
        for f, o, p, r in itertools.product(OFFSET_FORMULAS, ORDERS, PLACEMENTS, ROW_OFFSETS)
    ]


def _apply_S(S: Sequence[Sequence[int]], v: Sequence[int]) -> list[int]:
    return [sum(a * b for a, b in zip(row, v) if a) for row in S]


def product_vector(system: TransferSystem, schedule: MaskSchedule, D_formula: int, k: int) -> list[int]:
    """``M 1`` for the full masked product ``M``, evaluated in the formula's row frame."""
    if not 1 <= k <= D_formula:
        raise DomainError(f"need 1 <= k <= D, got k={k}, D={D_formula}")
    lam0 = system.mask(0)
    v = _apply_S(system.S, [1 - x for x in lam0])
    after = schedule.placement == "mask-after-transfer"
    # Factors are written left to right; apply them to the vector right to left.
    for s in reversed(schedule.offsets(D_formula, k)):
        lam = system.mask(s)
        if after:
            v = _apply_S(system.S, [x * y for x, y in zip(lam, v)])
        else:
            v = [x * y for x, y in zip(lam, _apply_S(system.S, v))]
    return v


def _check_system(system: TransferSystem, d: int) -> None:
    if system.q != d + 1:
        raise DomainError(f"transfer system has q={system.q} but d={d}")


def per_start_counts(system: TransferSystem, schedule: MaskSchedule, d: int, D: int, k: int) -> list[int]:
    _check_system(system, d)
    return product_vector(system, schedule, schedule.formula_row(D), k)


def delta_by_transfer(
    system: TransferSystem, schedule: MaskSchedule, d: int, D: int, k: int, start: int = 0
) -> int:
    if not 0 <= start < system.n:
        raise DomainError(f"start index {start} outside 0..{system.n - 1}")
    return system.n * per_start_counts(system, schedule, d, D, k)[start]


# --- calibration --------------------------------------------------------------


def _oracle_lookup() -> DeltaLookup:
    from .oracle import delta_census

    rows: dict[tuple[int, int], object] = {}

    def lookup(D: int, k: int, d: int = 2) -> int:
        if (d, D) not in rows:
            rows[d, D] = delta_census(d, D)
        return rows[d, D][k]

    return lookup


def convention_check(delta: DeltaLookup | None = None) -> dict:
    """Which row offset makes the oracle reproduce the reference delta values."""
    delta = delta or _oracle_lookup()
    out = {}
    for r in ROW_OFFSETS:
        hits = sum(1 for (D, k), v in REFERENCE_DELTAS.items() if delta(D + r, k) == v)
        out[r] = hits
    matching = [r for r, hits in out.items() if hits == len(REFERENCE_DELTAS)]
    return {
        "reference_values": len(REFERENCE_DELTAS),
        "reproduced_by_row_offset": {str(r): h for r, h in out.items()},
        "word_length_row_offset": matching[0] if len(matching) == 1 else None,
    }


def _evaluate(system: TransferSystem, schedule: MaskSchedule, D: int, k: int) -> tuple[int, list[int]] | None:
    Df = schedule.formula_row(D)
    if not 1 <= k <= Df:
        return None
    v = product_vector(system, schedule, Df, k)
    return system.n * v[0], v


def score_schedule(
    system: TransferSystem,
    schedule: MaskSchedule,
    D_range: Iterable[int],
    delta: DeltaLookup,
) -> dict:
    cells = mismatches = out_of_domain = 0
    constant = True
    first_mismatch = None
    for D in D_range:
        for k in range(1, D + 1):
            cells += 1
            got = _evaluate(system, schedule, D, k)
            want = delta(D, k)
            if got is None:
                out_of_domain += 1
                mismatches += 1
                continue
            value, vec = got
            constant &= len(set(vec)) == 1
            if value != want:
                mismatches += 1
                if first_mismatch is None:
                    first_mismatch = {"D": D, "k": k, "transfer": str(value), "oracle": str(want)}
    ref_hits = 0
    for (Dp, k), v in REFERENCE_DELTAS.items():
        if k <= Dp and system.n * product_vector(system, schedule, Dp, k)[0] == v:
            ref_hits += 1
    return {
        "label": schedule.label,
        "descriptor": schedule.descriptor(),
        "cells": cells,
        "mismatches": mismatches,
        "out_of_domain": out_of_domain,
        "first_mismatch": first_mismatch,
        "per_start_constant": constant,
        "reference_values_reproduced": ref_hits,
        "chosen": False,
    }


def calibrate_schedule(
    d: int = 2,
    D_range: Iterable[int] = range(6, 13),
    delta: DeltaLookup | None = None,
    system: TransferSystem | None = None,
) -> tuple[MaskSchedule, dict]:
    """Pick the unique schedule whose products equal the oracle on every cell.

    Raises :class:`NoMatch` or :class:`Ambiguous`; both carry the full report.
    """
    system = system or build_transfer(d + 1)
    _check_system(system, d)
    D_range = list(D_range)
    if not D_range:
        raise DomainError("calibration needs a non-empty row range")
    if delta is None:
        delta = partial(_oracle_lookup(), d=d)
    candidates = [score_schedule(system, s, D_range, delta) for s in all_schedules()]
    winners = [c for c in candidates if c["mismatches"] == 0]
    report = {
        "format": SCHEDULE_FORMAT,
        "d": d,
        "tested_range": [min(D_range), max(D_range)],
        "candidates": candidates,
        "chosen": None,
        "selection": None,
        "outcome": "match" if len(winners) == 1 else ("ambiguous" if winners else "no-match"),
    }
    if d == 2:
        report["convention"] = convention_check(delta)
    if not winners:
        raise NoMatch(f"none of {len(candidates)} schedules matches the oracle on D={D_range[0]}..{D_range[-1]}", report)
    if len(winners) > 1:
        raise Ambiguous(f"{len(winners)} schedules match the oracle on the whole range", report)
    winners[0]["chosen"] = True
    report["chosen"] = winners[0]["descriptor"]
    report["selection"] = "unique-match"
    return MaskSchedule.from_descriptor(winners[0]["descriptor"]), report


def pin_schedule(report: dict, schedule: MaskSchedule) -> dict:
    """Freeze ``schedule`` in ``report`` regardless of its mismatch count."""
    out = json.loads(json.dumps(report))
    for c in out["candidates"]:
        c["chosen"] = c["label"] == schedule.label
    if not any(c["chosen"] for c in out["candidates"]):
        raise DomainError(f"schedule {schedule.label} is not in the report")
    out["chosen"] = schedule.descriptor()
    out["selection"] = "pinned"
    return out


def dump_schedule(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def load_schedule(path: str | Path) -> MaskSchedule:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise MissingCalibration(f"schedule file {path} not found; run `calibrate` first") from None
    if doc.get("format") != SCHEDULE_FORMAT:
        raise MissingCalibration(f"{path} is not a schedule file")
    if not doc.get("chosen"):
        raise MissingCalibration(
            f"{path} records outcome {doc.get('outcome')!r} with no chosen schedule; "
            "rerun calibrate or pin a candidate explicitly"
        )
    return MaskSchedule.from_descriptor(doc["chosen"])


# --- mask search -------------------------------------------------------------


def search_masks(
    d: int,
    D_range: Iterable[int],
    schedule: MaskSchedule | None = None,
    max_offset: int = 2,
    delta: DeltaLookup | None = None,
    start: int = 0,
    max_candidates: int = 1 << 22,
) -> tuple[dict[int, Diagonal], dict]:
    """Exhaustively fit 0/1 diagonals for offsets ``0..max_offset``.

    Offsets above ``max_offset`` are fixed to the identity.  Levels are
    assigned in the order ``0, max_offset, ..., 1`` and every cell is tested
    as soon as all the masks it touches are fixed, which prunes early.
    """
    q = d + 1
    n = q * (q - 1)
    if n > 20:
        raise DomainError(f"search space 2^{n} per offset is above the 2^20 limit")
    schedule = schedule or MaskSchedule()
    D_range = list(D_range)
    if d ** (max(D_range) + 2) >= 2**62:
        raise DomainError("products would overflow int64")
    if delta is None:
        delta = partial(_oracle_lookup(), d=d)
    S = np.array(build_transfer(q).S, dtype=np.int64)
    levels = [0] + list(range(max_offset, 0, -1))

    cells = []
    skipped = 0
    for D in D_range:
        Df = schedule.formula_row(D)
        for k in range(1, D + 1):
            if k > Df:
                skipped += 1
                continue
            offs = schedule.offsets(Df, k)
            touched = {0} | {s for s in offs if 0 <= s <= max_offset}
            ready = max(levels.index(s) for s in touched)
            cells.append((ready, D, k, offs, delta(D, k)))

    patterns = ((np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int64)
    cand = np.zeros((1, 0, n), dtype=np.int64)
    survivors = []
    for li, s_level in enumerate(levels):
        C = cand.shape[0] * len(patterns)
        if C > max_candidates:
            raise CapExceeded(f"mask search level s={s_level}", C, max_candidates)
        cand = np.concatenate(
            [np.repeat(cand, len(patterns), axis=0), np.tile(patterns, (cand.shape[0], 1))[:, None, :]],
            axis=1,
        )
        assigned = {s: i for i, s in enumerate(levels[: li + 1])}
        for ready, D, k, offs, want in cells:
            if ready != li or not len(cand):
                continue
            v = (1 - cand[:, assigned[0], :]) @ S.T
            for s in reversed(offs):
                lam = cand[:, assigned[s], :] if s in assigned else None
                if schedule.placement == "mask-after-transfer":
                    v = (v if lam is None else lam * v) @ S.T
                else:
                    v = v @ S.T
                    v = v if lam is None else lam * v
            cand = cand[n * v[:, start] == want]
        survivors.append({"offset": s_level, "candidates": int(cand.shape[0])})
    report = {
        "d": d,
        "tested_range": [min(D_range), max(D_range)],
        "schedule": schedule.label,
        "max_offset": max_offset,
        "cells": len(cells),
        "cells_out_of_domain": skipped,
        "survivors_by_level": survivors,
        "fits": int(cand.shape[0]),
    }
    if not len(cand):
        raise NoFit(f"no 0/1 masks on offsets 0..{max_offset} fit the oracle under {schedule.label}", report)
    first = cand[0]
    masks = {s: tuple(int(x) for x in first[i]) for i, s in enumerate(levels)}
    return masks, report
