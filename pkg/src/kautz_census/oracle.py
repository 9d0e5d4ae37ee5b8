"""Brute-force censuses of K(d, D): exact rho, sigma and delta spectra.

Two distance oracles are kept deliberately independent:

* ``overlap`` uses the suffix/prefix rule from :mod:`kautz_census.words`;
* ``bfs`` runs breadth-first search over the explicit successor table.

Every count is a Python ``int``; numpy is only used for symbol comparison
and histogramming of small integers.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Literal

import numpy as np

from .errors import DomainError
from .words import (
    GraphParams,
    check_cap,
    iter_word_blocks,
    longest_border_lengths,
    successor_indices,
    word_array,
    word_count,
)

Kind = Literal["rho", "sigma", "delta"]
Method = Literal["overlap", "bfs"]

DEFAULT_PAIR_CAP = 2**28


@dataclass(frozen=True)
class Spectrum:
    params: GraphParams
    kind: str
    counts: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("rho", "sigma", "delta"):
            raise DomainError(f"unknown spectrum kind {self.kind!r}")
        if any(v < 0 for v in self.counts.values()) and self.kind != "delta":
            raise DomainError(f"negative count in {self.kind} spectrum")

    def __getitem__(self, k: int) -> int:
        return self.counts.get(k, 0)

    def total(self) -> int:
        return sum(self.counts.values())

    def as_list(self) -> list[int]:
        return [self[k] for k in range(1, self.params.m + 1)]


@dataclass(frozen=True)
class DeltaRow:
    """Delta_k(d, D) = rho_k(d, D) - rho_k(d, D-1), zero-extended at k = D."""

    d: int
    D: int
    counts: dict[int, int] = field(default_factory=dict)

    def __getitem__(self, k: int) -> int:
        return self.counts.get(k, 0)

    def as_list(self) -> list[int]:
        return [self[k] for k in range(1, self.D + 1)]


def _full(counts: Counter | dict, m: int) -> dict[int, int]:
    return {k: int(counts.get(k, 0)) for k in range(1, m + 1)}


def _map_blocks(fn: Callable[[np.ndarray], Counter], blocks: Iterable[np.ndarray], workers: int) -> Counter:
    total: Counter = Counter()
    if workers <= 1:
        for b in blocks:
            total.update(fn(b))
        return total
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order, so the merge is deterministic.
        for part in pool.map(fn, blocks):
            total.update(part)
    return total


def _histogram(values: np.ndarray) -> Counter:
    ks, counts = np.unique(values, return_counts=True)
    return Counter({int(k): int(c) for k, c in zip(ks, counts)})


# --- distances ------------------------------------------------------------


def _codes(words: np.ndarray, q: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Base-q codes of every suffix and prefix, indexed by length."""
    w = words.astype(np.int64)
    m = w.shape[1]
    suffix = [np.zeros(len(w), dtype=np.int64)]
    prefix = [np.zeros(len(w), dtype=np.int64)]
    for t in range(1, m + 1):
        pre = prefix[-1] * q + w[:, t - 1]
        suf = suffix[-1] + w[:, m - t] * q ** (t - 1)
        prefix.append(pre)
        suffix.append(suf)
    return suffix, prefix


def _overlap_distance_rows(
    rows: np.ndarray, suffix: list[np.ndarray], prefix: list[np.ndarray], m: int
) -> np.ndarray:
    dist = np.full((len(rows), len(prefix[0])), m, dtype=np.int16)
    open_ = np.ones(dist.shape, dtype=bool)
    for t in range(m, 0, -1):
        hit = open_ & (suffix[t][rows][:, None] == prefix[t][None, :])
        dist[hit] = m - t
        open_ &= ~hit
    return dist


def _bfs_distance_rows(rows: np.ndarray, succ: np.ndarray) -> np.ndarray:
    V = succ.shape[0]
    dist = np.full((len(rows), V), -1, dtype=np.int16)
    for i, src in enumerate(rows):
        row = dist[i]
        row[src] = 0
        frontier = np.array([src])
        level = 0
        while frontier.size:
            level += 1
            nxt = np.unique(succ[frontier].ravel())
            nxt = nxt[row[nxt] < 0]
            row[nxt] = level
            frontier = nxt
    return dist


def _check_pairs(params: GraphParams, pair_cap: int | None) -> None:
    V = params.vertex_count
    check_cap(
        f"all-pairs work on K({params.d},{params.D})",
        V * V,
        DEFAULT_PAIR_CAP if pair_cap is None else pair_cap,
    )


def distance_matrix(
    params: GraphParams, method: Method = "overlap", pair_cap: int | None = None
) -> np.ndarray:
    """``V x V`` matrix of directed distances, vertices in lexicographic order."""
    _check_pairs(params, pair_cap)
    rows = np.arange(params.vertex_count)
    if method == "overlap":
        words = word_array(params.d, params.m, cap=None)
        suffix, prefix = _codes(words, params.q)
        return _overlap_distance_rows(rows, suffix, prefix, params.m)
    if method == "bfs":
        return _bfs_distance_rows(rows, successor_indices(params.d, params.m, cap=None))
    raise DomainError(f"unknown distance method {method!r}")


def count_shortest_paths(params: GraphParams, src: int) -> tuple[np.ndarray, np.ndarray]:
    """BFS layer counts: (distance, number of shortest paths) from ``src`` to every vertex."""
    succ = successor_indices(params.d, params.m)
    V = succ.shape[0]
    dist = np.full(V, -1, dtype=np.int64)
    paths = np.zeros(V, dtype=object)
    dist[src] = 0
    paths[src] = 1
    frontier = [src]
    level = 0
    while frontier:
        level += 1
        nxt: list[int] = []
        for u in frontier:
            for v in succ[u]:
                if dist[v] < 0:
                    dist[v] = level
                    nxt.append(int(v))
                if dist[v] == level:
                    paths[v] += paths[u]
        frontier = sorted(set(nxt))
    return dist, paths


# --- rho --------------------------------------------------------------------


@lru_cache(maxsize=None)
def _rho_overlap(d: int, m: int, workers: int, block_rows: int) -> tuple[int, ...]:
    def part(images: np.ndarray) -> Counter:
        return _histogram(m - longest_border_lengths(images))

    counts = _map_blocks(part, iter_word_blocks(d, m + 1, block_rows), workers)
    return tuple(counts.get(k, 0) for k in range(1, m + 1))


def _rho_bfs(params: GraphParams, pair_cap: int | None) -> Counter:
    dist = distance_matrix(params, "bfs", pair_cap)
    succ = successor_indices(params.d, params.m)
    tails = np.repeat(np.arange(succ.shape[0]), params.d)
    # The cycle closes by returning head -> tail.
    return _histogram(dist[succ.ravel(), tails])


def rho_census(
    params: GraphParams,
    method: Method = "overlap",
    cap: int | None = None,
    workers: int = 1,
    block_rows: int = 1 << 16,
    pair_cap: int | None = None,
) -> Spectrum:
    """Number of edges whose shortest cycle has length ``k + 1``, for ``k = 1..m``."""
    check_cap(f"K({params.d},{params.D}) edges", params.edge_count, cap)
    if method == "overlap":
        raw = _rho_overlap(params.d, params.m, workers, block_rows)
        counts = {k: raw[k - 1] for k in range(1, params.m + 1)}
    elif method == "bfs":
        counts = _full(_rho_bfs(params, pair_cap), params.m)
    else:
        raise DomainError(f"unknown census method {method!r}")
    return Spectrum(params, "rho", counts)


def rho_by_terminal_state(params: GraphParams, cap: int | None = None) -> dict[int, dict[tuple[int, int], int]]:
    """rho split by the last two symbols of the edge's tail word (``m >= 2``)."""
    if params.m < 2:
        raise DomainError("terminal pairs need words of length >= 2")
    check_cap(f"K({params.d},{params.D}) edges", params.edge_count, cap)
    images = word_array(params.d, params.m + 1, cap=None)
    ks = params.m - longest_border_lengths(images)
    states = images[:, params.m - 2].astype(np.int64) * params.q + images[:, params.m - 1]
    out: dict[int, dict[tuple[int, int], int]] = {}
    for k in range(1, params.m + 1):
        sel = states[ks == k]
        per = Counter(sel.tolist())
        out[k] = {
            (a, b): per.get(a * params.q + b, 0)
            for a in range(params.q)
            for b in range(params.q)
            if a != b
        }
    return out


# --- sigma ------------------------------------------------------------------


@lru_cache(maxsize=None)
def _sigma_counts(d: int, m: int, method: str, workers: int, block_rows: int) -> tuple[int, ...]:
    V = word_count(d, m)
    chunk = max(1, block_rows // max(V, 1))
    blocks = [np.arange(i, min(i + chunk, V)) for i in range(0, V, chunk)]
    if method == "overlap":
        words = word_array(d, m, cap=None)
        suffix, prefix = _codes(words, d + 1)

        def part(rows: np.ndarray) -> Counter:
            return _histogram(_overlap_distance_rows(rows, suffix, prefix, m))

    else:
        succ = successor_indices(d, m, cap=None)

        def part(rows: np.ndarray) -> Counter:
            return _histogram(_bfs_distance_rows(rows, succ))

    counts = _map_blocks(part, blocks, workers)
    if counts.get(-1):
        raise AssertionError("unreachable vertex pair in a strongly connected graph")
    return tuple(counts.get(k, 0) for k in range(1, m + 1))


def sigma_census(
    params: GraphParams,
    method: Method = "overlap",
    pair_cap: int | None = None,
    workers: int = 1,
    block_rows: int = 1 << 22,
) -> Spectrum:
    """Ordered pairs of distinct vertices at each directed distance ``k = 1..m``."""
    if method not in ("overlap", "bfs"):
        raise DomainError(f"unknown census method {method!r}")
    _check_pairs(params, pair_cap)
    raw = _sigma_counts(params.d, params.m, method, workers, block_rows)
    return Spectrum(params, "sigma", {k: raw[k - 1] for k in range(1, params.m + 1)})


# --- delta ------------------------------------------------------------------


def delta_from_rows(d: int, D: int, rho_now: Spectrum, rho_prev: Spectrum | None) -> DeltaRow:
    counts = {
        k: rho_now[k] - (rho_prev[k] if rho_prev is not None and k <= D - 1 else 0)
        for k in range(1, D + 1)
    }
    return DeltaRow(d, D, counts)


def delta_census(d: int, D: int, cap: int | None = None) -> DeltaRow:
    now = rho_census(GraphParams(d, D), cap=cap)
    prev = rho_census(GraphParams(d, D - 1), cap=cap) if D >= 2 else None
    return delta_from_rows(d, D, now, prev)


def window_start(D: int) -> int:
    """First index that may be non-zero in a delta row: floor(D/2) + 2."""
    return D // 2 + 2


# --- identity report ----------------------------------------------------------


def _record(identity: str, D: int, k: int | None, expected, actual, passed: bool) -> dict:
    return {
        "identity": identity,
        "D": D,
        "k": k,
        "expected": str(expected),
        "actual": str(actual),
        "passed": bool(passed),
    }


def identity_records(
    d: int,
    rho: dict[int, Spectrum],
    sigma: dict[int, Spectrum],
) -> list[dict]:
    """Check every census identity over the supplied rows (keys are D)."""
    records: list[dict] = []
    rows = sorted(rho)
    for D in rows:
        p = GraphParams(d, D)
        records.append(_record("rho_partition", D, None, p.edge_count, rho[D].total(), rho[D].total() == p.edge_count))
        if D in sigma:
            pairs = p.vertex_count * (p.vertex_count - 1)
            records.append(_record("sigma_partition", D, None, pairs, sigma[D].total(), sigma[D].total() == pairs))
        if D + 1 in sigma and D in sigma:
            for k in range(1, D + 1):
                want = d * d * sigma[D][k] - rho[D][k]
                got = sigma[D + 1][k + 1]
                records.append(_record("sigma_recursion", D, k, want, got, want == got))
        if D - 1 in rho:
            delta = delta_from_rows(d, D, rho[D], rho[D - 1])
            lo = window_start(D)
            for k in range(1, D):
                if k < lo:
                    records.append(_record("vanishing_window", D, k, 0, delta[k], delta[k] == 0))
                else:
                    records.append(_record("window_positivity", D, k, "> 0", delta[k], delta[k] > 0))
                prev = rho[D - 1][k]
                records.append(_record("persistence", D, k, f">= {prev}", rho[D][k], rho[D][k] >= prev))
    return records


def summarize(records: list[dict]) -> dict:
    failures = [r for r in records if not r["passed"]]
    return {"passed": not failures, "checked": len(records), "failures": len(failures), "records": records}


def verify_identities(d: int, D_max: int, D_min: int = 1, cap: int | None = None, pair_cap: int | None = None) -> dict:
    """Census every row ``D_min..D_max`` and check all identities that fit in the range."""
    rho = {D: rho_census(GraphParams(d, D), cap=cap) for D in range(D_min, D_max + 1)}
    sigma = {D: sigma_census(GraphParams(d, D), pair_cap=pair_cap) for D in range(D_min, D_max + 1)}
    report = summarize(identity_records(d, rho, sigma))
    report.update({"d": d, "D_min": D_min, "D_max": D_max})
    return report
