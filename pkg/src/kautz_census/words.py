"""Kautz words, shift-append adjacency and the suffix/prefix overlap rule.

Vertices of K(d, D) are words of length ``m = D`` over ``{0..d}`` with no two
equal adjacent symbols.  An edge ``u -> v`` shifts ``u`` left by one and
appends a symbol different from ``u[-1]``.  The directed distance from ``u``
to ``w`` is ``m - r`` where ``r`` is the longest suffix of ``u`` that is also
a prefix of ``w``; every routine that needs distances relies on that rule.

Scalar helpers work on plain tuples of ints.  Bulk enumeration returns
``numpy`` arrays of shape ``(count, m)`` in lexicographic order so that the
censuses can be vectorised.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence, Union

import numpy as np

from .errors import CapExceeded, DomainError

KautzWord = tuple[int, ...]
WordLike = Union[str, Sequence[int]]

DEFAULT_EDGE_CAP = 2**22
CAP_ENV = "KAUTZ_EDGE_CAP"


def edge_cap() -> int:
    raw = os.environ.get(CAP_ENV)
    if raw is None:
        return DEFAULT_EDGE_CAP
    try:
        return int(raw)
    except ValueError:
        raise DomainError(f"{CAP_ENV} must be an integer, got {raw!r}") from None


def check_cap(what: str, size: int, cap: int | None = None) -> None:
    limit = edge_cap() if cap is None else cap
    if size > limit:
        raise CapExceeded(what, size, limit)


@dataclass(frozen=True)
class GraphParams:
    """Out-degree ``d`` and row index ``D`` of a Kautz digraph.

    Under the canonical convention the word length equals ``D``.
    """

    d: int
    D: int

    def __post_init__(self) -> None:
        if self.d < 2:
            raise DomainError(f"d must be >= 2, got {self.d}")
        if self.D < 1:
            raise DomainError(f"D must be >= 1, got {self.D}")

    @property
    def q(self) -> int:
        return self.d + 1

    @property
    def m(self) -> int:
        return self.D

    @property
    def vertex_count(self) -> int:
        return self.q * self.d ** (self.m - 1)

    @property
    def edge_count(self) -> int:
        return self.q * self.d**self.m


class EdgeRef(NamedTuple):
    tail: KautzWord
    head: KautzWord


def parse_word(symbols: WordLike) -> KautzWord:
    if isinstance(symbols, str):
        return tuple(int(c) for c in symbols)
    return tuple(int(c) for c in symbols)


def format_word(w: Sequence[int]) -> str:
    if any(s > 9 for s in w):
        return ",".join(str(s) for s in w)
    return "".join(str(s) for s in w)


def is_kautz(w: Sequence[int], d: int) -> bool:
    return all(0 <= s <= d for s in w) and all(a != b for a, b in zip(w, w[1:]))


def validate_word(symbols: WordLike, params: GraphParams) -> bool:
    try:
        w = parse_word(symbols)
    except (TypeError, ValueError):
        return False
    return len(w) == params.m and is_kautz(w, params.d)


def _extend(block: np.ndarray, d: int, steps: int) -> np.ndarray:
    # Appending to each row in ascending symbol order keeps the block sorted.
    base = np.arange(d, dtype=np.uint8)
    for _ in range(steps):
        last = block[:, -1:]
        appended = base[None, :] + (base[None, :] >= last)
        block = np.concatenate(
            [np.repeat(block, d, axis=0), appended.reshape(-1, 1).astype(np.uint8)],
            axis=1,
        )
    return block


def word_count(d: int, m: int) -> int:
    return (d + 1) * d ** (m - 1)


def word_array(d: int, m: int, cap: int | None = None) -> np.ndarray:
    """All Kautz words of length ``m`` as a ``uint8`` array, lexicographic."""
    if m < 1:
        raise DomainError(f"word length must be >= 1, got {m}")
    check_cap(f"K(d={d}) words of length {m}", word_count(d, m), cap)
    start = np.arange(d + 1, dtype=np.uint8).reshape(-1, 1)
    return _extend(start, d, m - 1)


def iter_word_blocks(
    d: int, m: int, block_rows: int = 1 << 16
) -> Iterator[np.ndarray]:
    """Yield the words of length ``m`` in lexicographic order, in blocks.

    Nothing is capped here; callers bound the total themselves.
    """
    if m < 1:
        raise DomainError(f"word length must be >= 1, got {m}")
    # Choose a prefix length so that each block holds roughly block_rows words.
    tail = m - 1
    while tail > 0 and d**tail > block_rows:
        tail -= 1
    prefixes = _extend(np.arange(d + 1, dtype=np.uint8).reshape(-1, 1), d, m - 1 - tail)
    for row in prefixes:
        yield _extend(row.reshape(1, -1), d, tail)


def rank_words(words: np.ndarray, d: int) -> np.ndarray:
    """Lexicographic index of each row among Kautz words of the same length."""
    words = np.asarray(words, dtype=np.int64)
    m = words.shape[1]
    idx = words[:, 0] * d ** (m - 1)
    for i in range(1, m):
        digit = words[:, i] - (words[:, i] > words[:, i - 1])
        idx = idx + digit * d ** (m - 1 - i)
    return idx


def rank_word(w: Sequence[int], d: int) -> int:
    return int(rank_words(np.asarray([w]), d)[0])


def enumerate_vertices(params: GraphParams, cap: int | None = None) -> list[KautzWord]:
    arr = word_array(params.d, params.m, cap)
    return [tuple(int(s) for s in row) for row in arr]


def out_neighbors(w: WordLike, d: int) -> list[KautzWord]:
    w = parse_word(w)
    shifted = w[1:]
    return [shifted + (a,) for a in range(d + 1) if a != w[-1]]


def successor_indices(d: int, m: int, cap: int | None = None) -> np.ndarray:
    """``(V, d)`` array: row ``i`` holds the ranks of the successors of word ``i``."""
    check_cap(f"K(d={d}) edges at word length {m}", word_count(d, m + 1), cap)
    images = word_array(d, m + 1, cap=None)
    return rank_words(images[:, 1:], d).reshape(-1, d)


def max_overlap(u: WordLike, w: WordLike) -> int:
    """Longest ``t`` such that the length-``t`` suffix of ``u`` equals the prefix of ``w``."""
    u, w = parse_word(u), parse_word(w)
    if len(u) != len(w):
        raise DomainError("max_overlap needs words of equal length")
    m = len(u)
    for t in range(m, 0, -1):
        if u[m - t :] == w[:t]:
            return t
    return 0


def distance_by_overlap(u: WordLike, w: WordLike) -> int:
    return len(parse_word(u)) - max_overlap(u, w)


def is_edge(tail: Sequence[int], head: Sequence[int]) -> bool:
    return (
        len(tail) == len(head)
        and tuple(tail[1:]) == tuple(head[:-1])
        and head[-1] != tail[-1]
    )


def edge_cycle_index(e: EdgeRef) -> int:
    """Shortest directed cycle through ``e`` has length ``k + 1``; returns ``k``."""
    return distance_by_overlap(e.head, e.tail)


def line_digraph_image(e: EdgeRef) -> KautzWord:
    tail, head = parse_word(e.tail), parse_word(e.head)
    if not is_edge(tail, head):
        raise DomainError(f"{format_word(tail)} -> {format_word(head)} is not an edge")
    return tail + head[-1:]


def edge_from_image(w: WordLike) -> EdgeRef:
    w = parse_word(w)
    return EdgeRef(w[:-1], w[1:])


def iter_edges(params: GraphParams, cap: int | None = None) -> Iterator[EdgeRef]:
    check_cap(f"K({params.d},{params.D}) edges", params.edge_count, cap)
    for row in word_array(params.d, params.m + 1, cap=None):
        yield edge_from_image(tuple(int(s) for s in row))


def longest_border_lengths(images: np.ndarray) -> np.ndarray:
    """Vectorised overlap for edge images.

    Row ``a_0..a_m`` encodes the edge ``a_0..a_{m-1} -> a_1..a_m``; the return
    overlap is the longest proper border of the row.
    """
    rows, n = images.shape
    best = np.zeros(rows, dtype=np.int64)
    open_ = np.ones(rows, dtype=bool)
    for t in range(n - 1, 0, -1):
        hit = open_ & np.all(images[:, :t] == images[:, n - t :], axis=1)
        best[hit] = t
        open_ &= ~hit
    return best
