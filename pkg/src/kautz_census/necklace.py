"""Primitive proper necklaces: Moebius closed form and brute-force count.

A proper cyclic word of length ``n`` over ``q`` colours has no two equal
neighbours, the wraparound pair included.  The closed form

    N_prim(n; q) = (1/n) * sum_{j | n} mu(j) (q - 1)^(n/j)

is only used for ``n >= 3``.  At ``n = 2`` it returns 1 while there are
three rotation classes over three colours, so the formula path refuses that
case and the enumerator answers instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotApplicable
from .words import GraphParams, check_cap, edge_from_image, iter_word_blocks, word_array


def factorize(n: int) -> dict[int, int]:
    if n < 1:
        raise DomainError(f"cannot factor {n}")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisors(n: int) -> list[int]:
    if n < 1:
        raise DomainError(f"divisors need n >= 1, got {n}")
    return [j for j in range(1, n + 1) if n % j == 0]


def mobius(j: int) -> int:
    if j < 1:
        raise DomainError(f"mobius(j) needs j >= 1, got {j}")
    f = factorize(j)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def mobius_sum(n: int, q: int) -> int:
    """sum_{j | n} mu(j) (q-1)^(n/j), before the division by ``n``."""
    return sum(mobius(j) * (q - 1) ** (n // j) for j in divisors(n))


def wrap_correction(n: int, q: int) -> int:
    """sum_{j | n} mu(j) (-1)^(n/j) (q-1); zero for every n >= 3."""
    return sum(mobius(j) * (-1) ** (n // j) * (q - 1) for j in divisors(n))


@dataclass(frozen=True)
class NecklaceCount:
    n: int
    q: int
    primitive_count: int

    @property
    def oriented_edge_count(self) -> int:
        return self.n * self.primitive_count


def primitive_count_formula(n: int, q: int) -> int:
    if q < 3:
        raise DomainError(f"q must be >= 3, got {q}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if n <= 2:
        raise NotApplicable(
            f"the Moebius closed form disagrees with direct enumeration at n={n}; "
            "use the enumerate method"
        )
    total = mobius_sum(n, q)
    if total % n:
        raise AssertionError(f"divisor sum {total} not divisible by n={n}")
    return total // n


def _aperiodic(codes: np.ndarray, n: int, q: int) -> np.ndarray:
    # Periodic iff invariant under rotation by n/p for some prime p | n.
    keep = np.ones(len(codes), dtype=bool)
    for p in factorize(n):
        r = n // p
        high = q ** (n - r)
        rotated = (codes % high) * q**r + codes // high
        keep &= rotated != codes
    return keep


def enumerate_primitive_colorings(n: int, q: int, cap: int | None = None) -> int:
    """Count rotation classes of proper aperiodic cyclic words by brute force."""
    if q < 2 or n < 1:
        raise DomainError(f"need n >= 1 and q >= 2, got n={n}, q={q}")
    if n == 1:
        return 0
    d = q - 1
    check_cap(f"proper words of length {n} over {q} letters", q * d ** (n - 1), cap)
    powers = np.array([q ** (n - 1 - i) for i in range(n)], dtype=np.int64)
    found = 0
    for block in iter_word_blocks(d, n, block_rows=1 << 18):
        block = block[block[:, 0] != block[:, -1]]
        codes = block.astype(np.int64) @ powers
        found += int(np.count_nonzero(_aperiodic(codes, n, q)))
    # Aperiodic words fall into rotation classes of exactly n members.
    if found % n:
        raise AssertionError(f"{found} aperiodic words do not split into classes of {n}")
    return found // n


def necklace_count(n: int, q: int, method: str = "formula", cap: int | None = None) -> NecklaceCount:
    if method == "formula":
        return NecklaceCount(n, q, primitive_count_formula(n, q))
    if method == "enumerate":
        return NecklaceCount(n, q, enumerate_primitive_colorings(n, q, cap))
    raise DomainError(f"unknown necklace method {method!r}")


def rho_top_closed_form(d: int, D: int) -> int:
    """Closed-form candidate for rho_D(d, D): sum_{j | D+1} mu(j) d^((D+1)/j).

    This counts oriented edges lying on primitive (D+1)-cycles.  It equals the
    census top count only for D <= 3; see :func:`primitive_cycle_edges`.
    """
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if D < 2:
        raise NotApplicable("closed form needs D >= 2 (cycle length >= 3)")
    n = D + 1
    return n * primitive_count_formula(n, d + 1)


def primitive_cycle_edges(params: GraphParams, cap: int | None = None) -> dict[tuple[int, ...], list[tuple[int, ...]]]:
    """Walk every primitive cycle of length ``m + 1`` explicitly.

    Returns a map from the cycle's least rotation to the edge images (words of
    length ``m + 1``) it passes through, in walking order.
    """
    n = params.m + 1
    images = word_array(params.d, n, cap)
    cycles: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    for row in images:
        w = tuple(int(s) for s in row)
        if w[0] == w[-1]:
            continue
        rotations = [w[i:] + w[:i] for i in range(n)]
        if len(set(rotations)) < n:
            continue
        key = min(rotations)
        if key in cycles:
            continue
        # Walk: each edge's head is the next edge's tail.
        walk = []
        edge = edge_from_image(key)
        for i in range(n):
            image = edge.tail + edge.head[-1:]
            walk.append(image)
            nxt = key[(i + 1 + params.m) % n]
            edge = type(edge)(edge.head, edge.head[1:] + (nxt,))
        if edge.tail != key[:-1]:
            raise AssertionError(f"walk from {key} did not close after {n} steps")
        tails = {image[:-1] for image in walk}
        if len(tails) != n:
            raise AssertionError(f"cycle {key} repeats a vertex")
        cycles[key] = walk
    return cycles
