#!/usr/bin/env python
"""
Subpartitions of row diagrams and Stirling-number machinery.

Elements of the m x ell row diagram are numbered 1..m*ell, element
(i - 1) * m + j being the node in row i and column j.  All counts are exact
Python integers.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache

import pandas as pd

from .util import EnumerationCapError

ENUMERATION_CAP = 16
STIRLING_CAP = 64


@dataclass(frozen=True)
class RowDiagram:
    m: int
    ell: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f'invalid m: {self.m}')
        elif int(self.ell) != self.ell or self.ell < 1:
            raise ValueError(f'invalid ell: {self.ell}')

    @property
    def size(self):
        return self.m * self.ell

    def node(self, element):
        if not 1 <= element <= self.size:
            raise ValueError(f'invalid element: {element}')
        return ((element - 1) // self.m + 1, (element - 1) % self.m + 1)

    def element(self, i, j):
        if not (1 <= i <= self.ell and 1 <= j <= self.m):
            raise ValueError(f'invalid node: {(i, j)}')
        return (i - 1) * self.m + j

    def row_of(self, element):
        return self.node(element)[0]

    def rows(self):
        return [
            tuple(range((i - 1) * self.m + 1, i * self.m + 1))
            for i in range(1, self.ell + 1)
        ]


@dataclass(frozen=True)
class ClassFlags:
    all_blocks_ge2: bool
    row_meets_block_le1: bool
    every_row_hit: bool

    @property
    def is_star2(self):
        return (
            self.all_blocks_ge2 and self.row_meets_block_le1
            and self.every_row_hit
        )


@dataclass(frozen=True)
class Subpartition:
    diagram: RowDiagram
    blocks: tuple

    def __post_init__(self):
        if any(len(b) == 0 for b in self.blocks):
            raise ValueError(f'empty block in subpartition: {self.blocks}')
        blocks = tuple(
            sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0])
        )
        seen = set()
        for b in blocks:
            for e in b:
                if not 1 <= e <= self.diagram.size:
                    raise ValueError(f'invalid element: {e}')
                elif e in seen:
                    raise ValueError(f'blocks are not disjoint: {blocks}')
                seen.add(e)
        object.__setattr__(self, 'blocks', blocks)

    @property
    def sigma_size(self):
        return len(self.blocks)

    @property
    def norm(self):
        return sum(len(b) for b in self.blocks)

    @property
    def k(self):
        return self.diagram.size + self.sigma_size - self.norm

    @property
    def covered(self):
        return frozenset(e for b in self.blocks for e in b)

    @property
    def flags(self):
        row_of = self.diagram.row_of
        block_rows = [[row_of(e) for e in b] for b in self.blocks]
        hit = {r for rs in block_rows for r in rs}
        return ClassFlags(
            all_blocks_ge2=all(len(b) >= 2 for b in self.blocks),
            row_meets_block_le1=all(
                len(rs) == len(set(rs)) for rs in block_rows
            ),
            every_row_hit=(len(hit) == self.diagram.ell)
        )

    def to_dict(self):
        return {
            'k': self.k, 'sigma_size': self.sigma_size, 'norm': self.norm,
            'blocks': [list(b) for b in self.blocks]
        }


@lru_cache(maxsize=None)
def _stirling2_table(cap):
    table = [[1]]
    for n in range(1, cap + 1):
        prev = table[-1]
        row = [0] * (n + 1)
        for k in range(1, n + 1):
            row[k] = k * (prev[k] if k < n else 0) + prev[k - 1]
        table.append(row)
    return table


def stirling2(n, k, cap=STIRLING_CAP):
    if n < 0 or k < 0:
        raise ValueError(f'invalid arguments: n={n}, k={k}')
    elif n > cap:
        raise EnumerationCapError(
            f'Stirling table overflow: n={n} exceeds the cap {cap}',
            estimate=n
        )
    elif k > n:
        return 0
    else:
        return _stirling2_table(cap)[n][k]


def faa_di_bruno_sum(n, k, cap=STIRLING_CAP):
    if not 1 <= k <= n:
        raise ValueError(f'invalid arguments: n={n}, k={k}')
    elif n > cap:
        raise EnumerationCapError(f'n={n} exceeds the cap {cap}', estimate=n)
    else:
        return (
            math.factorial(n - 1) // math.factorial(k - 1) * math.comb(n, k)
        )


def block_factorial_product(blocks):
    return math.prod(math.factorial(len(b)) for b in blocks)


def set_partitions(n, k=None):
    """Yield the partitions of [n] in restricted-growth order."""
    if n < 0:
        raise ValueError(f'invalid n: {n}')
    elif n == 0:
        if k in (None, 0):
            yield ()
        return
    codes = [0] * n

    def _rec(i, n_blocks):
        if i == n:
            if k is None or n_blocks == k:
                blocks = [[] for _ in range(n_blocks)]
                for e, c in enumerate(codes, start=1):
                    blocks[c].append(e)
                yield tuple(tuple(b) for b in blocks)
            return
        elif k is not None and n_blocks + (n - i) < k:
            return
        for c in range(n_blocks + 1):
            if k is not None and c == n_blocks and n_blocks == k:
                break
            codes[i] = c
            yield from _rec(i + 1, max(n_blocks, c + 1))

    yield from _rec(0, 0)


@lru_cache(maxsize=None)
def star2_table(m, ell, cap=STIRLING_CAP):
    """
    Return {k: |Pi**_{>=2}(m; ell, k)|} by a row-by-row transfer recursion.

    The state after each row is (open singleton blocks, blocks with at least
    two elements, covered elements).  Elements of a row join distinct blocks,
    so the one-element-per-row condition holds by construction.
    """
    logger = logging.getLogger(__name__)
    RowDiagram(m=m, ell=ell)
    if m * ell > cap:
        raise EnumerationCapError(
            f'm * ell = {m * ell} exceeds the count cap {cap}'
        )
    states = {(0, 0, 0): 1}
    for _ in range(ell):
        updated = defaultdict(int)
        for (a, b, c), count in states.items():
            for j in range(min(a, m) + 1):
                for i in range(min(b, m - j) + 1):
                    for n_new in range(m - j - i + 1):
                        if j + i + n_new == 0:
                            continue
                        u = m - j - i - n_new
                        ways = (
                            math.factorial(m) // (
                                math.factorial(j) * math.factorial(i)
                                * math.factorial(n_new) * math.factorial(u)
                            ) * math.perm(a, j) * math.perm(b, i)
                        )
                        updated[(a - j + n_new, b + j, c + j + i + n_new)] += (
                            count * ways
                        )
        states = updated
    table = defaultdict(int)
    for (a, b, c), count in states.items():
        if a == 0:
            table[m * ell + b - c] += count
    logger.debug(f'star2_table({m}, {ell}): {dict(table)}')
    return dict(sorted(table.items()))


def count_star2(m, ell, k, cap=STIRLING_CAP):
    if ell < 2:
        raise ValueError(f'invalid ell: {ell}')
    elif k < m or k > (m * ell - ell / 2):
        return 0
    else:
        return star2_table(m, ell, cap=cap).get(k, 0)


def enumerate_star2(m, ell, cap=ENUMERATION_CAP):
    """
    Yield every subpartition of the m x ell row diagram whose blocks have at
    least two elements, meet each row at most once and together hit every row.
    """
    diagram = RowDiagram(m=m, ell=ell)
    if ell < 2:
        raise ValueError(f'invalid ell: {ell}')
    elif diagram.size > cap:
        estimate = (
            sum(star2_table(m, ell).values())
            if diagram.size <= STIRLING_CAP else None
        )
        raise EnumerationCapError(
            f'm * ell = {diagram.size} exceeds the enumeration cap {cap}'
            f' (estimated stream length: {estimate})', estimate=estimate
        )
    n = diagram.size
    blocks = []
    block_rows = []

    def _rec(e, row_hit):
        if e > n:
            if all(len(b) >= 2 for b in blocks):
                yield Subpartition(
                    diagram=diagram, blocks=tuple(tuple(b) for b in blocks)
                )
            return
        row = (e - 1) // m + 1
        row_end = (e % m == 0)
        choices = [None] + [
            i for i, rs in enumerate(block_rows) if row not in rs
        ] + ['new']
        for choice in choices:
            if choice == 'new':
                blocks.append([e])
                block_rows.append({row})
            elif choice is not None:
                blocks[choice].append(e)
                block_rows[choice].add(row)
            hit = row_hit or choice is not None
            if not row_end:
                yield from _rec(e + 1, hit)
            elif hit and sum(len(b) == 1 for b in blocks) <= n - e:
                yield from _rec(e + 1, False)
            if choice == 'new':
                blocks.pop()
                block_rows.pop()
            elif choice is not None:
                blocks[choice].pop()
                block_rows[choice].discard(row)

    yield from _rec(1, False)


def h_complete(sigma):
    """Complete a subpartition to a partition of [n] by adding singletons."""
    covered = sigma.covered
    singletons = [
        (e,) for e in range(1, sigma.diagram.size + 1) if e not in covered
    ]
    return tuple(sorted(list(sigma.blocks) + singletons, key=lambda b: b[0]))


def h_inverse(partition, diagram):
    elements = sorted(e for b in partition for e in b)
    if elements != list(range(1, diagram.size + 1)):
        raise ValueError(f'not a partition of [{diagram.size}]: {partition}')
    return Subpartition(
        diagram=diagram,
        blocks=tuple(tuple(b) for b in partition if len(b) > 1)
    )


def enumerate_records(m, ell, k=None, cap=ENUMERATION_CAP):
    return pd.DataFrame(
        [
            {'index': i, **s.to_dict()} for i, s in enumerate(
                s for s in enumerate_star2(m=m, ell=ell, cap=cap)
                if k is None or s.k == k
            )
        ],
        columns=['index', 'k', 'sigma_size', 'norm', 'blocks']
    )
