"""Set partitions of {0, ..., m-1} in a frozen canonical order.

Linear maps between tensor spaces that commute with simultaneous node
relabeling carry one degree of freedom per set partition of their combined
index positions, so the enumeration order fixed here defines the layout of
every coefficient vector in this package.  The order is the lexicographic
order of restricted growth strings and is part of the on-disk format: it
must never change.

A restricted growth string (RGS) of length m labels position 0 with 0 and
every later position either with a label already in use or with the smallest
unused label.  "0,0,1" denotes the partition {{0,1},{2}}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

ARITY_CAP = 8
# b(8) = 4140 coefficients; higher orders neither fit in memory at useful
# node counts nor produce tractable bases.

_BELL_SMALL = (1, 1, 2, 5, 15, 52, 203, 877, 4140)


def _check_arity(m: int, cap: int | None = None) -> None:
    cap = ARITY_CAP if cap is None else cap
    if m < 0:
        raise ValueError(f"arity must be non-negative, got {m}")
    if m > cap:
        raise ValueError(f"arity too large: {m} exceeds cap {cap}")


@dataclass(frozen=True)
class SetPartition:
    """A partition of positions {0, ..., m-1} into disjoint non-empty blocks.

    Canonical form: every block is ascending and blocks are ordered by their
    smallest element, so the tuple-of-tuples representation is unique.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        positions = sorted(p for block in self.blocks for p in block)
        if positions != list(range(len(positions))):
            raise ValueError("blocks must cover 0..m-1 exactly once")
        for block in self.blocks:
            if not block:
                raise ValueError("blocks must be non-empty")
            if list(block) != sorted(block):
                raise ValueError("each block must be sorted ascending")
        mins = [block[0] for block in self.blocks]
        if mins != sorted(mins):
            raise ValueError("blocks must be ordered by smallest element")

    @property
    def arity(self) -> int:
        return sum(len(block) for block in self.blocks)

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]]) -> "SetPartition":
        """Build from any block arrangement, canonicalizing the order."""
        normalized = sorted(tuple(sorted(b)) for b in blocks)
        return cls(tuple(normalized))

    @classmethod
    def from_rgs(cls, labels: Sequence[int]) -> "SetPartition":
        """Build from a label sequence (any labels; grouped by equality)."""
        return pattern_of(labels)

    def to_rgs(self) -> tuple[int, ...]:
        labels = [0] * self.arity
        for b, block in enumerate(self.blocks):
            for p in block:
                labels[p] = b
        return tuple(labels)

    def rgs_string(self) -> str:
        return ",".join(str(v) for v in self.to_rgs())

    @classmethod
    def from_rgs_string(cls, text: str) -> "SetPartition":
        if text == "":
            return cls(())
        return cls.from_rgs([int(tok) for tok in text.split(",")])


@dataclass(frozen=True)
class IndexPattern:
    """An index tuple paired with its equality pattern."""

    indices: tuple[int, ...]

    @cached_property
    def pattern(self) -> SetPartition:
        return pattern_of(self.indices)


def pattern_of(indices: Sequence[int]) -> SetPartition:
    """Equality pattern of an index tuple: positions grouped by equal value.

    Blocks come out ordered by first appearance, which coincides with the
    canonical order (ordered by smallest element).
    """
    seen: dict[int, int] = {}
    blocks: list[list[int]] = []
    for pos, value in enumerate(indices):
        hit = seen.get(value)
        if hit is None:
            seen[value] = len(blocks)
            blocks.append([pos])
        else:
            blocks[hit].append(pos)
    return SetPartition(tuple(tuple(b) for b in blocks))


def _rgs_lex(m: int) -> Iterator[tuple[int, ...]]:
    if m == 0:
        yield ()
        return
    labels = [0] * m

    def rec(pos: int, max_label: int) -> Iterator[tuple[int, ...]]:
        if pos == m:
            yield tuple(labels)
            return
        for v in range(max_label + 2):
            labels[pos] = v
            yield from rec(pos + 1, max(max_label, v))

    yield from rec(1, 0)


@lru_cache(maxsize=None)
def _partitions_tuple(m: int) -> tuple[SetPartition, ...]:
    return tuple(SetPartition.from_rgs(r) for r in _rgs_lex(m))


def enumerate_partitions(m: int, cap: int | None = None) -> list[SetPartition]:
    """All partitions of {0,...,m-1} in RGS-lexicographic order."""
    _check_arity(m, cap)
    return list(_partitions_tuple(m))


@lru_cache(maxsize=None)
def bell(m: int) -> int:
    """Number of partitions of an m-element set (Bell triangle recurrence)."""
    if m < 0:
        raise ValueError(f"arity must be non-negative, got {m}")
    row = [1]
    for _ in range(m):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


@lru_cache(maxsize=None)
def _index_by_rgs(m: int) -> dict[tuple[int, ...], int]:
    return {p.to_rgs(): i for i, p in enumerate(_partitions_tuple(m))}


def partition_index(p: SetPartition, cap: int | None = None) -> int:
    """Position of a partition in the canonical enumeration of its arity."""
    _check_arity(p.arity, cap)
    return _index_by_rgs(p.arity)[p.to_rgs()]
