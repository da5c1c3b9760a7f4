"""The time sequence of (upper, middle, lower) priority vectors.

Slots are numbered from 1. Slot ``i`` carries ``vectors[(i - 1) % length]``,
so the sequence simply repeats after its last vector ``(u, 1, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .errors import InvalidArgument

U_CAP = 20


class TsVector(NamedTuple):
    upper: int
    middle: int
    lower: int

    def __str__(self):
        return f"({self.upper},{self.middle},{self.lower})"


@dataclass(frozen=True)
class TimeSequence:
    u: int
    vectors: tuple[TsVector, ...]

    @property
    def length_x(self) -> int:
        return len(self.vectors)

    def __len__(self):
        return len(self.vectors)

    def level(self, lam: int) -> list[TsVector]:
        return [v for v in self.vectors if v.lower == lam]

    def position(self, v: TsVector) -> int:
        """0-based index of ``v`` within one cycle."""
        return _positions(self.vectors)[v]


@lru_cache(maxsize=None)
def _positions(vectors):
    return {v: k for k, v in enumerate(vectors)}


@lru_cache(maxsize=64)
def build_time_sequence(u: int) -> TimeSequence:
    if u < 1:
        raise InvalidArgument(f"u must be >= 1, got {u}")
    upper = middle = lower = u
    out = [TsVector(upper, middle, lower)]
    while middle > 1:
        if middle == lower:
            lower -= 1
            middle = upper
        elif middle > lower:
            middle -= 1
        out.append(TsVector(upper, middle, lower))
    return TimeSequence(u, tuple(out))


def vector_at_slot(ts: TimeSequence, slot_index: int) -> TsVector:
    if slot_index < 1:
        raise InvalidArgument(f"slot index is 1-based, got {slot_index}")
    return ts.vectors[(slot_index - 1) % ts.length_x]


def is_admissible(rc: int, v: TsVector) -> bool:
    return rc >= v.middle


def is_edge_slot(v: TsVector) -> bool:
    # last slot of its level: scheduling from here moves to the next level
    return v.middle == v.lower


def level_of(v: TsVector) -> int:
    return v.lower


def auto_u(snapshot) -> int:
    """Pick ``u`` as the rounded mean node degree, clamped to ``[1, 20]``."""
    if snapshot.n == 0:
        raise InvalidArgument("empty snapshot")
    return auto_u_from_degree(snapshot.mean_degree())


def auto_u_from_degree(mean_degree: float) -> int:
    return max(1, min(U_CAP, int(math.floor(mean_degree + 0.5))))
