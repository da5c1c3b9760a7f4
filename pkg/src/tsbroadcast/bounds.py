"""Closed-form transmission-count bounds and the adversarial topology behind the upper one."""

from __future__ import annotations

import math
import warnings

import numpy as np

from .baselines import greedy_broadcast
from .errors import ConstructionError, InvalidArgument
from .model import NetworkSnapshot, build_udg, components, is_connected

SQRT3 = math.sqrt(3.0)


def q_ratio(side_d: float, radius_r: float) -> float:
    if not (side_d > 0 and radius_r > 0):
        raise InvalidArgument("side_d and radius_r must be positive")
    return side_d / radius_r


def lower_bound_transmissions(q: float) -> float:
    """Density-asymptotic minimum number of transmissions to cover a ``q x q`` (in r units) square."""
    if not q > 0:
        raise InvalidArgument(f"q must be positive, got {q}")
    value = (q * q + q - SQRT3) / SQRT3
    if value <= 0:
        warnings.warn(f"lower bound is non-positive for q={q}; area too small for the estimate",
                      RuntimeWarning, stacklevel=2)
    return value


def lhp_tile_count(q: float) -> float:
    """Hexagon count of the linear hexagon packing.

    Lines of side-r hexagons touching at single points, plus one connecting
    hexagon per pair of adjacent lines. With the doubly covered fraction
    folded in this is the same closed form as :func:`lower_bound_transmissions`.
    """
    return lower_bound_transmissions(q)


def upper_bound_transmissions(q: int) -> int:
    """Most transmissions a density-independent algorithm can ever need: ``2(q^2 - 1) - 1``."""
    if q != int(q):
        raise InvalidArgument(f"q must be an integer, got {q}")
    q = int(q)
    if q < 2:
        raise InvalidArgument(f"upper bound needs q >= 2, got {q}")
    return 2 * (q * q - 1) - 1


def _heading(angle_deg: float) -> np.ndarray:
    a = math.radians(angle_deg)
    return np.array([math.cos(a), math.sin(a)])


def worst_case_topology(q: int, radius_r: float = 25.0, epsilon: float = 0.01) -> NetworkSnapshot:
    """Snake of ``(q-1)(q+1)`` node pairs whose unit-disk graph is an induced path.

    Pair members sit ``epsilon`` apart along the direction of travel, and the
    trailing node of one pair is ``r - epsilon/4`` from the leading node of the
    next, so only those two link up. Rows run ``q`` pairs horizontally and turn
    through one vertical connector pair (the last row has ``q + 1`` horizontal
    pairs); corner pairs are tilted 45 degrees. The result is checked before
    being returned: connected, greedy from the first node needs ``N - 1``
    transmissions, and every interior transmitter is a cut vertex.
    """
    if q != int(q) or q < 2:
        raise InvalidArgument(f"q must be an integer >= 2, got {q}")
    q = int(q)
    if not 0 < epsilon < radius_r / 10:
        raise InvalidArgument("epsilon must be in (0, r/10)")
    link = radius_r - epsilon / 4.0

    # per-pair orientation (degrees) and the direction of the link leaving it
    moves: list[tuple[float, float]] = []
    rows = q - 1
    for row in range(rows):
        fwd = 0.0 if row % 2 == 0 else 180.0
        last = row == rows - 1
        horizontal = q + 1 if last else q
        for k in range(horizontal):
            entering_turn = row > 0 and k == 0
            leaving_turn = not last and k == horizontal - 1
            if entering_turn or leaving_turn:
                # bisect the vertical and horizontal links
                orient = 45.0 if fwd == 0.0 else 135.0
            else:
                orient = fwd
            out = 90.0 if leaving_turn else fwd
            moves.append((orient, out))
        if not last:
            moves.append((90.0, 90.0))  # vertical connector pair

    pts = []
    cursor = np.array([radius_r / 2.0, radius_r / 2.0])
    for orient, out in moves:
        a = cursor.copy()
        b = a + epsilon * _heading(orient)
        pts.extend((a, b))
        cursor = b + link * _heading(out)
    pos = np.array(pts)
    pos += radius_r / 2.0 - pos.min(axis=0)
    snap = build_udg(pos, radius_r)
    _verify_worst_case(snap, q)
    return snap


def _verify_worst_case(snap: NetworkSnapshot, q: int) -> None:
    n = snap.n
    expected = 2 * (q * q - 1)
    if n != expected:
        raise ConstructionError(f"built {n} nodes, expected {expected}")
    if not is_connected(snap):
        raise ConstructionError("worst-case topology is disconnected")
    trace = greedy_broadcast(snap, 0)
    if len(trace) != n - 1:
        raise ConstructionError(f"greedy used {len(trace)} transmissions, expected {n - 1}")
    ends = {0, n - 1}
    for v in trace.transmitters:
        if v in ends:
            continue
        if len(components(snap, removed=[v])) < 2:
            raise ConstructionError(f"removing transmitter {v} leaves the graph connected")
