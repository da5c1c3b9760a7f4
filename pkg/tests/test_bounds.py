import math

import numpy as np
import pytest

from tsbroadcast.baselines import greedy_broadcast
from tsbroadcast.bounds import (
    lhp_tile_count,
    lower_bound_transmissions,
    q_ratio,
    upper_bound_transmissions,
    worst_case_topology,
)
from tsbroadcast.errors import InvalidArgument
from tsbroadcast.model import components, is_connected


def test_lower_bound_values():
    assert lower_bound_transmissions(8) == pytest.approx(40.5692, abs=1e-4)
    assert lower_bound_transmissions(2) == pytest.approx(2.4641, abs=1e-4)
    assert lhp_tile_count(8) == lower_bound_transmissions(8)
    with pytest.warns(RuntimeWarning):
        assert lower_bound_transmissions(0.1) < 0
    with pytest.raises(InvalidArgument):
        lower_bound_transmissions(0)


def test_lower_bound_leading_term():
    q = 1e4
    assert lhp_tile_count(q) / (q * q / math.sqrt(3)) == pytest.approx(1, rel=1e-3)


def test_upper_bound_values():
    assert [upper_bound_transmissions(q) for q in (2, 3, 8)] == [5, 15, 125]
    with pytest.raises(InvalidArgument):
        upper_bound_transmissions(1)
    with pytest.raises(InvalidArgument):
        upper_bound_transmissions(2.5)


def test_q_ratio():
    assert q_ratio(200, 25) == 8


@pytest.mark.parametrize("q", [2, 3, 4, 5, 8])
def test_worst_case_topology(q):
    snap = worst_case_topology(q)
    n = 2 * (q * q - 1)
    assert snap.n == n and is_connected(snap)
    trace = greedy_broadcast(snap, 0)
    assert len(trace) == n - 1 == upper_bound_transmissions(q)
    for v in trace.transmitters[1:]:
        assert len(components(snap, removed=[v])) >= 2
    # induced path: two endpoints of degree 1, everything else degree 2
    assert sorted(snap.degree(i) for i in range(n)) == [1, 1] + [2] * (n - 2)
    for i in range(0, n, 2):
        assert np.hypot(*(snap.positions[i] - snap.positions[i + 1])) < 25


def test_worst_case_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        worst_case_topology(1)
    with pytest.raises(InvalidArgument):
        worst_case_topology(3, epsilon=5)
