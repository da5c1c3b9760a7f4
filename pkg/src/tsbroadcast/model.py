"""Network geometry: deployment, unit-disk adjacency and residual coverage."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument, NotConnectedError

DEFAULT_MAX_ATTEMPTS = 1000


@dataclass(frozen=True)
class DeploymentArea:
    side_d: float = 200.0
    inner_margin: float = 25.0

    def __post_init__(self):
        if not self.side_d > 2 * self.inner_margin:
            raise InvalidArgument(
                f"side_d={self.side_d} must exceed twice inner_margin={self.inner_margin}"
            )

    @property
    def inner_bounds(self) -> tuple[float, float]:
        # inner square is (d - margin) wide, centered in the deployment square
        half = self.inner_margin / 2.0
        return half, self.side_d - half

    def in_inner(self, x: float, y: float) -> bool:
        lo, hi = self.inner_bounds
        return lo < x < hi and lo < y < hi


@dataclass
class NetworkSnapshot:
    """Frozen view of the network: node positions plus the derived unit-disk graph.

    ``positions`` is an ``(n, 2)`` float array in meters, or ``None`` for
    abstract graphs built from an edge list (used by hand-made fixtures).
    ``adjacency[i]`` is the frozenset of neighbor ids of node ``i``.
    """

    positions: np.ndarray | None
    radius_r: float
    adjacency: list[frozenset[int]]
    labels: list[str] | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return len(self.adjacency)

    def degree(self, node: int) -> int:
        return len(self.adjacency[node])

    def mean_degree(self) -> float:
        if not self.adjacency:
            return 0.0
        return sum(len(a) for a in self.adjacency) / len(self.adjacency)

    def name(self, node: int) -> str:
        return self.labels[node] if self.labels else str(node)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]],
                   labels: Sequence[str] | None = None) -> "NetworkSnapshot":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for i, j in edges:
            if i == j:
                raise InvalidArgument(f"self-loop on node {i}")
            nbrs[i].add(j)
            nbrs[j].add(i)
        return cls(None, 1.0, [frozenset(s) for s in nbrs],
                   list(labels) if labels is not None else None)


def build_udg(positions, radius_r: float) -> NetworkSnapshot:
    """Connect every pair of distinct nodes strictly closer than ``radius_r``."""
    if not radius_r > 0:
        raise InvalidArgument(f"radius_r must be positive, got {radius_r}")
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(pos)):
        raise InvalidArgument("positions contain non-finite coordinates")
    n = len(pos)
    if n == 0:
        return NetworkSnapshot(pos, float(radius_r), [])
    diff = pos[:, None, :] - pos[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    close = dist2 < radius_r * radius_r
    np.fill_diagonal(close, False)
    adjacency = [frozenset(np.flatnonzero(row).tolist()) for row in close]
    return NetworkSnapshot(pos, float(radius_r), adjacency)


def components(snapshot: NetworkSnapshot, removed: Iterable[int] = ()) -> list[set[int]]:
    """Connected components by breadth-first search, ignoring ``removed`` nodes."""
    skip = set(removed)
    seen = set(skip)
    out = []
    for start in range(snapshot.n):
        if start in seen:
            continue
        comp = {start}
        seen.add(start)
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in snapshot.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    comp.add(w)
                    queue.append(w)
        out.append(comp)
    return out


def is_connected(snapshot: NetworkSnapshot) -> bool:
    if snapshot.n == 0:
        return False
    return len(components(snapshot)) == 1


def residual_coverage(snapshot: NetworkSnapshot, covered, node: int) -> int:
    """Number of 1-hop neighbors of ``node`` not in ``covered``.

    ``covered`` may be a set of ids or a boolean sequence indexed by id.
    """
    if isinstance(covered, (set, frozenset)):
        return sum(1 for j in snapshot.adjacency[node] if j not in covered)
    return sum(1 for j in snapshot.adjacency[node] if not covered[j])


def deploy_uniform(n: int, area: DeploymentArea, rng_seed: int, radius_r: float = 25.0,
                   require_connected: bool = False,
                   max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> NetworkSnapshot:
    """Place ``n`` nodes i.i.d. uniformly over the full ``d x d`` square.

    With ``require_connected`` the whole placement is redrawn until the
    unit-disk graph is connected, giving up after ``max_attempts`` draws.
    """
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(rng_seed)
    for _ in range(max_attempts if require_connected else 1):
        pos = rng.uniform(0.0, area.side_d, size=(n, 2))
        snap = build_udg(pos, radius_r)
        if not require_connected or is_connected(snap):
            return snap
    raise NotConnectedError(
        f"no connected placement of {n} nodes (d={area.side_d}, r={radius_r}) "
        f"in {max_attempts} attempts"
    )


def pick_source(snapshot: NetworkSnapshot, area: DeploymentArea,
                rng_seed) -> tuple[int, bool]:
    """Choose the broadcast source uniformly among nodes in the inner square.

    Returns ``(node, fallback)``; ``fallback`` is true when no node lies in the
    inner square and the choice was made over all nodes instead.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    if snapshot.positions is None:
        inner = []
    else:
        inner = [i for i, (x, y) in enumerate(snapshot.positions) if area.in_inner(x, y)]
    if inner:
        return int(inner[rng.integers(len(inner))]), False
    return int(rng.integers(snapshot.n)), True


def write_node_list(snapshot: NetworkSnapshot, fh) -> None:
    if snapshot.positions is None:
        raise InvalidArgument("snapshot has no positions to write")
    for i, (x, y) in enumerate(snapshot.positions):
        fh.write(f"{i} {float(x)!r} {float(y)!r}\n")


def read_node_list(fh, radius_r: float) -> NetworkSnapshot:
    """Parse an ``id x y`` node list; ids must be dense 0..n-1 in any order."""
    rows = {}
    for lineno, line in enumerate(fh, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InvalidArgument(f"line {lineno}: expected 'id x y', got {line!r}")
        try:
            i, x, y = int(parts[0]), float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise InvalidArgument(f"line {lineno}: {exc}") from None
        if i in rows:
            raise InvalidArgument(f"line {lineno}: duplicate node id {i}")
        rows[i] = (x, y)
    if sorted(rows) != list(range(len(rows))):
        raise InvalidArgument("node ids must be dense 0..n-1")
    pos = [rows[i] for i in range(len(rows))]
    return build_udg(np.array(pos, dtype=float).reshape(-1, 2), radius_r)


def distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])
