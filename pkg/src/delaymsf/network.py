"""Weighted oscillator networks with power injections.

Coupling capacities ``K_ij`` and set points ``P_i`` are both in s^-2 (the
swing equation is normalized by inertia).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Network",
    "NetworkError",
    "build_star",
    "build_watts_strogatz",
    "is_connected",
    "network_from_dict",
    "network_to_dict",
    "read_network",
    "write_network",
]


class NetworkError(ValueError):
    """Raised for invalid network data or generator arguments."""


def _check_adjacency(adjacency):
    n = adjacency.shape[0]
    if adjacency.ndim != 2 or adjacency.shape != (n, n):
        raise NetworkError(f"adjacency must be square, got shape {adjacency.shape}")
    if n < 2:
        raise NetworkError("a network needs at least 2 nodes")
    if not np.all(np.isfinite(adjacency)):
        i, j = np.argwhere(~np.isfinite(adjacency))[0]
        raise NetworkError(f"non-finite weight at ({i},{j})")
    for i in range(n):
        if adjacency[i, i] != 0:
            raise NetworkError(f"self-loop at node {i}: K[{i},{i}] = {adjacency[i, i]!r}")
    neg = np.argwhere(adjacency < 0)
    if len(neg):
        i, j = neg[0]
        raise NetworkError(f"negative weight at ({i},{j}): {adjacency[i, j]!r}")
    asym = np.argwhere(adjacency != adjacency.T)
    if len(asym):
        i, j = sorted(asym[0])
        raise NetworkError(
            f"asymmetric adjacency at ({i},{j}): "
            f"K[{i},{j}] = {adjacency[i, j]!r} but K[{j},{i}] = {adjacency[j, i]!r}"
        )


@dataclass(frozen=True, eq=False)
class Network:
    """Undirected weighted network of inertial oscillators.

    Parameters
    ----------
    adjacency : (n, n) array_like
        Symmetric coupling capacities ``K_ij >= 0`` with zero diagonal.
    power : (n,) array_like
        Power set points ``P_i``; positive for producers.
    labels : sequence of str, optional
        Node names.
    """

    adjacency: np.ndarray
    power: np.ndarray
    labels: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        adjacency = np.array(self.adjacency, dtype=float)
        power = np.array(self.power, dtype=float).reshape(-1)
        _check_adjacency(adjacency)
        if power.shape[0] != adjacency.shape[0]:
            raise NetworkError(
                f"power has {power.shape[0]} entries for {adjacency.shape[0]} nodes"
            )
        if not np.all(np.isfinite(power)):
            raise NetworkError(f"non-finite power at node {int(np.argmax(~np.isfinite(power)))}")
        adjacency.setflags(write=False)
        power.setflags(write=False)
        object.__setattr__(self, "adjacency", adjacency)
        object.__setattr__(self, "power", power)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != len(power):
                raise NetworkError("labels must have one entry per node")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def edges(self) -> list[tuple[int, int, float]]:
        """Undirected edges ``(a, b, weight)`` with ``a < b``."""
        rows, cols = np.nonzero(np.triu(self.adjacency, 1))
        return [(int(a), int(b), float(self.adjacency[a, b])) for a, b in zip(rows, cols)]

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.adjacency, 1)))

    def degrees(self) -> np.ndarray:
        return np.count_nonzero(self.adjacency, axis=1)

    def is_connected(self) -> bool:
        return is_connected(self.adjacency)

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (
            np.array_equal(self.adjacency, other.adjacency)
            and np.array_equal(self.power, other.power)
            and self.labels == other.labels
        )

    __hash__ = None

    def __repr__(self):
        return f"Network(n={self.n}, edges={self.n_edges})"


def is_connected(adjacency) -> bool:
    """Breadth-first search over the edges with positive weight."""
    adjacency = np.asarray(adjacency)
    n = adjacency.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in np.nonzero(adjacency[i] > 0)[0]:
            if not seen[j]:
                seen[j] = True
                queue.append(j)
    return bool(seen.all())


def build_star(leaves: int, P0: float, K0: float) -> Network:
    """Producer at node 0 feeding ``leaves`` consumers of power ``-P0`` each."""
    if leaves < 1:
        raise NetworkError("a star needs at least one leaf")
    if not K0 > 0:
        raise NetworkError(f"K0 must be positive, got {K0}")
    n = leaves + 1
    adjacency = np.zeros((n, n))
    adjacency[0, 1:] = K0
    adjacency[1:, 0] = K0
    power = np.full(n, -float(P0))
    power[0] = leaves * P0
    return Network(adjacency, power)


def build_watts_strogatz(
    n: int, k: int, p: float, P0: float, K0: float, seed: int | None = None
) -> Network:
    """Watts-Strogatz small world with alternating producers and consumers.

    Each node of a ring lattice links to its ``k`` nearest neighbours. Every
    lattice edge ``(i, i + s)`` is then rewired with probability ``p`` by
    detaching the far endpoint and redrawing it uniformly among nodes that
    would create neither a self-loop nor a duplicate edge. Powers alternate
    ``+P0, -P0`` along the original ring. The result may be disconnected;
    check with :meth:`Network.is_connected`.
    """
    if n % 2 or k % 2:
        raise NetworkError(f"n and k must be even, got n={n}, k={k}")
    if not 2 <= k < n:
        raise NetworkError(f"need 2 <= k < n, got k={k}, n={n}")
    if not 0.0 <= p <= 1.0:
        raise NetworkError(f"rewiring probability must lie in [0, 1], got {p}")
    if not K0 > 0:
        raise NetworkError(f"K0 must be positive, got {K0}")
    rng = np.random.default_rng(seed)
    nbrs = [set() for _ in range(n)]
    for i in range(n):
        for s in range(1, k // 2 + 1):
            j = (i + s) % n
            nbrs[i].add(j)
            nbrs[j].add(i)
    # same sweep order as the original construction: by lattice distance, then node
    for s in range(1, k // 2 + 1):
        for i in range(n):
            j = (i + s) % n
            if j not in nbrs[i] or rng.random() >= p:
                continue
            if len(nbrs[i]) >= n - 1:
                continue
            while True:
                target = int(rng.integers(n))
                if target != i and target not in nbrs[i]:
                    break
            nbrs[i].discard(j)
            nbrs[j].discard(i)
            nbrs[i].add(target)
            nbrs[target].add(i)
    adjacency = np.zeros((n, n))
    for i in range(n):
        for j in nbrs[i]:
            adjacency[i, j] = K0
    power = np.where(np.arange(n) % 2 == 0, float(P0), -float(P0))
    return Network(adjacency, power)


def network_to_dict(network: Network) -> dict:
    nodes = []
    for i in range(network.n):
        node = {"id": i, "power": float(network.power[i])}
        if network.labels is not None:
            node["label"] = network.labels[i]
        nodes.append(node)
    return {
        "nodes": nodes,
        "edges": [{"a": a, "b": b, "weight": w} for a, b, w in network.edges()],
    }


def write_network(network: Network, path) -> None:
    """Write the JSON network format (one entry per undirected edge)."""
    text = json.dumps(network_to_dict(network), indent=1) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def network_from_dict(doc) -> Network:
    try:
        nodes = doc["nodes"]
        edges = doc["edges"]
        ids = [int(node["id"]) for node in nodes]
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkError(f"malformed network document: {exc!r}") from exc
    n = len(nodes)
    if sorted(ids) != list(range(n)):
        raise NetworkError(f"node ids must be 0..{n - 1}, got {sorted(ids)}")
    power = np.zeros(n)
    labels = [None] * n
    for node in nodes:
        try:
            power[int(node["id"])] = float(node["power"])
        except (KeyError, TypeError, ValueError) as exc:
            raise NetworkError(f"malformed node entry {node!r}") from exc
        labels[int(node["id"])] = node.get("label")
    adjacency = np.zeros((n, n))
    seen = set()
    for edge in edges:
        try:
            a, b, w = int(edge["a"]), int(edge["b"]), float(edge["weight"])
        except (KeyError, TypeError, ValueError) as exc:
            raise NetworkError(f"malformed edge entry {edge!r}") from exc
        if not (0 <= a < n and 0 <= b < n):
            raise NetworkError(f"edge ({a},{b}) references an unknown node")
        # a directed duplicate with a different weight surfaces as asymmetry
        if (a, b) in seen:
            raise NetworkError(f"duplicate edge ({a},{b})")
        seen.add((a, b))
        adjacency[a, b] = w
        if (b, a) not in seen:
            adjacency[b, a] = w
    label_tuple = None if all(s is None for s in labels) else tuple(
        "" if s is None else s for s in labels
    )
    return Network(adjacency, power, label_tuple)


def read_network(path) -> Network:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise NetworkError(f"{path}: not valid JSON ({exc})") from exc
    return network_from_dict(doc)
