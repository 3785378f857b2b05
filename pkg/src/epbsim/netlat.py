"""Network latency model.

Agents sit on the nodes of an undirected weighted graph; the weight of
an edge is the number of rounds a message takes to cross it, and the
all-pairs shortest-path distance d(i, j) bounds what any agent can see.
A transaction created at global round r by an agent on node u reaches
node v at round r + d(u, v); a bid emitted at round k by builder j is
in node i's history at round t iff d(i, j) + k <= t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class LatencyGraph:
    """Edge list plus the precomputed integer distance matrix."""

    n: int
    edges: tuple  # ((u, v, weight), ...) with u < v
    dist: np.ndarray  # shape (n, n), dtype int64

    def distance(self, u: int, v: int) -> int:
        return int(self.dist[u, v])


def _distances(n: int, edges) -> np.ndarray:
    best: dict = {}
    for u, v, w in edges:
        key = (u, v)
        if key not in best or w < best[key]:
            best[key] = w
    rows, cols, data = [], [], []
    for (u, v), w in best.items():
        rows.append(u)
        cols.append(v)
        data.append(float(w))
    # Sparse input keeps explicit zeros as genuine zero-weight edges,
    # which a dense matrix would drop. Dijkstra is fine with w >= 0.
    mat = coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    d = shortest_path(mat, method="D", directed=False)
    if np.isinf(d).any():
        raise GraphError("graph is disconnected")
    return d.astype(np.int64)


def build_graph(n: int, edges) -> LatencyGraph:
    """Construct a LatencyGraph from an explicit edge list."""
    if n < 1:
        raise GraphError("graph needs at least one node")
    norm = []
    for u, v, w in edges:
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise GraphError(f"bad edge ({u}, {v})")
        if w < 0:
            raise GraphError("edge weights must be >= 0")
        norm.append((min(u, v), max(u, v), int(w)))
    norm.sort()
    return LatencyGraph(n=n, edges=tuple(norm), dist=_distances(n, norm))


def _components(n: int, edges) -> list:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, _ in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    groups: dict = {}
    for node in range(n):
        groups.setdefault(find(node), []).append(node)
    return sorted(groups.values(), key=min)


def generate_erdos_renyi(n: int, p: float, rng, weight_rule: str = "unit") -> LatencyGraph:
    """Sample G(n, p) with the given edge-weight rule and repair connectivity.

    Randomness is consumed in a fixed order: one uniform per unordered
    pair in lexicographic order, then one weight draw per present edge
    in the same order (uniform012 only). A disconnected sample is
    repaired by chaining the components' smallest nodes with unit-weight
    edges in ascending order, never by resampling.
    """
    if n < 2:
        raise GraphError("Erdos-Renyi generation needs n >= 2")
    if not 0.0 <= p <= 1.0:
        raise GraphError("p must lie in [0, 1]")
    if weight_rule not in ("unit", "uniform012", "zero"):
        raise GraphError(f"unknown weight rule {weight_rule!r}")

    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.append((u, v, 1))
    if weight_rule == "uniform012":
        edges = [(u, v, int(rng.integers(0, 3))) for u, v, _ in edges]
    elif weight_rule == "zero":
        # With p=1 this yields the idealised zero-latency network.
        edges = [(u, v, 0) for u, v, _ in edges]

    comps = _components(n, edges)
    for a, b in zip(comps, comps[1:]):
        edges.append((min(a), min(b), 1))
    return build_graph(n, edges)


def visible_mempool(node: int, rnd: int, mempool, graph: LatencyGraph, node_of) -> list:
    """Transactions that have propagated to `node` by global round `rnd`.

    node_of maps creator agent ids to graph nodes. Order of the input
    is preserved; visibility only ever grows with the round.
    """
    out = []
    for tx in mempool:
        if tx.created_at + graph.distance(node, node_of[tx.creator_id]) <= rnd:
            out.append(tx)
    return out


def visible_bids(node: int, rnd: int, bid_log, graph: LatencyGraph, node_of) -> list:
    """Bids whose emission round plus distance has elapsed by `rnd`."""
    out = []
    for bid in bid_log:
        if bid.round + graph.distance(node, node_of[bid.builder_id]) <= rnd:
            out.append(bid)
    return out
