"""Concrete objectives, cost models, instance generators and file I/O.

Two benchmark families are provided: maximum coverage over directed graphs
(a node covers itself plus its out-neighbors) and influence maximization
under the independent cascade model.  Both worst-case constructions used in
the theoretical analysis (the adversarial knapsack and the bipartite cover
graph) are generated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .core import CostFn, ObjectiveFn, substream


class GraphParseError(ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        where = f" (line {lineno})" if lineno is not None else ""
        super().__init__(f"{message}{where}")


class DisconnectedSelectionError(ValueError):
    """Two selected nodes have no routing path between them."""


@dataclass
class DirectedGraph:
    """Adjacency-list graph; undirected graphs are stored symmetric.

    Each outgoing edge is (target, probability, weight).  Probability is the
    influence probability for cascade models, weight the routing length.
    """

    n: int
    adjacency: list  # per node: list of (target, prob, weight)
    positions: np.ndarray | None = None  # (n, 2) in the unit plane
    directed: bool = True

    def __post_init__(self):
        for u, edges in enumerate(self.adjacency):
            for (t, p, _w) in edges:
                if not 0 <= t < self.n:
                    raise ValueError(f"edge target {t} out of range")
                if not 0.0 <= p <= 1.0:
                    raise ValueError(f"edge probability {p} outside [0,1]")

    @classmethod
    def from_edges(cls, n, edges, positions=None, directed=True):
        """edges: iterable of (u, v) or (u, v, p) or (u, v, p, w)."""
        adjacency = [[] for _ in range(n)]
        for e in edges:
            u, v = e[0], e[1]
            p = float(e[2]) if len(e) > 2 and e[2] is not None else 1.0
            w = float(e[3]) if len(e) > 3 and e[3] is not None else None
            adjacency[u].append((v, p, w))
            if not directed:
                adjacency[v].append((u, p, w))
        return cls(n=n, adjacency=adjacency, positions=positions, directed=directed)

    def out_neighbors(self, u):
        return [t for (t, _p, _w) in self.adjacency[u]]

    def out_degree(self, u):
        return len(self.adjacency[u])

    def edge_count(self) -> int:
        """Number of edges; for undirected graphs each edge counts once."""
        total = sum(len(a) for a in self.adjacency)
        return total // 2 if not self.directed else total

    def edge_list(self):
        """Edges as stored; undirected edges reported once (u <= v)."""
        out = []
        for u, edges in enumerate(self.adjacency):
            for (t, p, w) in edges:
                if self.directed or u <= t:
                    out.append((u, t, p, w))
        return out


# ---------------------------------------------------------------------------
# objectives


class SetCoverObjective(ObjectiveFn):
    """f(X) = size of the union of the cover sets of the selected elements.

    Cover sets are kept as integer bitmasks over the universe, so one
    evaluation is a few OR operations plus a popcount.
    """

    def __init__(self, n, universe_size, cover_sets):
        self.n = n
        self.universe_size = universe_size
        self.masks = []
        for s in cover_sets:
            m = 0
            for e in s:
                if not 0 <= e < universe_size:
                    raise ValueError("covered element outside universe")
                m |= 1 << e
            self.masks.append(m)
        if len(self.masks) != n:
            raise ValueError("need one cover set per ground-set element")

    def __call__(self, bits) -> float:
        acc = 0
        masks = self.masks
        for i, b in enumerate(np.asarray(bits, dtype=np.uint8).tobytes()):
            if b:
                acc |= masks[i]
        return float(acc.bit_count())


class LinearObjective(ObjectiveFn):
    def __init__(self, values):
        self.values = np.asarray(values, dtype=float)
        if (self.values < 0).any():
            raise ValueError("values must be non-negative")
        self.n = self.values.size

    def __call__(self, bits) -> float:
        return float(self.values @ bits)


@dataclass
class CoverageInstance:
    """Maximum coverage over a directed graph: S_p = {p} | out-neighbors(p)."""

    graph: DirectedGraph

    def __post_init__(self):
        g = self.graph
        sets = [{p, *g.out_neighbors(p)} for p in range(g.n)]
        self.objective = SetCoverObjective(g.n, g.n, sets)

    @property
    def n(self):
        return self.graph.n


@dataclass
class BipartiteCoverInstance:
    """Selectable side U of a bipartite graph; f counts covered V-nodes."""

    n: int  # |U|
    universe_size: int  # |V|
    cover_sets: list

    def __post_init__(self):
        self.objective = SetCoverObjective(self.n, self.universe_size, self.cover_sets)


@dataclass
class KnapsackInstance:
    """Linear objective and linear cost over a list of (cost, value) items."""

    items: list  # (cost > 0, value >= 0)

    def __post_init__(self):
        costs = [c for (c, _v) in self.items]
        values = [v for (_c, v) in self.items]
        if any(c <= 0 for c in costs):
            raise ValueError("item costs must be positive")
        self.objective = LinearObjective(values)
        self.cost = LinearCost(costs)

    @property
    def n(self):
        return len(self.items)


@dataclass
class InfluenceInstance:
    """Influence maximization under the independent cascade model."""

    social_graph: DirectedGraph
    simulations: int = 500
    routing_graph: DirectedGraph | None = None
    per_node_cost: float = 0.1

    def __post_init__(self):
        if self.simulations < 1:
            raise ValueError("need at least one simulation")
        g = self.social_graph
        # adjacency as arrays for the cascade inner loop
        self._targets = [np.array([t for (t, _p, _w) in g.adjacency[u]], dtype=np.intp)
                         for u in range(g.n)]
        self._probs = [np.array([p for (_t, p, _w) in g.adjacency[u]], dtype=float)
                       for u in range(g.n)]

    @property
    def n(self):
        return self.social_graph.n


class IcSpreadObjective(ObjectiveFn):
    """Average cascade size over `inst.simulations` independent simulations.

    With `crn_seed` set, per-simulation live-edge draws come from fixed
    sub-seeds (common random numbers), which makes the estimate monotone in
    the seed set and reduces variance across evaluations.
    """

    deterministic = False

    def __init__(self, inst: InfluenceInstance, rng=None, crn_seed=None):
        self.inst = inst
        self.n = inst.n
        self.rng = rng if rng is not None else np.random.default_rng()
        self.crn_seed = crn_seed

    def __call__(self, bits) -> float:
        return ic_spread(self.inst, bits, self.rng, crn_seed=self.crn_seed)


def ic_spread(inst: InfluenceInstance, bits, rng, crn_seed=None) -> float:
    """Monte-Carlo estimate of the expected number of activated nodes."""
    bits = bits.bits if hasattr(bits, "bits") else bits
    seeds = np.flatnonzero(bits)
    if seeds.size == 0:
        return 0.0
    total = 0
    for sim in range(inst.simulations):
        sim_rng = substream(crn_seed, "ic", sim) if crn_seed is not None else rng
        total += _cascade(inst, seeds, sim_rng)
    return total / inst.simulations


def _cascade(inst, seeds, rng) -> int:
    """One cascade: every newly activated node gets one activation attempt
    per inactive out-neighbor."""
    active = np.zeros(inst.n, dtype=bool)
    active[seeds] = True
    frontier = list(seeds)
    count = seeds.size
    while frontier:
        next_frontier = []
        for u in frontier:
            targets = inst._targets[u]
            if targets.size == 0:
                continue
            hit = rng.random(targets.size) < inst._probs[u]
            for v in targets[hit]:
                if not active[v]:
                    active[v] = True
                    next_frontier.append(v)
                    count += 1
        frontier = next_frontier
    return count


def bfs_reachable(graph: DirectedGraph, seeds) -> int:
    """Number of nodes reachable from the seed set (oracle for p = 1)."""
    active = np.zeros(graph.n, dtype=bool)
    stack = list(seeds)
    active[list(seeds)] = True
    while stack:
        u = stack.pop()
        for v in graph.out_neighbors(u):
            if not active[v]:
                active[v] = True
                stack.append(v)
    return int(active.sum())


# ---------------------------------------------------------------------------
# cost models


class CardinalityCost(CostFn):
    min_increment = 1.0

    def __init__(self, n):
        self.n = n

    def __call__(self, bits) -> float:
        return float(np.count_nonzero(bits))


class LinearCost(CostFn):
    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=float)
        if (self.weights < 0).any():
            raise ValueError("costs must be non-negative")
        self.n = self.weights.size
        positive = self.weights[self.weights > 0]
        self.min_increment = float(positive.min()) if positive.size else 0.0

    def __call__(self, bits) -> float:
        return float(self.weights @ bits)


def random_linear_cost(n, rng) -> LinearCost:
    """Per-node random cost in (0, 1], drawn once and persisted per instance."""
    w = 1.0 - rng.random(n)  # rng.random is [0,1), so 1-u is (0,1]
    return LinearCost(w)


def outdegree_cost(graph: DirectedGraph, q: int = 6) -> LinearCost:
    """o(p) = 1 + max{d(p) - q, 0} with d the out-degree.

    The printed formula with a minus sign would go non-positive for
    high-degree nodes; the additive form keeps every variant monotone with
    positive per-node cost.
    """
    if q < 0:
        raise ValueError("q must be non-negative")
    w = [1.0 + max(graph.out_degree(p) - q, 0) for p in range(graph.n)]
    return LinearCost(w)


class RoutingCost(CostFn):
    """Per-node charge plus a nearest-neighbor route over the selected nodes.

    The route is built in the all-pairs shortest-path metric of the routing
    graph, starts at the selected node with the lowest index, visits every
    selected node and has no return leg.  Selections of size <= 1 contribute
    zero route length.
    """

    def __init__(self, inst: InfluenceInstance):
        if inst.routing_graph is None:
            raise ValueError("instance has no routing graph")
        self.inst = inst
        self.n = inst.n
        self.min_increment = inst.per_node_cost
        self._dist = None

    def _distances(self):
        if self._dist is None:
            g = self.inst.routing_graph
            rows, cols, data = [], [], []
            for (u, v, _p, w) in g.edge_list():
                if w is None:
                    raise ValueError("routing edges must carry weights")
                rows.append(u)
                cols.append(v)
                data.append(w)
            mat = csr_matrix((data, (rows, cols)), shape=(g.n, g.n))
            self._dist = dijkstra(mat, directed=g.directed)
        return self._dist

    def __call__(self, bits) -> float:
        selected = np.flatnonzero(bits)
        cost = self.inst.per_node_cost * selected.size
        if selected.size <= 1:
            return float(cost)
        dist = self._distances()
        unvisited = list(selected[1:])
        current = selected[0]  # lowest index
        while unvisited:
            legs = dist[current, unvisited]
            if not np.isfinite(legs).any():
                raise DisconnectedSelectionError(
                    f"no routing path from node {current} to {unvisited}")
            k = int(np.argmin(legs))  # argmin ties -> lowest position = lowest index
            cost += legs[k]
            current = unvisited.pop(k)
        return float(cost)


COST_VARIANTS = ("cardinality", "linear", "random-linear", "outdegree", "routing")


def make_cost(variant, *, n=None, graph=None, weights=None, q=6, rng=None,
              influence=None) -> CostFn:
    """Build a cost model by variant tag."""
    if variant == "cardinality":
        return CardinalityCost(n if n is not None else graph.n)
    if variant == "linear":
        return LinearCost(weights)
    if variant == "random-linear":
        if weights is not None:
            return LinearCost(weights)
        return random_linear_cost(n if n is not None else graph.n, rng)
    if variant == "outdegree":
        return outdegree_cost(graph, q=q)
    if variant == "routing":
        return RoutingCost(influence)
    raise ValueError(f"unknown cost variant {variant!r}")


# ---------------------------------------------------------------------------
# generators


def gen_adversarial_knapsack(n: int) -> KnapsackInstance:
    """Worst case for greedy adaptation under budget increases.

    n + 1 items: n/2 cheap low-value items (1, 1/n), n/2 items (2, 1) and a
    special item (1, 3) that is optimal alone at B = 1.
    """
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be a positive even integer")
    items = [(1.0, 1.0 / n)] * (n // 2) + [(2.0, 1.0)] * (n // 2) + [(1.0, 3.0)]
    return KnapsackInstance(items)


def gen_bipartite_cover(n: int) -> BipartiteCoverInstance:
    """Worst case for greedy adaptation under budget decreases.

    k = l = sqrt(n) disjoint subgraphs.  In each, hub u_1 covers the l-1
    odd-indexed v-nodes and every u_j (j >= 2) covers v_{2j-3}, v_{2j-2}.
    Ground set is U (size n); the objective counts covered V-nodes.
    """
    k = math.isqrt(n)
    if k * k != n or k < 2:
        raise ValueError("n must be a perfect square with sqrt(n) >= 2")
    l = k
    per_v = 2 * l - 2
    cover_sets = []
    for i in range(k):
        base = i * per_v
        # u_1: v_1, v_3, ..., v_{2l-3}  (1-indexed odd, j = 1..l-1)
        cover_sets.append({base + (2 * j - 1) - 1 for j in range(1, l)})
        # u_j, j = 2..l: v_{2j-3}, v_{2j-2}
        for j in range(2, l + 1):
            cover_sets.append({base + (2 * j - 3) - 1, base + (2 * j - 2) - 1})
    return BipartiteCoverInstance(n=n, universe_size=k * per_v, cover_sets=cover_sets)


def bipartite_cover_graph(inst: BipartiteCoverInstance) -> DirectedGraph:
    """Bipartite instance as a directed graph: U-nodes first, then V-nodes."""
    edges = []
    for u, s in enumerate(inst.cover_sets):
        for v in sorted(s):
            edges.append((u, inst.n + v))
    return DirectedGraph.from_edges(inst.n + inst.universe_size, edges)


def gen_ba_graph(n: int, m: int = 2, rng=None, edge_prob: float = 0.1) -> DirectedGraph:
    """Preferential-attachment social graph with m edges per new node.

    Each undirected attachment becomes two directed edges carrying the given
    influence probability.
    """
    import networkx as nx

    if n < 2:
        raise ValueError("need n >= 2")
    rng = rng if rng is not None else np.random.default_rng()
    g = nx.barabasi_albert_graph(n, min(m, n - 1), seed=int(rng.integers(2**31)))
    edges = []
    for (u, v) in g.edges():
        edges.append((u, v, edge_prob))
        edges.append((v, u, edge_prob))
    return DirectedGraph.from_edges(n, edges, directed=True)


def gen_er_graph(n: int, p: float, rng=None) -> DirectedGraph:
    """Erdos-Renyi graph with planar positions and Euclidean edge weights.

    Each unordered pair is an edge independently with probability p; nodes
    are placed uniformly at random in the unit square.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be a probability")
    rng = rng if rng is not None else np.random.default_rng()
    positions = rng.random((n, 2))
    edges = []
    for u in range(n):
        draws = rng.random(n - u - 1)
        for k, v in enumerate(range(u + 1, n)):
            if draws[k] < p:
                w = float(np.hypot(*(positions[u] - positions[v])))
                edges.append((u, v, 1.0, w))
    return DirectedGraph.from_edges(n, edges, positions=positions, directed=False)


def gen_random_digraph(n: int, p: float, rng, edge_prob: float = 0.1) -> DirectedGraph:
    """Directed ER-style graph; each ordered pair an edge with probability p."""
    edges = []
    for u in range(n):
        draws = rng.random(n)
        for v in range(n):
            if u != v and draws[v] < p:
                edges.append((u, v, edge_prob))
    return DirectedGraph.from_edges(n, edges, directed=True)


# ---------------------------------------------------------------------------
# file I/O


def load_dimacs(path) -> DirectedGraph:
    """DIMACS clique format: `p edge n m` header, `e u v` lines, 1-indexed.

    Edges are taken as directed in the order written.
    """
    n = m = None
    edges = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("c"):
                continue
            parts = line.split()
            if parts[0] == "p":
                if len(parts) != 4 or parts[1] != "edge":
                    raise GraphParseError("malformed problem line", lineno)
                n, m = int(parts[2]), int(parts[3])
            elif parts[0] == "e":
                if len(parts) != 3:
                    raise GraphParseError("edge line needs two endpoints", lineno)
                if n is None:
                    raise GraphParseError("edge before problem line", lineno)
                u, v = int(parts[1]) - 1, int(parts[2]) - 1
                if not (0 <= u < n and 0 <= v < n):
                    raise GraphParseError("endpoint outside declared node count", lineno)
                edges.append((u, v))
            else:
                raise GraphParseError(f"unknown record {parts[0]!r}", lineno)
    if n is None:
        raise GraphParseError("missing problem line")
    if len(edges) != m:
        raise GraphParseError(f"header declares {m} edges, found {len(edges)}")
    return DirectedGraph.from_edges(n, edges)


def save_dimacs(graph: DirectedGraph, path) -> None:
    edges = graph.edge_list()
    with open(path, "w") as fh:
        fh.write(f"p edge {graph.n} {len(edges)}\n")
        for (u, v, _p, _w) in edges:
            fh.write(f"e {u + 1} {v + 1}\n")


def load_edge_list(path) -> DirectedGraph:
    """Edge-list format: header `n m directed|undirected`, then
    `u v [p] [w]` lines, 0-indexed.  Optional `pos x y` lines carry node
    positions in node order."""
    with open(path) as fh:
        lines = fh.readlines()
    header = None
    edges = []
    positions = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 3 or parts[2] not in ("directed", "undirected"):
                raise GraphParseError("header must be `n m directed|undirected`", lineno)
            header = (int(parts[0]), int(parts[1]), parts[2] == "directed")
            continue
        if parts[0] == "pos":
            if len(parts) != 3:
                raise GraphParseError("pos line needs x and y", lineno)
            positions.append((float(parts[1]), float(parts[2])))
            continue
        if len(parts) < 2 or len(parts) > 4:
            raise GraphParseError("edge line needs `u v [p] [w]`", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
            p = float(parts[2]) if len(parts) > 2 else None
            w = float(parts[3]) if len(parts) > 3 else None
        except ValueError:
            raise GraphParseError("malformed edge line", lineno) from None
        edges.append((u, v, p, w))
    if header is None:
        raise GraphParseError("missing header line")
    n, m, directed = header
    if len(edges) != m:
        raise GraphParseError(f"header declares {m} edges, found {len(edges)}")
    pos = np.asarray(positions) if positions else None
    if pos is not None and len(pos) != n:
        raise GraphParseError(f"expected {n} pos lines, found {len(pos)}")
    return DirectedGraph.from_edges(n, edges, positions=pos, directed=directed)


def save_edge_list(graph: DirectedGraph, path) -> None:
    edges = graph.edge_list()
    with open(path, "w") as fh:
        kind = "directed" if graph.directed else "undirected"
        fh.write(f"{graph.n} {len(edges)} {kind}\n")
        if graph.positions is not None:
            for (x, y) in graph.positions:
                fh.write(f"pos {float(x)!r} {float(y)!r}\n")
        for (u, v, p, w) in edges:
            if w is not None:
                fh.write(f"{u} {v} {p!r} {w!r}\n")
            else:
                fh.write(f"{u} {v} {p!r}\n")
