"""Community detection on weighted undirected graphs.

Two optimizers over the same graph type: greedy modularity maximization
(local moves plus coarsening) and a two-level map-equation minimizer of
the same shape. Both are deterministic for a fixed seed; node visit
order is the only randomized choice and ties always resolve to the
smallest community id.

Self-loop convention: a loop of weight w contributes 2w to its node's
strength and 2w to the intra-community weight, so coarsening a
partition into super-nodes preserves both objectives exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

_EPS = 1e-12


class UGraph:
    """Undirected weighted graph over dense node ids 0..n-1.

    Parallel input edges accumulate. Self-loops are rejected on input;
    they appear only in coarsened graphs (pass loops= explicitly).
    """

    def __init__(self, n: int, edges, loops: dict[int, float] | None = None):
        if n < 0:
            raise InputError(f"node count must be non-negative, got {n}")
        self.n = n
        self.adj: list[dict[int, float]] = [dict() for _ in range(n)]
        self.loops: dict[int, float] = {}
        for u, v, w in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) references a node outside 0..{n - 1}")
            if w <= 0:
                raise InputError(f"edge ({u}, {v}) has non-positive weight {w}")
            if u == v:
                raise InputError(f"self-loop on node {u} not allowed in input edges")
            self.adj[u][v] = self.adj[u].get(v, 0.0) + w
            self.adj[v][u] = self.adj[v].get(u, 0.0) + w
        if loops:
            for u, w in loops.items():
                if not 0 <= u < n:
                    raise InputError(f"loop on node {u} outside 0..{n - 1}")
                if w <= 0:
                    raise InputError(f"loop on node {u} has non-positive weight {w}")
                self.loops[u] = float(w)

        self.strength = [sum(nbrs.values()) + 2.0 * self.loops.get(u, 0.0)
                         for u, nbrs in enumerate(self.adj)]
        self.m = sum(sum(nbrs.values()) for nbrs in self.adj) / 2.0 + sum(self.loops.values())

    def edge_iter(self):
        """Each undirected edge once, as (u, v, w) with u < v, sorted."""
        for u in range(self.n):
            for v in sorted(self.adj[u]):
                if u < v:
                    yield u, v, self.adj[u][v]

    @property
    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.adj) // 2 + len(self.loops)


@dataclass(frozen=True)
class Partition:
    assignments: tuple[int, ...]
    method: str
    quality: float

    @property
    def num_communities(self) -> int:
        return len(set(self.assignments))

    def communities(self) -> dict[int, list[int]]:
        groups: dict[int, list[int]] = {}
        for node, cid in enumerate(self.assignments):
            groups.setdefault(cid, []).append(node)
        return groups


def _validate_assignments(graph: UGraph, assignments) -> list[int]:
    comm = list(assignments)
    if len(comm) != graph.n:
        raise InputError(f"partition covers {len(comm)} nodes, graph has {graph.n}")
    for node, cid in enumerate(comm):
        if not isinstance(cid, (int, np.integer)) or cid < 0:
            raise InputError(f"node {node} has invalid community id {cid!r}")
    return [int(c) for c in comm]


def dense_relabel(assignments) -> list[int]:
    """Relabel community ids to 0..k-1 in order of first appearance."""
    mapping: dict[int, int] = {}
    out = []
    for cid in assignments:
        if cid not in mapping:
            mapping[cid] = len(mapping)
        out.append(mapping[cid])
    return out


def modularity(graph: UGraph, assignments) -> float:
    """Newman modularity: sum_c [ in_c/(2m) - (tot_c/(2m))^2 ].

    in_c counts each intra-community edge weight twice (and a loop of
    weight w as 2w); tot_c sums member strengths.
    """
    if graph.m <= 0:
        raise InputError("modularity undefined on a graph with no edge weight (m = 0)")
    comm = _validate_assignments(graph, assignments)
    two_m = 2.0 * graph.m
    sum_in: dict[int, float] = {}
    sum_tot: dict[int, float] = {}
    for u, v, w in graph.edge_iter():
        if comm[u] == comm[v]:
            sum_in[comm[u]] = sum_in.get(comm[u], 0.0) + 2.0 * w
    for u, lw in graph.loops.items():
        sum_in[comm[u]] = sum_in.get(comm[u], 0.0) + 2.0 * lw
    for u in range(graph.n):
        sum_tot[comm[u]] = sum_tot.get(comm[u], 0.0) + graph.strength[u]
    q = 0.0
    for c in sum_tot:
        q += sum_in.get(c, 0.0) / two_m - (sum_tot[c] / two_m) ** 2
    return q


def coarsen(graph: UGraph, assignments) -> tuple[UGraph, list[int]]:
    """Aggregate communities into super-nodes.

    Intra-community weight becomes a self-loop, so modularity and the
    map-equation cost of any partition of the coarse graph equal those
    of the corresponding fine partition. Returns (coarse graph, dense
    community label per fine node).
    """
    comm = dense_relabel(_validate_assignments(graph, assignments))
    k = max(comm) + 1 if comm else 0
    agg_edges: dict[tuple[int, int], float] = {}
    agg_loops: dict[int, float] = {}
    for u, v, w in graph.edge_iter():
        cu, cv = comm[u], comm[v]
        if cu == cv:
            agg_loops[cu] = agg_loops.get(cu, 0.0) + w
        else:
            key = (cu, cv) if cu < cv else (cv, cu)
            agg_edges[key] = agg_edges.get(key, 0.0) + w
    for u, lw in graph.loops.items():
        agg_loops[comm[u]] = agg_loops.get(comm[u], 0.0) + lw
    edges = [(a, b, w) for (a, b), w in sorted(agg_edges.items())]
    return UGraph(k, edges, loops=agg_loops), comm


def _louvain_level(graph: UGraph, rng) -> tuple[list[int], bool]:
    """One local-move phase. Returns (community per node, any move made)."""
    m = graph.m
    comm = list(range(graph.n))
    sum_tot = list(graph.strength)
    improved_any = False
    while True:
        moved = False
        for u in rng.permutation(graph.n):
            u = int(u)
            cu = comm[u]
            s_u = graph.strength[u]
            links: dict[int, float] = {}
            for v, w in graph.adj[u].items():
                c = comm[v]
                links[c] = links.get(c, 0.0) + w
            sum_tot[cu] -= s_u
            gain_stay = links.get(cu, 0.0) / m - sum_tot[cu] * s_u / (2.0 * m * m)
            best_c, best_gain = cu, gain_stay
            for c in sorted(links):
                if c == cu:
                    continue
                gain = links[c] / m - sum_tot[c] * s_u / (2.0 * m * m)
                if gain > best_gain + _EPS:
                    best_c, best_gain = c, gain
            comm[u] = best_c
            sum_tot[best_c] += s_u
            if best_c != cu:
                # accepted moves must strictly raise modularity
                assert best_gain - gain_stay > 0, "move accepted without modularity gain"
                moved = True
                improved_any = True
        if not moved:
            break
    return comm, improved_any


def louvain(graph: UGraph, seed: int = 0) -> Partition:
    """Greedy modularity maximization: local moves, then coarsen, repeat."""
    if graph.m <= 0:
        raise InputError("cannot cluster a graph with no edge weight (m = 0)")
    rng = np.random.default_rng(seed)
    node_comm = list(range(graph.n))
    level = graph
    while True:
        comm, improved = _louvain_level(level, rng)
        if not improved:
            break
        level, dense = coarsen(level, comm)
        node_comm = [dense[node_comm[i]] for i in range(graph.n)]
        if level.n == len(dense):
            # coarsening changed nothing (every community a singleton)
            break
    final = dense_relabel(node_comm)
    return Partition(tuple(final), "louvain", modularity(graph, final))


def _plogp(x: float) -> float:
    return x * math.log2(x) if x > 0 else 0.0


def _entropy(probs) -> float:
    h = 0.0
    for p in probs:
        if p > 0:
            h -= p * math.log2(p)
    return h


def _module_stats(graph: UGraph, comm: list[int]):
    """Per-community visit-rate mass and boundary weight, plus rates."""
    two_m = 2.0 * graph.m
    rates = [s / two_m for s in graph.strength]
    p_mass: dict[int, float] = {}
    boundary: dict[int, float] = {}
    for u in range(graph.n):
        p_mass[comm[u]] = p_mass.get(comm[u], 0.0) + rates[u]
        boundary.setdefault(comm[u], 0.0)
    for u, v, w in graph.edge_iter():
        if comm[u] != comm[v]:
            boundary[comm[u]] += w
            boundary[comm[v]] += w
    return rates, p_mass, boundary


def map_equation(graph: UGraph, assignments) -> float:
    """Two-level map equation in bits, straight from its definition.

    Node visit rates are proportional to strength; module exit
    probability is boundary weight over 2m. L = q*H(exit distribution)
    + sum_c (q_c + p_c)*H(within-module step distribution).
    """
    if graph.m <= 0:
        raise InputError("map equation undefined on a graph with no edge weight (m = 0)")
    comm = _validate_assignments(graph, assignments)
    two_m = 2.0 * graph.m
    rates, p_mass, boundary = _module_stats(graph, comm)
    q = {c: boundary[c] / two_m for c in boundary}
    q_total = sum(q.values())

    cost = 0.0
    if q_total > 0:
        cost += q_total * _entropy([qc / q_total for qc in q.values()])
    members: dict[int, list[int]] = {}
    for u in range(graph.n):
        members.setdefault(comm[u], []).append(u)
    for c, nodes in members.items():
        denom = q[c] + p_mass[c]
        if denom <= 0:
            continue
        within = [q[c] / denom] + [rates[u] / denom for u in nodes]
        cost += denom * _entropy(within)
    return cost


def map_equation_terms(graph: UGraph, assignments) -> float:
    """Same quantity as map_equation, via the expanded plogp identity.

    L = plogp(q) - 2*sum_c plogp(q_c) + sum_c plogp(q_c + p_c)
        - sum_i plogp(p_i). Kept separate so tests can cross-check the
    two routes against each other.
    """
    if graph.m <= 0:
        raise InputError("map equation undefined on a graph with no edge weight (m = 0)")
    comm = _validate_assignments(graph, assignments)
    two_m = 2.0 * graph.m
    rates, p_mass, boundary = _module_stats(graph, comm)
    q = {c: boundary[c] / two_m for c in boundary}
    q_total = sum(q.values())
    cost = _plogp(q_total)
    for c in q:
        cost -= 2.0 * _plogp(q[c])
        cost += _plogp(q[c] + p_mass[c])
    for r in rates:
        cost -= _plogp(r)
    return cost


def _reduced_map_cost(q_total: float, q: dict[int, float], p_mass: dict[int, float]) -> float:
    cost = _plogp(q_total)
    for c in q:
        cost -= 2.0 * _plogp(q[c])
        cost += _plogp(q[c] + p_mass.get(c, 0.0))
    return cost


def _infomap_level(graph: UGraph, rng) -> tuple[list[int], bool]:
    """One local-move phase minimizing the partition-dependent map cost."""
    two_m = 2.0 * graph.m
    comm = list(range(graph.n))
    rates = [s / two_m for s in graph.strength]
    # per-node boundary-capable weight: strength minus loop mass
    ext = [graph.strength[u] - 2.0 * graph.loops.get(u, 0.0) for u in range(graph.n)]
    p_mass = {u: rates[u] for u in range(graph.n)}
    boundary = {u: ext[u] for u in range(graph.n)}
    q_total_w = sum(boundary.values())
    next_cid = graph.n
    improved_any = False

    def term(b_w: float, p: float) -> float:
        qc = b_w / two_m
        return -2.0 * _plogp(qc) + _plogp(qc + p)

    while True:
        moved = False
        for u in rng.permutation(graph.n):
            u = int(u)
            cu = comm[u]
            p_u = rates[u]
            b_u = ext[u]
            k_in: dict[int, float] = {}
            for v, w in graph.adj[u].items():
                c = comm[v]
                k_in[c] = k_in.get(c, 0.0) + w

            # detach u; deltas below are relative to u-as-a-singleton
            b_cu_rest = boundary[cu] - b_u + 2.0 * k_in.get(cu, 0.0)
            p_cu_rest = p_mass[cu] - p_u
            was_alone = p_cu_rest <= _EPS
            if was_alone:
                b_cu_rest, p_cu_rest = 0.0, 0.0
            q0_w = q_total_w - boundary[cu] + b_cu_rest + b_u

            def join_delta(c: int) -> float:
                # map-cost change of merging the singleton {u} into c,
                # relative to the detached state
                b_c = b_cu_rest if c == cu else boundary[c]
                p_c = p_cu_rest if c == cu else p_mass[c]
                joined_b = b_c + b_u - 2.0 * k_in.get(c, 0.0)
                q_w = q0_w - b_u - b_c + joined_b
                before = _plogp(q0_w / two_m) + term(b_u, p_u) + term(b_c, p_c)
                after = _plogp(q_w / two_m) + term(joined_b, p_c + p_u)
                return after - before

            current_delta = 0.0 if was_alone else join_delta(cu)
            best_c, best_delta = None, 0.0  # None = stand-alone module
            for c in sorted(k_in):
                if c == cu and was_alone:
                    continue
                delta = join_delta(c)
                if delta < best_delta - _EPS:
                    best_c, best_delta = c, delta

            if best_delta < current_delta - _EPS:
                # strict decrease in map cost; apply the move
                boundary[cu] = b_cu_rest
                p_mass[cu] = p_cu_rest
                if best_c is None:
                    new_c = next_cid
                    next_cid += 1
                    boundary[new_c] = b_u
                    p_mass[new_c] = p_u
                    q_total_w = q0_w
                    comm[u] = new_c
                else:
                    b_c = b_cu_rest if best_c == cu else boundary[best_c]
                    p_c = p_cu_rest if best_c == cu else p_mass[best_c]
                    joined_b = b_c + b_u - 2.0 * k_in.get(best_c, 0.0)
                    boundary[best_c] = joined_b
                    p_mass[best_c] = p_c + p_u
                    q_total_w = q0_w - b_u - b_c + joined_b
                    comm[u] = best_c
                moved = True
                improved_any = True
        if not moved:
            break
    return comm, improved_any


def infomap(graph: UGraph, seed: int = 0) -> Partition:
    """Two-level map-equation minimization with the local-move/coarsen loop."""
    if graph.m <= 0:
        raise InputError("cannot cluster a graph with no edge weight (m = 0)")
    rng = np.random.default_rng(seed)
    node_comm = list(range(graph.n))
    level = graph
    prev_cost = map_equation_terms(graph, node_comm)
    while True:
        comm, improved = _infomap_level(level, rng)
        if not improved:
            break
        level, dense = coarsen(level, comm)
        node_comm = [dense[node_comm[i]] for i in range(graph.n)]
        cost = map_equation_terms(graph, node_comm)
        assert cost <= prev_cost + 1e-9, "coarsening pass raised the map cost"
        prev_cost = cost
        if level.n == len(dense):
            break
    final = dense_relabel(node_comm)
    return Partition(tuple(final), "infomap", map_equation(graph, final))


def detect(graph: UGraph, method: str, seed: int = 0) -> Partition:
    if method == "louvain":
        return louvain(graph, seed)
    if method == "infomap":
        return infomap(graph, seed)
    raise InputError(f"unknown clustering method {method!r}; use 'louvain' or 'infomap'")


def _ugraph_from_keyed_edges(keys: list, weighted_pairs) -> UGraph:
    index = {k: i for i, k in enumerate(keys)}
    acc: dict[tuple[int, int], float] = {}
    for a, b, w in weighted_pairs:
        i, j = index[a], index[b]
        key = (i, j) if i < j else (j, i)
        acc[key] = acc.get(key, 0.0) + w
    edges = [(i, j, w) for (i, j), w in sorted(acc.items())]
    return UGraph(len(keys), edges)


def project_news_graph(graph) -> tuple[UGraph, list[str]]:
    """Tweet nodes with unit-weight retweet edges; returns (graph, ids).

    Retweet delay is deliberately not used as clustering weight.
    """
    keys = sorted(graph.originals) + sorted(graph.retweets)
    pairs = ((e.original_id, e.retweet_id, 1.0) for e in graph.edges)
    return _ugraph_from_keyed_edges(keys, pairs), keys


def project_hashtag_network(net) -> tuple[UGraph, list[str]]:
    """Hashtags as nodes, co-occurrence counts as weights."""
    keys = sorted(net.counts)
    pairs = ((a, b, float(w)) for (a, b), w in net.pair_counts.items())
    return _ugraph_from_keyed_edges(keys, pairs), keys


def user_key(tweet) -> str:
    """Stable user identifier; placeholders get a synthetic '~id' key."""
    return tweet.user_id if tweet.user_id is not None else f"~{tweet.tweet_id}"


def project_user_interactions(graph) -> tuple[UGraph, list[str]]:
    """Users as nodes; each retweet adds weight 1 between the two authors."""
    tweets = {**graph.originals, **graph.retweets}
    keys = sorted({user_key(t) for t in tweets.values()})
    pairs = []
    for e in graph.edges:
        a = user_key(tweets[e.original_id])
        b = user_key(tweets[e.retweet_id])
        if a != b:
            pairs.append((a, b, 1.0))
    return _ugraph_from_keyed_edges(keys, pairs), keys
