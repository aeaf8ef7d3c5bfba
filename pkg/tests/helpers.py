"""Shared test utilities: seeded random graph generation and references."""

from __future__ import annotations

from platoonnet.graph import Graph, neighbors


def random_connected_graph(rng, n_min=4, n_max=10, avoid_complete=True) -> Graph:
    """Random connected graph: random spanning tree plus extra edges.

    With avoid_complete the sampler rejects complete graphs, for which the
    spectral bound lambda2 <= vertex connectivity does not hold
    (lambda2(K_n) = n but the connectivity is n - 1).
    """
    while True:
        n = int(rng.integers(n_min, n_max + 1))
        edges = set()
        order = rng.permutation(n)
        for idx in range(1, n):
            a = int(order[idx])
            b = int(order[int(rng.integers(0, idx))])
            edges.add((min(a, b), max(a, b)))
        max_m = n * (n - 1) // 2
        extra = int(rng.integers(0, max_m - n + 2))
        for _ in range(extra):
            a, b = (int(v) for v in rng.integers(0, n, 2))
            if a != b:
                edges.add((min(a, b), max(a, b)))
        if avoid_complete and len(edges) == max_m:
            continue
        return Graph.from_edges(n, sorted(edges))


def missing_edges(g: Graph) -> list[tuple[int, int]]:
    present = set(g.edges)
    return [
        (i, j)
        for i in range(g.n)
        for j in range(i + 1, g.n)
        if (i, j) not in present
    ]


def brute_force_robustness(g: Graph) -> int:
    """Unpruned reference: scan every disjoint nonempty subset pair.

    Only usable for small n (3^n pairs); the production version must agree.
    """
    n = g.n
    neigh = [set(neighbors(g, v)) for v in range(n)]

    def max_reach(subset: frozenset) -> int:
        return max(len(neigh[v] - subset) for v in subset)

    best = n  # upper bound; minimized below
    full = 1 << n
    for mask1 in range(1, full):
        s1 = frozenset(v for v in range(n) if mask1 >> v & 1)
        comp = full - 1 & ~mask1
        sub = comp
        while sub:
            s2 = frozenset(v for v in range(n) if sub >> v & 1)
            best = min(best, max(max_reach(s1), max_reach(s2)))
            sub = (sub - 1) & comp
    return best


def brute_force_vertex_connectivity(g: Graph) -> int:
    """Reference via removal sets: smallest vertex set whose deletion
    disconnects the graph (n - 1 for complete graphs)."""
    from itertools import combinations

    n = g.n
    neigh = [neighbors(g, v) for v in range(n)]

    def connected_after(removed: set) -> bool:
        remaining = [v for v in range(n) if v not in removed]
        if len(remaining) <= 1:
            return True
        seen = {remaining[0]}
        stack = [remaining[0]]
        while stack:
            v = stack.pop()
            for w in neigh[v]:
                if w not in removed and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(remaining)

    for size in range(n - 1):
        for removed in combinations(range(n), size):
            if not connected_after(set(removed)):
                return size
    return n - 1
