"""Exact connectivity measures for platoon graphs.

Four measures with independent computations: vertex and edge connectivity via
unit-capacity max-flow (BFS augmentation), r-robustness and the isoperimetric
constant by exhaustive subset search (exact, refused above a size limit), and
algebraic connectivity from a dense symmetric eigensolver.  Closed-form values
for the k-nearest-neighbor family P(n, k) are provided alongside so the two
routes can be checked against each other.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import Graph, PlatoonSpec, build_knn_platoon, degrees, laplacian, neighbors

ROBUSTNESS_LIMIT = 14
ISO_LIMIT = 22


class ExhaustiveLimitError(RuntimeError):
    """An exhaustive subset search was refused because the graph is too large."""


def is_connected(g: Graph) -> bool:
    if g.n == 1:
        return True
    nb = g.neighbor_bitmasks
    seen = 1
    frontier = [0]
    while frontier:
        v = frontier.pop()
        new = nb[v] & ~seen
        while new:
            w = (new & -new).bit_length() - 1
            new &= new - 1
            seen |= 1 << w
            frontier.append(w)
    return seen == (1 << g.n) - 1


def is_complete(g: Graph) -> bool:
    return g.m == g.n * (g.n - 1) // 2


def _max_flow(num_nodes: int, arcs: list[tuple[int, int, int]], s: int, t: int) -> int:
    """Integer max-flow by shortest augmenting paths (BFS / Edmonds-Karp).

    arcs is a list of (u, v, capacity); reverse residual arcs are created
    automatically.  Deterministic: adjacency follows arc insertion order.
    """
    cap: list[dict[int, int]] = [dict() for _ in range(num_nodes)]
    for u, v, c in arcs:
        cap[u][v] = cap[u].get(v, 0) + c
        cap[v].setdefault(u, 0)
    flow = 0
    while True:
        parent: dict[int, int] = {s: -1}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if u == t:
                break
            for v, c in cap[u].items():
                if c > 0 and v not in parent:
                    parent[v] = u
                    queue.append(v)
        if t not in parent:
            return flow
        # walk back to find the bottleneck, then push
        aug = None
        v = t
        while v != s:
            u = parent[v]
            c = cap[u][v]
            aug = c if aug is None or c < aug else aug
            v = u
        v = t
        while v != s:
            u = parent[v]
            cap[u][v] -= aug
            cap[v][u] += aug
            v = u
        flow += aug


def vertex_connectivity(g: Graph) -> int:
    """Vertex connectivity by Menger's theorem over vertex-split max-flows.

    Each vertex v becomes v_in -> v_out with capacity 1; every edge {x, y}
    contributes infinite-capacity arcs x_out -> y_in and y_out -> x_in.  The
    minimum is taken over s in {u} ∪ N(u) for a fixed minimum-degree u and all
    t non-adjacent to s.  Complete graphs return n-1, disconnected graphs 0.
    """
    n = g.n
    if n == 1:
        return 0
    if not is_connected(g):
        return 0
    if is_complete(g):
        return n - 1

    inf = n  # any s-t vertex cut has size < n

    def split_flow(s: int, t: int) -> int:
        arcs = [(2 * v, 2 * v + 1, 1) for v in range(n)]
        for i, j in g.edges:
            arcs.append((2 * i + 1, 2 * j, inf))
            arcs.append((2 * j + 1, 2 * i, inf))
        return _max_flow(2 * n, arcs, 2 * s + 1, 2 * t)

    degs = degrees(g)
    u = int(np.argmin(degs))
    best = n - 1
    for s in [u] + neighbors(g, u):
        for t in range(n):
            if t != s and not g.has_edge(s, t):
                best = min(best, split_flow(s, t))
                if best == 1:
                    return 1
    return best


def edge_connectivity(g: Graph) -> int:
    """Edge connectivity: min over t != 0 of max-flow(0, t), unit capacities."""
    n = g.n
    if n == 1:
        return 0
    arcs = []
    for i, j in g.edges:
        arcs.append((i, j, 1))
        arcs.append((j, i, 1))
    best = None
    for t in range(1, n):
        f = _max_flow(n, arcs, 0, t)
        best = f if best is None or f < best else best
        if best == 0:
            return 0
    return best


def _subset_mask(g: Graph, S) -> int:
    mask = 0
    for v in S:
        v = int(v)
        if not 0 <= v < g.n:
            raise ValueError(f"vertex {v} out of range for n={g.n}")
        mask |= 1 << v
    return mask


def is_r_reachable(g: Graph, S, r: int) -> bool:
    """True iff some vertex of S has at least r neighbors outside S."""
    mask = _subset_mask(g, S)
    if mask == 0:
        raise ValueError("S must be nonempty")
    nb = g.neighbor_bitmasks
    T = mask
    while T:
        v = (T & -T).bit_length() - 1
        T &= T - 1
        if (nb[v] & ~mask).bit_count() >= r:
            return True
    return False


def robustness(g: Graph, limit: int = ROBUSTNESS_LIMIT) -> int:
    """Largest r such that every pair of nonempty disjoint subsets has an
    r-reachable member, by exhaustive enumeration of subset pairs.

    Refuses graphs with n > limit (the search is exponential).  Disconnected
    graphs yield 0; a single vertex reports the definitional cap ceil(n/2)=1
    (there are no subset pairs to constrain it).
    """
    n = g.n
    if n > limit:
        raise ExhaustiveLimitError(
            f"exhaustive search refused: robustness on n={n} exceeds limit {limit}"
        )
    full = (1 << n) - 1
    nb = g.neighbor_bitmasks

    # reach[S] = max over v in S of |N(v) \ S|
    reach = [0] * (full + 1)
    for S in range(1, full + 1):
        notS = ~S
        best_r = 0
        T = S
        while T:
            v = (T & -T).bit_length() - 1
            T &= T - 1
            c = (nb[v] & notS).bit_count()
            if c > best_r:
                best_r = c
        reach[S] = best_r

    # min over pairs (S1, S2 subset of complement) of max(reach).  Seeded with
    # ceil(n/2), which a half/half partition pair always attains for n >= 2,
    # so pruning on the running best never changes the result.
    best = (n + 1) // 2
    for s1 in range(1, full):
        r1 = reach[s1]
        if r1 >= best:
            continue
        comp = full ^ s1
        sub = comp
        while sub:
            r2 = reach[sub]
            if r2 < best:
                best = r1 if r1 > r2 else r2
                if r1 >= best or best == 0:
                    break
            sub = (sub - 1) & comp
        if best == 0:
            break
    return best


def isoperimetric_constant(g: Graph, limit: int = ISO_LIMIT) -> tuple[Fraction, float]:
    """Exhaustive isoperimetric constant min_{0<|S|<=n/2} |boundary(S)| / |S|.

    Returns the exact rational together with its float value.  Refuses
    n > limit.  The search is vectorized over all 2^n subsets: for subset
    bitmask S, |boundary(S)| = sum_v deg(v)·[v in S] - 2·|E(S)|.
    """
    n = g.n
    if n > limit:
        raise ExhaustiveLimitError(
            f"exhaustive search refused: isoperimetric constant on n={n} exceeds limit {limit}"
        )
    if n < 2:
        raise ValueError("isoperimetric constant requires n >= 2")
    total = 1 << n
    idx = np.arange(total, dtype=np.uint32)
    size = np.bitwise_count(idx).astype(np.int32)
    bits = [((idx >> np.uint32(v)) & np.uint32(1)).astype(np.uint8) for v in range(n)]
    degs = degrees(g)
    boundary = np.zeros(total, dtype=np.int32)
    for v in range(n):
        if degs[v]:
            boundary += np.int32(degs[v]) * bits[v]
    for i, j in g.edges:
        both = (bits[i] & bits[j]).astype(np.int32)
        boundary -= both
        boundary -= both

    valid = (size > 0) & (2 * size <= n)
    pos = np.flatnonzero(valid)
    # the ratios are quotients of small integers, so float comparison is exact
    am = pos[np.argmin(boundary[pos] / size[pos])]
    frac = Fraction(int(boundary[am]), int(size[am]))
    return frac, float(frac)


def algebraic_connectivity(g: Graph) -> float:
    """Second-smallest Laplacian eigenvalue (dense symmetric eigensolver)."""
    if g.n < 2:
        return 0.0
    w = np.linalg.eigvalsh(laplacian(g).astype(np.float64))
    return float(w[1])


def lambda2_bounds(spec: PlatoonSpec) -> tuple[float, float]:
    """Analytic bracket for the algebraic connectivity of P(n, k):

        max{2k - n + 2, k(k+1)^2 / (16 nbar^2)}  <=  lambda2  <=  2k(k+1)/nbar

    with nbar = floor(n/2).
    """
    n, k = spec.n, spec.k
    nbar = n // 2
    lower = max(float(2 * k - n + 2), k * (k + 1) ** 2 / (16.0 * nbar * nbar))
    upper = 2.0 * k * (k + 1) / nbar
    return lower, upper


_UNVERIFIED = "closed-form, not verified exhaustively"


@dataclass
class ConnectivityReport:
    """Bundle of the connectivity measures for one graph."""

    n: int
    vertex_conn: int
    edge_conn: int
    lambda2: float
    robustness: int | None = None
    robustness_note: str | None = None
    iso: Fraction | None = None
    iso_note: str | None = None
    lambda2_bounds: tuple[float, float] | None = None

    def to_json_dict(self) -> dict:
        iso_obj = None
        if self.iso is not None:
            iso_obj = {
                "num": self.iso.numerator,
                "den": self.iso.denominator,
                "float": float(self.iso),
            }
        bounds_obj = None
        if self.lambda2_bounds is not None:
            bounds_obj = {"lower": self.lambda2_bounds[0], "upper": self.lambda2_bounds[1]}
        return {
            "n": self.n,
            "vertex_connectivity": self.vertex_conn,
            "edge_connectivity": self.edge_conn,
            "lambda2": self.lambda2,
            "lambda2_bounds": bounds_obj,
            "robustness": self.robustness,
            "robustness_note": self.robustness_note,
            "isoperimetric": iso_obj,
            "isoperimetric_note": self.iso_note,
        }


def knn_closed_forms(spec: PlatoonSpec) -> ConnectivityReport:
    """Analytic report for P(n, k): vertex connectivity = edge
    connectivity = robustness = k and
    iso = k(k+1) / (2 floor(n/2)), with lambda2 from the eigensolver plus its
    analytic bracket.

    The robustness and isoperimetric closed forms are only exhaustively
    verified for k <= floor(n/2); beyond that they carry an 'unverified'
    note (and the robustness value is in fact capped at ceil(n/2) by the
    definition, so treat the note seriously).
    """
    n, k = spec.n, spec.k
    nbar = n // 2
    note = None if k <= nbar else _UNVERIFIED
    g = build_knn_platoon(spec)
    return ConnectivityReport(
        n=n,
        vertex_conn=k,
        edge_conn=k,
        lambda2=algebraic_connectivity(g),
        robustness=k,
        robustness_note=note,
        iso=Fraction(k * (k + 1), 2 * nbar),
        iso_note=note,
        lambda2_bounds=lambda2_bounds(spec),
    )


def connectivity_report(
    g: Graph,
    *,
    robust_limit: int = ROBUSTNESS_LIMIT,
    iso_limit: int = ISO_LIMIT,
    require_robustness: bool = False,
    require_iso: bool = False,
    platoon: PlatoonSpec | None = None,
) -> ConnectivityReport:
    """Measure every connectivity quantity of g that fits within the limits.

    Exhaustive measures over the limit are skipped with a note, unless
    explicitly required, in which case ExhaustiveLimitError propagates.
    """
    rb: int | None = None
    rb_note = None
    if g.n <= robust_limit or require_robustness:
        rb = robustness(g, limit=robust_limit)
    else:
        rb_note = "skipped: n too large"
    iso: Fraction | None = None
    iso_note = None
    if g.n <= iso_limit or require_iso:
        iso, _ = isoperimetric_constant(g, limit=iso_limit)
    else:
        iso_note = "skipped: n too large"
    return ConnectivityReport(
        n=g.n,
        vertex_conn=vertex_connectivity(g),
        edge_conn=edge_connectivity(g),
        lambda2=algebraic_connectivity(g),
        robustness=rb,
        robustness_note=rb_note,
        iso=iso,
        iso_note=iso_note,
        lambda2_bounds=lambda2_bounds(platoon) if platoon is not None else None,
    )
