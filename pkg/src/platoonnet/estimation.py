"""Fault-tolerant recovery of the initial platoon state from local data.

Each vehicle runs the linear iteration x[k+1] = W x[k] + A phi[k], where A
selects the (unknown) fault-injection columns and phi stacks the fault
signals.  A vehicle observes itself and its graph neighbors.  Recovery
enumerates candidate fault sets of size <= f, solves the stacked linear
system for each, keeps the consistent ones, and succeeds when they all agree
on x[0].
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .graph import Graph, neighbors


class ModelMismatchError(RuntimeError):
    """No candidate fault set is consistent with the measurements."""


@dataclass(frozen=True)
class WeightMatrix:
    """n x n iteration matrix supported on the diagonal plus graph edges."""

    graph: Graph
    matrix: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.matrix, dtype=np.float64)
        n = self.graph.n
        if w.shape != (n, n):
            raise ValueError(f"weight matrix must be {n}x{n}, got {w.shape}")
        support = self.graph._adjacency + np.eye(n, dtype=np.int64)
        if np.any((support == 0) & (w != 0.0)):
            raise ValueError("weight matrix has entries off the graph support")
        object.__setattr__(self, "matrix", w)

    def is_row_stochastic(self, tol: float = 1e-12) -> bool:
        w = self.matrix
        return bool(np.all(w >= 0.0) and np.max(np.abs(w.sum(axis=1) - 1.0)) <= tol)


def random_weights(g: Graph, seed: int) -> WeightMatrix:
    """Draw i.i.d. uniform [0.2, 1.0] entries on the support, row-major.

    Deterministic for a given seed: row i fills positions sorted({i} ∪ N(i))
    in increasing column order from numpy's default_rng(seed).
    """
    rng = np.random.default_rng(seed)
    w = np.zeros((g.n, g.n))
    for i in range(g.n):
        for j in sorted(set(neighbors(g, i)) | {i}):
            w[i, j] = rng.uniform(0.2, 1.0)
    return WeightMatrix(g, w)


@dataclass(frozen=True)
class FaultScenario:
    """Which vehicles inject faults, what they inject, and for how long.

    phi maps (vehicle, step) -> injected value; missing entries are zero.
    Steps run 0..horizon-1 and affect states x[1..horizon].
    """

    faulty: tuple[int, ...]
    phi: dict[tuple[int, int], float]
    horizon: int

    def __post_init__(self):
        object.__setattr__(self, "faulty", tuple(sorted(set(int(v) for v in self.faulty))))
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        for (v, k) in self.phi:
            if v not in self.faulty:
                raise ValueError(f"phi entry for vehicle {v} not in faulty set {self.faulty}")
            if not 0 <= k < self.horizon:
                raise ValueError(f"phi step {k} outside 0..{self.horizon - 1}")

    def phi_vector(self, step: int) -> np.ndarray:
        return np.array([self.phi.get((v, step), 0.0) for v in self.faulty])


def simulate_faulty(W: WeightMatrix, x0, scenario: FaultScenario) -> np.ndarray:
    """State trace x[0..horizon] under x[k+1] = W x[k] + A phi[k]."""
    n = W.graph.n
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (n,):
        raise ValueError(f"x0 must have shape ({n},)")
    states = np.zeros((scenario.horizon + 1, n))
    states[0] = x0
    for k in range(scenario.horizon):
        nxt = W.matrix @ states[k]
        for v in scenario.faulty:
            val = scenario.phi.get((v, k))
            if val is not None:
                nxt[v] = nxt[v] + val
        states[k + 1] = nxt
    return states


def packet_drop_fault(W: WeightMatrix, trace: np.ndarray, i: int, k: int) -> float:
    """Fault value a vehicle would inject at step k if its incoming neighbor
    packets were all lost: phi_i[k] = -sum_{j in N(i)} w_ij x_j[k]."""
    x = np.asarray(trace)[k]
    nbrs = neighbors(W.graph, i)
    return float(-np.dot(W.matrix[i, nbrs], x[nbrs]))


def packet_drop_scenario(
    W: WeightMatrix, x0, vehicle: int, horizon: int
) -> tuple[FaultScenario, np.ndarray]:
    """Forward-simulate a total packet loss at one vehicle, recording the
    equivalent fault signal.  Returns (scenario, states); simulate_faulty on
    the returned scenario reproduces the same states."""
    n = W.graph.n
    x0 = np.asarray(x0, dtype=np.float64)
    states = np.zeros((horizon + 1, n))
    states[0] = x0
    phi: dict[tuple[int, int], float] = {}
    for k in range(horizon):
        val = packet_drop_fault(W, states, vehicle, k)
        phi[(vehicle, k)] = val
        nxt = W.matrix @ states[k]
        nxt[vehicle] = nxt[vehicle] + val
        states[k + 1] = nxt
    return FaultScenario(faulty=(vehicle,), phi=phi, horizon=horizon), states


def measured_rows(g: Graph, observer: int) -> list[int]:
    """Vehicles whose states observer i sees: sorted N(i) ∪ {i}."""
    if not 0 <= observer < g.n:
        raise ValueError(f"observer {observer} out of range for n={g.n}")
    return sorted(set(neighbors(g, observer)) | {observer})


@dataclass(frozen=True)
class MeasurementTrace:
    """Stacked local measurements y[k] = C_i x[k], k = 0..L-1."""

    observer: int
    rows: tuple[int, ...]
    y: np.ndarray  # (L, len(rows))


def observe(g: Graph, states: np.ndarray, observer: int, length: int | None = None) -> MeasurementTrace:
    """Extract observer i's measurements from a full state trace."""
    rows = measured_rows(g, observer)
    states = np.asarray(states)
    L = states.shape[0] if length is None else length
    if L > states.shape[0]:
        raise ValueError(f"requested {L} measurement steps from a {states.shape[0]}-state trace")
    return MeasurementTrace(observer=observer, rows=tuple(rows), y=states[:L, rows].copy())


def observation_model(
    W: WeightMatrix, observer: int, length: int, fault_set=()
) -> tuple[np.ndarray, np.ndarray]:
    """Stacked observability and forced-response maps for one observer.

    Returns (O, J) such that the stacked measurements satisfy
    Y = O x[0] + J Phi exactly, where Phi stacks phi[0..L-2] (each of size
    |fault_set|, ordered by sorted fault set).  With length = 1, J has zero
    columns.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    g = W.graph
    n = g.n
    rows = measured_rows(g, observer)
    rp = len(rows)
    faults = sorted(set(int(v) for v in fault_set))
    # C W^p for p = 0..length-1, computed by repeated multiplication
    cw = np.zeros((length, rp, n))
    cw[0] = np.eye(n)[rows]
    for p in range(1, length):
        cw[p] = cw[p - 1] @ W.matrix
    obs = cw.reshape(length * rp, n)
    nf = len(faults)
    forced = np.zeros((length * rp, nf * max(length - 1, 0)))
    for k in range(1, length):
        for j in range(k):
            block = cw[k - 1 - j][:, faults]
            forced[k * rp:(k + 1) * rp, j * nf:(j + 1) * nf] = block
    return obs, forced


@dataclass(frozen=True)
class CandidateFit:
    """Least-squares fit of one candidate fault set."""

    fault_set: tuple[int, ...]
    x0: np.ndarray
    phi: np.ndarray  # (L-1, |fault_set|)
    residual: float


@dataclass(frozen=True)
class RecoveryResult:
    unique: bool
    x0: np.ndarray | None
    candidates: tuple[CandidateFit, ...]
    tol: float

    @property
    def best(self) -> CandidateFit:
        return min(self.candidates, key=lambda c: c.residual)


RANK_RCOND = 1e-10


def recover_initial_state(trace: MeasurementTrace, W: WeightMatrix, f: int) -> RecoveryResult:
    """Recover x[0] from one observer's measurements, tolerating <= f faults.

    Enumerates candidate fault sets (sizes 0..f, lexicographic, observer
    excluded), solves each stacked system by SVD least squares
    (rcond = 1e-10), and keeps candidates with residual
    < 1e-8 * (1 + ||Y||_inf).  Returns the common x[0] if all consistent
    candidates agree componentwise within the same tolerance, otherwise an
    ambiguity result listing them.  Raises ModelMismatchError if nothing is
    consistent.
    """
    if f < 0:
        raise ValueError("f must be >= 0")
    g = W.graph
    n = g.n
    L = int(trace.y.shape[0])
    y_flat = np.asarray(trace.y, dtype=np.float64).reshape(L * len(trace.rows))
    tol = 1e-8 * (1.0 + float(np.max(np.abs(y_flat))))

    others = [v for v in range(n) if v != trace.observer]
    consistent: list[CandidateFit] = []
    for size in range(f + 1):
        for fault_set in itertools.combinations(others, size):
            obs, forced = observation_model(W, trace.observer, L, fault_set)
            m_mat = np.hstack([obs, forced]) if forced.size else obs
            z, *_ = np.linalg.lstsq(m_mat, y_flat, rcond=RANK_RCOND)
            resid = float(np.max(np.abs(m_mat @ z - y_flat)))
            if resid < tol:
                phi_hat = z[n:].reshape(max(L - 1, 0), size) if size else np.zeros((max(L - 1, 0), 0))
                consistent.append(
                    CandidateFit(fault_set=fault_set, x0=z[:n].copy(), phi=phi_hat, residual=resid)
                )
    if not consistent:
        raise ModelMismatchError(
            f"no candidate fault set of size <= {f} is consistent with the measurements"
        )
    base = min(consistent, key=lambda c: c.residual)
    agree = all(np.max(np.abs(c.x0 - base.x0)) < tol for c in consistent)
    return RecoveryResult(
        unique=agree,
        x0=base.x0 if agree else None,
        candidates=tuple(consistent),
        tol=tol,
    )


def max_tolerable_faults(k: int) -> int:
    """Faults a P(n, k) platoon can tolerate for unique recovery: floor((k-1)/2)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return (k - 1) // 2
