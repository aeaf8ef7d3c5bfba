"""Resilient consensus by trimmed averaging (W-MSR).

At each step every normal vehicle discards up to f neighbor values strictly
greater than its own and up to f strictly smaller, then averages what is left
(own value included) with uniform weights.  Adversarial vehicles broadcast an
arbitrary scripted signal instead of following the update.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .graph import Graph, neighbors


class Constant:
    """Broadcast a fixed value."""

    def __init__(self, value: float):
        self.value_ = float(value)

    def value(self, step: int) -> float:
        return self.value_


class Ramp:
    """Broadcast start + slope * step."""

    def __init__(self, start: float, slope: float):
        self.start = float(start)
        self.slope = float(slope)

    def value(self, step: int) -> float:
        return self.start + self.slope * step


class Sinusoid:
    def __init__(self, amplitude: float, omega: float, phase: float = 0.0):
        self.amplitude = float(amplitude)
        self.omega = float(omega)
        self.phase = float(phase)

    def value(self, step: int) -> float:
        return self.amplitude * math.sin(self.omega * step + self.phase)


class SeededRandom:
    """Uniform draws in [low, high]; value(step) is a pure function of
    (seed, step), so traces are reproducible and randomly accessible."""

    def __init__(self, low: float, high: float, seed: int):
        self.low = float(low)
        self.high = float(high)
        self.seed = int(seed)

    def value(self, step: int) -> float:
        rng = np.random.default_rng((self.seed, step))
        return float(rng.uniform(self.low, self.high))


@dataclass(frozen=True)
class Adversary:
    vehicle: int
    strategy: object  # anything with .value(step) -> float


def wmsr_update(own: float, neighbor_values, f: int) -> float:
    """One trimmed-average step.

    neighbor_values is a sequence of (vehicle, value).  Up to f values
    strictly greater than own are removed (largest first) and up to f
    strictly smaller (smallest first); ties among equal removable values drop
    the higher vehicle index first.  Values equal to own are never removed.
    The survivors and own value are averaged uniformly.
    """
    if f < 0:
        raise ValueError("f must be >= 0")
    greater = [(v, val) for v, val in neighbor_values if val > own]
    smaller = [(v, val) for v, val in neighbor_values if val < own]
    equal = [(v, val) for v, val in neighbor_values if val == own]
    # remove the f largest; among equal values the higher index goes first
    greater.sort(key=lambda t: (t[1], t[0]), reverse=True)
    smaller.sort(key=lambda t: (-t[1], t[0]), reverse=True)
    kept = [val for _, val in greater[f:]] + [val for _, val in smaller[f:]]
    kept += [val for _, val in equal]
    return (own + sum(kept)) / (1 + len(kept))


def is_f_local(g: Graph, adversary_set, f: int) -> bool:
    """True iff every vehicle outside the set has <= f neighbors inside it."""
    s = set(int(v) for v in adversary_set)
    for i in range(g.n):
        if i in s:
            continue
        if sum(1 for j in neighbors(g, i) if j in s) > f:
            return False
    return True


@dataclass(frozen=True)
class ConsensusTrace:
    values: np.ndarray  # (T+1, n)
    normal: tuple[int, ...]
    adversaries: tuple[int, ...]
    f: int
    tol: float
    converged_at: int | None
    safety_violations: tuple[tuple[int, int], ...]  # (step, vehicle)

    def spread(self, step: int) -> float:
        vals = self.values[step, list(self.normal)]
        return float(vals.max() - vals.min())


# slack for the per-step hull check: uniform averaging can round at most a
# couple of ulps past the previous extremes
_HULL_SLACK = 1e-12


def run_wmsr(
    g: Graph,
    x0,
    adversaries,
    f: int,
    T: int = 500,
    tol: float = 1e-9,
) -> ConsensusTrace:
    """Run the trimmed-average iteration for T steps.

    Adversary rows of the trace follow their scripted strategy exactly
    (including step 0, overriding x0 there).  Warns if the adversary set is
    not f-local — the convergence guarantee is only sufficient under
    (2f+1)-robustness plus an f-local adversary set.  Every step is checked
    against the safety hull: each normal value must stay within the previous
    step's normal [min, max] (violations are recorded, and impossible when
    the adversary set is f-local).
    """
    n = g.n
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (n,):
        raise ValueError(f"x0 must have shape ({n},)")
    advs = list(adversaries)
    adv_ids = [a.vehicle for a in advs]
    if len(set(adv_ids)) != len(adv_ids):
        raise ValueError("duplicate adversary vehicles")
    if any(not 0 <= v < n for v in adv_ids):
        raise ValueError("adversary vehicle out of range")
    strategy = {a.vehicle: a.strategy for a in advs}
    normal = tuple(v for v in range(n) if v not in strategy)
    if not normal:
        raise ValueError("at least one normal vehicle is required")
    if not is_f_local(g, adv_ids, f):
        warnings.warn(
            f"adversary set {sorted(adv_ids)} is not {f}-local; "
            "resilient-consensus guarantees do not apply",
            stacklevel=2,
        )

    values = np.zeros((T + 1, n))
    values[0] = x0
    for v, strat in strategy.items():
        values[0, v] = strat.value(0)

    violations: list[tuple[int, int]] = []
    converged_at: int | None = None
    nbr_lists = [neighbors(g, i) for i in range(n)]
    for k in range(T + 1):
        vals = values[k, list(normal)]
        if converged_at is None and float(vals.max() - vals.min()) < tol:
            converged_at = k
        if k == T:
            break
        cur = values[k]
        lo, hi = float(vals.min()), float(vals.max())
        slack = _HULL_SLACK * (1.0 + max(abs(lo), abs(hi)))
        nxt = np.empty(n)
        for v, strat in strategy.items():
            nxt[v] = strat.value(k + 1)
        for i in normal:
            nv = [(j, cur[j]) for j in nbr_lists[i]]
            nxt[i] = wmsr_update(cur[i], nv, f)
            if not (lo - slack <= nxt[i] <= hi + slack):
                violations.append((k + 1, i))
        values[k + 1] = nxt

    return ConsensusTrace(
        values=values,
        normal=normal,
        adversaries=tuple(sorted(adv_ids)),
        f=f,
        tol=tol,
        converged_at=converged_at,
        safety_violations=tuple(violations),
    )
