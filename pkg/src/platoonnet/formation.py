"""Distributed formation keeping and its disturbance amplification.

Double-integrator vehicles i = 0..n-1 with state (p_i, u_i), u = pdot, run
the neighbor feedback

    udot_i = sum_{j in N(i)} [ kp (p_j - p_i + Delta_ij) + ku (u_j - u_i) ] + w_i

with Delta_ij = d0 (j - i) encoding the desired spacing.  Stacked:

    xdot = A x + b + F w,   y = C x,
    A = [[0, I], [-kp L, -ku L]],  F = [[0], [I]],  C = [B^T, 0],

where L is the graph Laplacian and B the oriented incidence matrix, so y
collects the per-edge position differences.  The worst-case L2 gain from w
to spacing error has a closed form in lambda2 = lambda_2(L); an independent
frequency sweep of sigma_max(C (jwI - A)^{-1} F) cross-checks it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .graph import Graph, incidence, laplacian

BRANCH_UNDERDAMPED = "underdamped-peak"
BRANCH_STATIC = "static-gain"


@dataclass(frozen=True)
class FormationSystem:
    graph: Graph
    kp: float
    ku: float
    d0: float

    def __post_init__(self):
        if self.kp <= 0 or self.ku <= 0:
            raise ValueError("gains kp and ku must be positive")

    @cached_property
    def lap(self) -> np.ndarray:
        return laplacian(self.graph).astype(np.float64)

    @cached_property
    def lap_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.lap)

    @cached_property
    def delta(self) -> np.ndarray:
        """Per-vehicle spacing offset: Delta_i = d0 * sum_{j in N(i)} (j - i)."""
        n = self.graph.n
        d = np.zeros(n)
        for i, j in self.graph.edges:
            d[i] += self.d0 * (j - i)
            d[j] += self.d0 * (i - j)
        return d

    @cached_property
    def a_mat(self) -> np.ndarray:
        n = self.graph.n
        a = np.zeros((2 * n, 2 * n))
        a[:n, n:] = np.eye(n)
        a[n:, :n] = -self.kp * self.lap
        a[n:, n:] = -self.ku * self.lap
        return a

    @cached_property
    def b_affine(self) -> np.ndarray:
        n = self.graph.n
        b = np.zeros(2 * n)
        b[n:] = self.kp * self.delta
        return b

    @cached_property
    def f_mat(self) -> np.ndarray:
        n = self.graph.n
        f = np.zeros((2 * n, n))
        f[n:, :] = np.eye(n)
        return f

    @cached_property
    def c_mat(self) -> np.ndarray:
        n, m = self.graph.n, self.graph.m
        c = np.zeros((m, 2 * n))
        c[:, :n] = incidence(self.graph).T
        return c

    @cached_property
    def desired_spans(self) -> np.ndarray:
        """Desired (p_i - p_j) per canonical edge (i, j): d0 * (j - i)."""
        return np.array([self.d0 * (j - i) for i, j in self.graph.edges])

    @cached_property
    def equilibrium_state(self) -> np.ndarray:
        n = self.graph.n
        x = np.zeros(2 * n)
        x[:n] = -self.d0 * np.arange(n)
        return x

    @property
    def lambda2(self) -> float:
        return float(self.lap_eigenvalues[1])


def build_formation(g: Graph, kp: float, ku: float, d0: float = 10.0) -> FormationSystem:
    return FormationSystem(graph=g, kp=float(kp), ku=float(ku), d0=float(d0))


def hinf_closed_form(lambda2: float, kp: float, ku: float) -> tuple[float, str]:
    """Closed-form worst-case gain for one connected formation.

    Two branches, continuous at lambda2 = 2 kp / ku^2:
      * lambda2 ku^2 / (2 kp) <= 1 (resonant peak at a positive frequency):
            2 / (ku lambda2 sqrt(4 kp - ku^2 lambda2))
      * otherwise (gain peaks at zero frequency):
            1 / (kp sqrt(lambda2))
    """
    if lambda2 <= 0:
        raise ValueError("lambda2 must be positive (connected graph)")
    if kp <= 0 or ku <= 0:
        raise ValueError("gains kp and ku must be positive")
    if lambda2 * ku * ku / (2.0 * kp) <= 1.0:
        return 2.0 / (ku * lambda2 * math.sqrt(4.0 * kp - ku * ku * lambda2)), BRANCH_UNDERDAMPED
    return 1.0 / (kp * math.sqrt(lambda2)), BRANCH_STATIC


_ZERO_MODE_TOL = 1e-9


def modal_hinf(lam: float, kp: float, ku: float) -> float:
    """Worst-case gain of the single-mode transfer
    sqrt(lam) / (s^2 + ku lam s + kp lam); zero for the lam = 0 mode."""
    if lam < -_ZERO_MODE_TOL:
        raise ValueError("Laplacian eigenvalues cannot be negative")
    if lam <= _ZERO_MODE_TOL:
        return 0.0
    return hinf_closed_form(lam, kp, ku)[0]


def modal_peak_frequency(lam: float, kp: float, ku: float) -> float:
    """Frequency of the single-mode gain peak: sqrt(kp lam - ku^2 lam^2 / 2)
    when positive (underdamped branch), else 0 (peak at DC)."""
    if lam <= _ZERO_MODE_TOL:
        return 0.0
    arg = kp * lam - 0.5 * ku * ku * lam * lam
    return math.sqrt(arg) if arg > 0 else 0.0


def modal_gain(lam: float, kp: float, ku: float, omega: float) -> float:
    """|sqrt(lam) / ((jw)^2 + ku lam jw + kp lam)| at w = omega."""
    if lam <= _ZERO_MODE_TOL:
        return 0.0
    den = complex(kp * lam - omega * omega, ku * lam * omega)
    return math.sqrt(lam) / abs(den)


def _sigma_max(system: FormationSystem, omega: float, output: np.ndarray) -> float:
    n2 = system.a_mat.shape[0]
    m = (1j * omega) * np.eye(n2) - system.a_mat
    x = np.linalg.solve(m, system.f_mat)
    return float(np.linalg.svd(output @ x, compute_uv=False)[0])


def default_sweep_grid(system: FormationSystem, n_log: int = 2000, n_window: int = 50) -> np.ndarray:
    """Log-spaced grid over [1e-3, 1e3] rad/s plus a linear window of
    n_window points within +-20% of each mode's analytic peak frequency."""
    parts = [np.geomspace(1e-3, 1e3, n_log)]
    for lam in system.lap_eigenvalues:
        wbar = modal_peak_frequency(float(lam), system.kp, system.ku)
        if wbar > 0:
            parts.append(np.linspace(0.8 * wbar, 1.2 * wbar, n_window))
    grid = np.unique(np.concatenate(parts))
    return grid[grid > 0]


@dataclass(frozen=True)
class SweepResult:
    value: float
    frequency: float
    grid_points: int


def hinf_sweep(
    system: FormationSystem,
    grid: np.ndarray | None = None,
    output: np.ndarray | None = None,
    refine: bool = True,
) -> SweepResult:
    """Numerical worst-case gain: max over the grid of
    sigma_max(C (jwI - A)^{-1} F), plus a golden-section polish around the
    grid argmax.  Works directly on the state-space matrices, independently
    of the modal closed form.  The w -> 0 end is covered by the 1e-3 rad/s
    grid floor (A is singular at exactly w = 0)."""
    if grid is None:
        grid = default_sweep_grid(system)
    out = system.c_mat if output is None else output
    vals = np.array([_sigma_max(system, w, out) for w in grid])
    best = int(np.argmax(vals))
    value, freq = float(vals[best]), float(grid[best])
    if refine and len(grid) >= 2:
        lo = grid[best - 1] if best > 0 else grid[0]
        hi = grid[best + 1] if best + 1 < len(grid) else grid[-1]
        inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = float(lo), float(hi)
        c = b - inv_phi * (b - a)
        d = a + inv_phi * (b - a)
        fc = _sigma_max(system, c, out)
        fd = _sigma_max(system, d, out)
        for _ in range(80):
            if b - a <= 1e-13 * max(1.0, b):
                break
            if fc > fd:
                b, d, fd = d, c, fc
                c = b - inv_phi * (b - a)
                fc = _sigma_max(system, c, out)
            else:
                a, c, fc = c, d, fd
                d = a + inv_phi * (b - a)
                fd = _sigma_max(system, d, out)
        w_star = c if fc > fd else d
        v_star = max(fc, fd)
        if v_star > value:
            value, freq = float(v_star), float(w_star)
    return SweepResult(value=value, frequency=freq, grid_points=len(grid))


def sqrt_laplacian_output(system: FormationSystem) -> np.ndarray:
    """Alternative output matrix [L^{1/2}, 0]: same gain at every frequency
    as the incidence-transpose output (L^{1/2} = V diag(sqrt(lambda)) V^T,
    with the zero eigenvalue clamped)."""
    n = system.graph.n
    w, v = np.linalg.eigh(system.lap)
    w = np.clip(w, 0.0, None)
    half = (v * np.sqrt(w)) @ v.T
    c = np.zeros((n, 2 * n))
    c[:, :n] = half
    return c


@dataclass(frozen=True)
class HinfReport:
    lambda2: float
    closed_form: float
    branch: str
    analytic_peak_frequency: float
    sweep_value: float
    sweep_frequency: float
    per_mode: tuple[tuple[float, float], ...]  # (eigenvalue, modal gain)


def hinf_report(system: FormationSystem, grid: np.ndarray | None = None) -> HinfReport:
    lam2 = system.lambda2
    value, branch = hinf_closed_form(lam2, system.kp, system.ku)
    sweep = hinf_sweep(system, grid=grid)
    per_mode = tuple(
        (float(lam), modal_hinf(float(lam), system.kp, system.ku))
        for lam in system.lap_eigenvalues
    )
    return HinfReport(
        lambda2=lam2,
        closed_form=value,
        branch=branch,
        analytic_peak_frequency=modal_peak_frequency(lam2, system.kp, system.ku),
        sweep_value=sweep.value,
        sweep_frequency=sweep.frequency,
        per_mode=per_mode,
    )


@dataclass(frozen=True)
class FormationTrace:
    t: np.ndarray
    positions: np.ndarray  # (steps, n)
    velocities: np.ndarray  # (steps, n)
    span_errors: np.ndarray  # (steps, m): (p_i - p_j) - d0 (j - i) per edge


RK4_STABILITY_MARGIN = 2.5


def simulate_formation(
    system: FormationSystem,
    disturbance=None,
    T: float = 10.0,
    h: float = 1e-3,
    x0: np.ndarray | None = None,
    record_every: int = 1,
) -> FormationTrace:
    """Fixed-step RK4 integration of xdot = A x + b + F w(t).

    disturbance is a callable t -> R^n (or None for no disturbance).  The
    step size is checked against the system poles before running
    (h * max|pole| must stay inside the RK4 stability region).
    """
    n = system.graph.n
    if h <= 0 or T <= 0:
        raise ValueError("T and h must be positive")
    poles = np.linalg.eigvals(system.a_mat)
    scale = h * float(np.max(np.abs(poles)))
    if scale > RK4_STABILITY_MARGIN:
        raise ValueError(
            f"step h={h} is unstable for this system (h*max|pole| = {scale:.3f} > "
            f"{RK4_STABILITY_MARGIN}); reduce h"
        )
    if x0 is None:
        x = system.equilibrium_state.copy()
    else:
        x = np.asarray(x0, dtype=np.float64).copy()
        if x.shape != (2 * n,):
            raise ValueError(f"x0 must have shape ({2 * n},)")
    if disturbance is None:
        disturbance = lambda t: None  # noqa: E731 - trivial zero signal

    a_mat, b_aff, f_mat = system.a_mat, system.b_affine, system.f_mat
    bt = system.c_mat[:, :n]

    def deriv(t: float, state: np.ndarray) -> np.ndarray:
        dx = a_mat @ state + b_aff
        w = disturbance(t)
        if w is not None:
            dx = dx + f_mat @ np.asarray(w, dtype=np.float64)
        return dx

    steps = int(round(T / h))
    times = [0.0]
    states = [x.copy()]
    t = 0.0
    for s in range(1, steps + 1):
        k1 = deriv(t, x)
        k2 = deriv(t + h / 2, x + (h / 2) * k1)
        k3 = deriv(t + h / 2, x + (h / 2) * k2)
        k4 = deriv(t + h, x + h * k3)
        x = x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = s * h
        if s % record_every == 0 or s == steps:
            times.append(t)
            states.append(x.copy())
    arr = np.array(states)
    pos, vel = arr[:, :n], arr[:, n:]
    span_err = pos @ bt.T - system.desired_spans
    return FormationTrace(
        t=np.array(times), positions=pos, velocities=vel, span_errors=span_err
    )


@dataclass(frozen=True)
class HinfGridRow:
    n: int
    k: int
    kp: float
    ku: float
    lambda2: float
    lower: float
    upper: float
    hinf: float
    branch: str
    sweep_value: float | None = None


def hinf_grid(n_values, k_values, kp: float, ku: float, spot_check=()) -> list[HinfGridRow]:
    """Closed-form gain surface over platoon sizes and neighbor ranges,
    with numerical sweep spot-checks on the requested (n, k) subset."""
    from .connectivity import lambda2_bounds
    from .graph import PlatoonSpec, build_knn_platoon

    spots = {(int(a), int(b)) for a, b in spot_check}
    rows = []
    for n in n_values:
        for k in k_values:
            if not 1 <= k <= n - 1:
                continue
            spec = PlatoonSpec(n, k)
            system = build_formation(build_knn_platoon(spec), kp, ku)
            lam2 = system.lambda2
            value, branch = hinf_closed_form(lam2, kp, ku)
            lower, upper = lambda2_bounds(spec)
            sweep_val = None
            if (n, k) in spots:
                sweep_val = hinf_sweep(system).value
            rows.append(
                HinfGridRow(
                    n=int(n), k=int(k), kp=float(kp), ku=float(ku),
                    lambda2=lam2, lower=lower, upper=upper,
                    hinf=value, branch=branch, sweep_value=sweep_val,
                )
            )
    return rows
