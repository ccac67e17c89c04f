"""Wootters concurrence and entanglement-lifetime extraction."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .dynamics import RadicalPairModel, Trajectory, model_propagator
from .exceptions import ValidationError
from .spin_core import SIGMA_Y, SystemLayout, partial_trace

SPIN_FLIP = np.kron(SIGMA_Y, SIGMA_Y)
TRACE_TOL = 1e-6
TRACE_FLOOR = 1e-12

FIRST_DEATH = "first-death"
PERMANENT_DEATH = "permanent-death"
CENSORED = "never-died-within-horizon"
DEAD_AT_BIRTH = "dead-at-birth"
FAILED = "failed"


def wootters_lambdas(rho: np.ndarray) -> np.ndarray:
    """Decreasing square roots of the eigenvalues of rho (Y x Y) rho* (Y x Y).

    Computed as the singular values of sqrt(rho) (Y x Y) sqrt(rho)*, which
    shares the spectrum but stays well conditioned near rank deficiency.
    Accepts a single 4x4 matrix or a stack.
    """
    rho = np.asarray(rho, dtype=complex)
    herm = (rho + rho.conj().swapaxes(-1, -2)) / 2
    w, V = np.linalg.eigh(herm)
    w = np.sqrt(np.clip(w, 0.0, None))
    root = (V * w[..., None, :]) @ V.conj().swapaxes(-1, -2)
    M = root @ SPIN_FLIP @ root.conj()
    return np.linalg.svd(M, compute_uv=False)


def concurrence_raw(rho: np.ndarray) -> np.ndarray:
    """lambda_1 - lambda_2 - lambda_3 - lambda_4 before clamping at zero."""
    lam = wootters_lambdas(rho)
    return lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3]


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence of a normalized two-qubit density matrix."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValidationError(f"concurrence needs a 4x4 matrix, got {rho.shape}")
    tr = np.trace(rho).real
    if abs(tr - 1) > TRACE_TOL:
        raise ValidationError(f"trace {tr!r} is not 1; renormalize first")
    return float(min(1.0, max(0.0, concurrence_raw(rho))))


def electron_concurrence_raw(
    states: np.ndarray, layout: SystemLayout, normalize: bool
) -> np.ndarray:
    """Unclamped electron-electron concurrence for a stack of states.

    Points whose trace is below ``TRACE_FLOOR`` (every pair has reacted)
    come back as NaN.
    """
    states = np.asarray(states)
    traces = np.trace(states, axis1=-2, axis2=-1).real
    dead = traces < TRACE_FLOOR
    if normalize:
        safe = np.where(dead, 1.0, traces)
        states = states / safe[..., None, None]
    reduced = partial_trace(states, layout.electron_slots, layout)
    out = concurrence_raw(reduced)
    out[dead] = np.nan
    return out


@dataclass
class ConcurrenceSeries:
    times: np.ndarray
    values: np.ndarray
    normalized: bool
    truncated: bool = False


def electron_concurrence_trajectory(
    traj: Trajectory, layout: SystemLayout, normalize: bool
) -> ConcurrenceSeries:
    raw = electron_concurrence_raw(traj.states, layout, normalize)
    bad = np.flatnonzero(np.isnan(raw))
    n = bad[0] if bad.size else raw.size
    values = np.clip(raw[:n], 0.0, 1.0)
    return ConcurrenceSeries(traj.times[:n].copy(), values, normalize, bool(bad.size))


@dataclass(frozen=True)
class LifetimeSettings:
    threshold: float = 1e-6
    horizon: float = 2000.0
    scan_dt: float = 0.25
    refinement: float = 1e-3
    mode: str = "first"  # or "permanent"
    # probe grid local minima below dip_tol for deaths narrower than scan_dt
    narrow_dip_guard: bool = True
    dip_tol: float = 0.05
    chunk: int = 256

    def __post_init__(self):
        if self.threshold < 0:
            raise ValidationError("threshold must be >= 0")
        if not (self.horizon > 0 and self.scan_dt > 0 and self.refinement > 0):
            raise ValidationError("horizon, scan_dt and refinement must be > 0")
        if self.scan_dt > self.horizon:
            raise ValidationError("scan_dt exceeds the horizon")
        if self.mode not in ("first", "permanent"):
            raise ValidationError(f"unknown lifetime mode {self.mode!r}")

    def grid(self) -> np.ndarray:
        n = int(math.floor(self.horizon / self.scan_dt + 1e-9))
        g = np.arange(n + 1) * self.scan_dt
        if g[-1] < self.horizon:
            g = np.append(g, self.horizon)
        return g


@dataclass(frozen=True)
class LifetimeResult:
    T_E: float | None  # None when censored
    death_kind: str
    horizon: float
    refinement_width: float = 0.0
    note: str = ""

    def __post_init__(self):
        if self.T_E is not None:
            object.__setattr__(self, "T_E", float(self.T_E))
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "refinement_width", float(self.refinement_width))

    @property
    def censored(self) -> bool:
        return self.T_E is None

    @property
    def failed(self) -> bool:
        return self.death_kind == FAILED


ConcurrenceSource = Callable[[np.ndarray], np.ndarray]


def _bisect(source, lo: float, hi: float, eps: float, width: float):
    """Shrink [lo, hi] with C(lo) > eps >= C(hi) to at most ``width``."""
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if source(np.array([mid]))[0] <= eps:
            hi = mid
        else:
            lo = mid
    return lo, hi


def _probe_dip(source, a: float, b: float, eps: float):
    """Minimize C on [a, b]; return the time of a value <= eps or None."""
    f = lambda t: float(source(np.array([t]))[0])
    res = minimize_scalar(f, bounds=(a, b), method="bounded",
                          options={"xatol": 1e-7})
    if res.fun <= eps:
        return float(res.x)
    return None


def entanglement_lifetime(
    source: ConcurrenceSource, settings: LifetimeSettings = LifetimeSettings()
) -> LifetimeResult:
    """First (or permanent) time the concurrence falls to ``threshold``.

    ``source`` maps an array of times to concurrence values (clamped or not;
    NaN marks the end of usable data).  The scan grid is walked in chunks so
    that first-death searches stop early.
    """
    eps = settings.threshold
    grid = settings.grid()
    first = source(grid[:1])[0]
    if np.isnan(first):
        raise ValidationError("concurrence undefined at t = 0")
    if first <= eps:
        return LifetimeResult(0.0, DEAD_AT_BIRTH, settings.horizon, 0.0)
    if settings.mode == "permanent":
        return _permanent_death(source, grid, settings)

    values = np.empty(grid.size)
    values[0] = first
    filled, checked = 1, 1
    while filled < grid.size:
        stop = min(filled + settings.chunk, grid.size)
        values[filled:stop] = source(grid[filled:stop])
        filled = stop
        seg = values[checked:filled]
        nan = np.flatnonzero(np.isnan(seg))
        limit = checked + (nan[0] if nan.size else seg.size)
        hits = np.flatnonzero(values[checked:limit] <= eps)
        cross = checked + hits[0] if hits.size else None

        # local minima in [checked, last index with a right neighbour)
        if settings.narrow_dip_guard:
            top = cross if cross is not None else limit - 1
            for i in range(max(checked, 1), top):
                v = values[i]
                if v < settings.dip_tol and v <= values[i - 1] and v <= values[i + 1]:
                    t_low = _probe_dip(source, grid[i - 1], grid[i + 1], eps)
                    if t_low is not None:
                        lo, hi = _bisect(source, grid[i - 1], t_low, eps,
                                         settings.refinement)
                        return LifetimeResult(0.5 * (lo + hi), FIRST_DEATH,
                                              settings.horizon, hi - lo)
        if cross is not None:
            lo, hi = _bisect(source, grid[cross - 1], grid[cross], eps,
                             settings.refinement)
            return LifetimeResult(0.5 * (lo + hi), FIRST_DEATH,
                                  settings.horizon, hi - lo)
        if nan.size:
            return LifetimeResult(None, CENSORED, float(grid[limit - 1]))
        checked = max(limit - 1, 1)
    return LifetimeResult(None, CENSORED, settings.horizon)


def _permanent_death(source, grid, settings) -> LifetimeResult:
    eps = settings.threshold
    values = source(grid)
    nan = np.flatnonzero(np.isnan(values))
    end = nan[0] if nan.size else values.size
    alive = np.flatnonzero(values[:end] > eps)
    last = alive[-1]
    if last == end - 1:
        return LifetimeResult(None, CENSORED, float(grid[end - 1]))
    lo, hi = _bisect(source, grid[last], grid[last + 1], eps, settings.refinement)
    return LifetimeResult(0.5 * (lo + hi), PERMANENT_DEATH, settings.horizon, hi - lo)


def model_concurrence_source(
    model: RadicalPairModel, normalize: bool | None = None, rho0=None
) -> ConcurrenceSource:
    """Electron concurrence of ``model`` as a function of time."""
    if normalize is None:
        normalize = model.has_recombination
    if model.has_recombination and not normalize:
        raise ValidationError("concurrence under recombination needs normalize=True")
    prop = model_propagator(model, rho0)
    layout = model.layout

    def source(times):
        return electron_concurrence_raw(prop.states(times), layout, normalize)

    return source


def model_lifetime(
    model: RadicalPairModel, settings: LifetimeSettings = LifetimeSettings()
) -> LifetimeResult:
    return entanglement_lifetime(model_concurrence_source(model), settings)
