"""Field-sensitivity formulas, T_E(B) sweeps and the bound-violation audit.

All sensitivities are in mT, times in ns and gamma in rad ns^-1 mT^-1.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import GAMMA_E, RadicalPairModel
from .entanglement import (
    FAILED,
    LifetimeResult,
    LifetimeSettings,
    model_lifetime,
)
from .exceptions import RadpairError, ValidationError

DEFAULT_ZOOM_HALFWIDTH = 0.25
DEFAULT_ZOOM_STEP = 0.001


@dataclass(frozen=True)
class MagnetometryParams:
    snr: float
    T_r: float
    gamma: float = GAMMA_E

    def __post_init__(self):
        for name in ("snr", "T_r", "gamma"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValidationError(f"{name} must be finite and > 0, got {v}")


def shot_noise_precision(n: float, T: float) -> float:
    """Energy resolution 1/(T sqrt(n)) of n probes interrogated for time T."""
    if n < 1 or T <= 0:
        raise ValidationError("need n >= 1 and T > 0")
    return 1.0 / (T * math.sqrt(n))


def fundamental_field_limit(params: MagnetometryParams) -> float:
    return (1.0 / params.snr) / (params.gamma * params.T_r)


def observable_field_sensitivity(delta_O: float, slope: float) -> float:
    """delta_O / |dO/dB|; infinite when the observable ignores the field."""
    if delta_O < 0:
        raise ValidationError("observable precision must be >= 0")
    slope = abs(float(slope))
    if slope == 0:
        return math.inf
    return float(delta_O / slope)


def _require_lifetime(T_E) -> float:
    if T_E is None or not (T_E > 0) or not math.isfinite(T_E):
        raise ValidationError(f"need a finite positive lifetime, got {T_E}")
    return float(T_E)


def lifetime_measurement_precision(params: MagnetometryParams, T_E: float) -> float:
    """Timing resolution T_E^2 / ((S/N) T_r), from reading 1/T_E as a frequency."""
    T_E = _require_lifetime(T_E)
    return T_E**2 / (params.snr * params.T_r)


def lifetime_field_sensitivity(
    params: MagnetometryParams, T_E: float, slope: float
) -> float:
    return observable_field_sensitivity(
        lifetime_measurement_precision(params, T_E), slope
    )


def sensitivity_ratio(gamma: float, T_E: float, slope: float) -> float:
    """r = gamma T_E^2 / |dT_E/dB|; a consistent observable has r >= 1."""
    T_E = _require_lifetime(T_E)
    slope = abs(slope)
    if slope == 0:
        return math.inf
    return float(gamma * T_E**2 / slope)


@dataclass
class LifetimeCurve:
    B_grid: np.ndarray
    results: list[LifetimeResult]

    def __post_init__(self):
        self.B_grid = np.asarray(self.B_grid, dtype=float)
        _check_field_grid(self.B_grid)
        if len(self.results) != self.B_grid.size:
            raise ValidationError("one lifetime result per field value required")

    @property
    def T_E(self) -> np.ndarray:
        return np.array([np.nan if r.censored else r.T_E for r in self.results])

    @property
    def censored(self) -> np.ndarray:
        return np.array([r.censored for r in self.results])

    @property
    def failures(self) -> list[tuple[float, str]]:
        return [(float(b), r.note) for b, r in zip(self.B_grid, self.results) if r.failed]

    @property
    def step(self) -> float:
        return float(np.min(np.diff(self.B_grid))) if self.B_grid.size > 1 else math.nan


def _check_field_grid(B: np.ndarray):
    if B.ndim != 1 or B.size == 0:
        raise ValidationError("field grid must be a nonempty 1-D sequence")
    if np.any(B < 0):
        raise ValidationError("field values must be >= 0")
    if np.any(np.diff(B) <= 0):
        raise ValidationError("field grid must be strictly increasing (no duplicates)")


def field_grid(B_min: float, B_max: float, step: float) -> np.ndarray:
    """B_min + k*step for k = 0 .. floor((B_max - B_min)/step)."""
    if step <= 0 or B_max < B_min:
        raise ValidationError("need step > 0 and B_max >= B_min")
    n = int(math.floor((B_max - B_min) / step + 1e-9))
    return B_min + np.arange(n + 1) * step


def _lifetime_at(args) -> LifetimeResult:
    template, B, settings = args
    try:
        return model_lifetime(template.with_field(float(B)), settings)
    except (RadpairError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return LifetimeResult(None, FAILED, settings.horizon, note=str(exc))


def sweep_lifetime_vs_field(
    template: RadicalPairModel,
    B_grid: Sequence[float],
    settings: LifetimeSettings = LifetimeSettings(),
    jobs: int = 1,
) -> LifetimeCurve:
    """T_E at every field in ``B_grid``; ``template.B`` is ignored.

    Points are independent; with ``jobs > 1`` they are farmed out to worker
    processes and reassembled in grid order, so the result does not depend
    on the schedule.
    """
    B = np.asarray(B_grid, dtype=float)
    _check_field_grid(B)
    tasks = [(template, b, settings) for b in B]
    if jobs <= 1 or len(tasks) < 2:
        results = [_lifetime_at(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_lifetime_at, tasks, chunksize=chunk))
    return LifetimeCurve(B, results)


def _valid_runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Half-open index ranges of consecutive True entries."""
    runs, start = [], None
    for i, ok in enumerate(mask):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, mask.size))
    return runs


def finite_difference_slope(curve: LifetimeCurve) -> np.ndarray:
    """dT_E/dB in ns/mT; NaN at censored points and isolated survivors.

    Central (second-order, spacing-aware) differences inside each run of
    uncensored points, one-sided at run ends.
    """
    T = curve.T_E
    B = curve.B_grid
    runs = _valid_runs(~np.isnan(T))
    if not any(b - a >= 3 for a, b in runs):
        raise ValidationError("slope needs at least 3 consecutive uncensored points")
    slope = np.full(T.size, np.nan)
    for a, b in runs:
        if b - a >= 2:
            slope[a:b] = np.gradient(T[a:b], B[a:b])
    return slope


@dataclass(frozen=True)
class SensitivityRecord:
    B: float
    T_E: float  # NaN when censored
    slope: float
    r: float
    dB_fund: float
    dB_TE: float


@dataclass
class SensitivityReport:
    records: list[SensitivityRecord]
    grid_step: float
    min_r: float
    argmin_B: float | None
    violations: list[tuple[float, float]] = field(default_factory=list)

    @property
    def violated(self) -> bool:
        return self.min_r < 1


def bound_violation_scan(
    curve: LifetimeCurve, params: MagnetometryParams
) -> SensitivityReport:
    slope = finite_difference_slope(curve)
    dB_fund = fundamental_field_limit(params)
    records = []
    for b, t, s in zip(curve.B_grid, curve.T_E, slope):
        if np.isnan(t) or np.isnan(s):
            records.append(SensitivityRecord(float(b), float(t), float(s),
                                             math.nan, dB_fund, math.nan))
            continue
        records.append(SensitivityRecord(
            float(b), float(t), float(s),
            sensitivity_ratio(params.gamma, t, s),
            dB_fund,
            lifetime_field_sensitivity(params, t, s),
        ))

    rs = np.array([rec.r for rec in records])
    finite = ~np.isnan(rs)
    if finite.any():
        k = int(np.argmin(np.where(finite, rs, np.inf)))
        min_r, argmin = float(rs[k]), float(curve.B_grid[k])
    else:
        min_r, argmin = math.inf, None
    violations = [
        (float(curve.B_grid[a]), float(curve.B_grid[b - 1]))
        for a, b in _valid_runs(finite & (np.nan_to_num(rs, nan=np.inf) < 1))
    ]
    return SensitivityReport(records, curve.step, min_r, argmin, violations)


@dataclass(frozen=True)
class Jump:
    B_left: float
    B_right: float
    height: float  # T_E(right) - T_E(left); +-inf at a censoring edge


def detect_jumps(curve: LifetimeCurve, min_height: float) -> list[Jump]:
    """Adjacent grid pairs whose lifetimes differ by at least ``min_height``."""
    T = curve.T_E
    B = curve.B_grid
    out = []
    for i in range(T.size - 1):
        a, b = T[i], T[i + 1]
        if np.isnan(a) and np.isnan(b):
            continue
        if np.isnan(a) or np.isnan(b):
            h = math.inf if np.isnan(b) else -math.inf
        else:
            h = b - a
        if abs(h) >= min_height:
            out.append(Jump(float(B[i]), float(B[i + 1]), float(h)))
    return out


def zoom_grid(center: float, halfwidth: float = DEFAULT_ZOOM_HALFWIDTH,
              step: float = DEFAULT_ZOOM_STEP) -> np.ndarray:
    n = int(round(halfwidth / step))
    g = center + np.arange(-n, n + 1) * step
    return g[g >= 0]


def steepest_point(curve: LifetimeCurve) -> float | None:
    """Field of the largest |dT_E/dB|, or None when no slope is defined."""
    try:
        slope = np.abs(finite_difference_slope(curve))
    except ValidationError:
        return None
    if not np.isfinite(slope).any():
        return None
    return float(curve.B_grid[int(np.nanargmax(slope))])


def two_pass_sweep(
    template: RadicalPairModel,
    B_grid: Sequence[float],
    settings: LifetimeSettings = LifetimeSettings(),
    *,
    zoom: bool = True,
    zoom_halfwidth: float = DEFAULT_ZOOM_HALFWIDTH,
    zoom_step: float = DEFAULT_ZOOM_STEP,
    jobs: int = 1,
) -> tuple[LifetimeCurve, LifetimeCurve | None]:
    """Coarse sweep, then a fine re-sweep around the steepest coarse slope.

    The zoom pass is skipped when the coarse curve has failed points or no
    finite slope anywhere.
    """
    coarse = sweep_lifetime_vs_field(template, B_grid, settings, jobs)
    if not zoom or coarse.failures:
        return coarse, None
    center = steepest_point(coarse)
    if center is None:
        return coarse, None
    fine = sweep_lifetime_vs_field(
        template, zoom_grid(center, zoom_halfwidth, zoom_step), settings, jobs
    )
    return coarse, fine
