"""Radical-pair Hamiltonian and density-matrix propagation.

Units: time in ns, field in mT, couplings and rates in rad/ns, hbar = 1.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .exceptions import NumericalError, ValidationError
from .spin_core import (
    SystemLayout,
    is_hermitian,
    singlet_projector,
    spin_operator,
    spin_vector,
)

GAMMA_E = 0.176  # rad ns^-1 mT^-1
STEP_FACTOR = 0.01
RATE_STEP_FACTOR = 0.1
MAX_SUBSTEPS = 50_000_000


def mhz_to_angular(freq_mhz: float) -> float:
    """Linear frequency in MHz -> angular frequency in rad/ns."""
    return 2 * math.pi * freq_mhz * 1e-3


@dataclass(frozen=True)
class HyperfineCoupling:
    electron: int
    nucleus: int
    A: float  # rad/ns


@dataclass(frozen=True)
class RadicalPairModel:
    layout: SystemLayout
    B: float = 0.0
    hyperfine: tuple[HyperfineCoupling, ...] = ()
    k_S: float = 0.0
    k_T: float = 0.0
    gamma: float = GAMMA_E

    def __post_init__(self):
        object.__setattr__(self, "hyperfine", tuple(self.hyperfine))
        if not self.gamma > 0:
            raise ValidationError(f"gamma must be > 0, got {self.gamma}")
        if self.B < 0:
            raise ValidationError(f"B must be >= 0, got {self.B}")
        if self.k_S < 0 or self.k_T < 0:
            raise ValidationError("recombination rates must be >= 0")
        for c in self.hyperfine:
            if c.electron not in self.layout.electron_slots:
                raise ValidationError(f"slot {c.electron} is not an electron")
            if c.nucleus not in self.layout.nucleus_slots:
                raise ValidationError(f"slot {c.nucleus} is not a nucleus")
        nuclei = [c.nucleus for c in self.hyperfine]
        if len(set(nuclei)) != len(nuclei):
            raise ValidationError("each nucleus couples to exactly one electron")

    def with_field(self, B: float) -> "RadicalPairModel":
        return replace(self, B=B)

    @property
    def has_recombination(self) -> bool:
        return self.k_S > 0 or self.k_T > 0

    @property
    def reaction_time(self) -> float:
        """T_r: 1/k_S when k_T = 0, 1/k when k_S = k_T = k."""
        if self.k_T == 0 and self.k_S > 0:
            return 1 / self.k_S
        if self.k_S == self.k_T and self.k_S > 0:
            return 1 / self.k_S
        raise ValidationError(
            f"reaction time undefined for k_S={self.k_S}, k_T={self.k_T}"
        )


def one_nucleus_model(
    A_mhz: float = 20.0, B: float = 0.0, k_S: float = 0.0, k_T: float = 0.0,
    gamma: float = GAMMA_E,
) -> RadicalPairModel:
    """Two electrons and one spin-1/2 nucleus hyperfine-coupled to electron 1."""
    layout = SystemLayout.radical_pair(1)
    return RadicalPairModel(
        layout=layout,
        B=B,
        hyperfine=(HyperfineCoupling(0, 2, mhz_to_angular(A_mhz)),),
        k_S=k_S,
        k_T=k_T,
        gamma=gamma,
    )


def build_hamiltonian(model: RadicalPairModel) -> np.ndarray:
    """Electron Zeeman (field along z) plus isotropic hyperfine terms."""
    lay = model.layout
    H = model.gamma * model.B * (spin_operator("z", 0, lay) + spin_operator("z", 1, lay))
    for c in model.hyperfine:
        S = spin_vector(c.electron, lay)
        I = spin_vector(c.nucleus, lay)
        H = H + c.A * sum(s @ i for s, i in zip(S, I))
    return H


def initial_radical_pair_state(layout: SystemLayout) -> np.ndarray:
    """Electron singlet with the nuclei maximally mixed."""
    dn = 2**layout.n_nuclei
    return singlet_projector(layout) / dn


def _check_grid(times: Sequence[float]) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValidationError("time grid must be a nonempty 1-D sequence")
    if t[0] != 0.0:
        raise ValidationError("time grid must start at 0")
    if np.any(np.diff(t) <= 0):
        raise ValidationError("time grid must be strictly increasing")
    return t


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_times, D, D)

    def traces(self) -> np.ndarray:
        return np.trace(self.states, axis1=1, axis2=2).real

    def expectation(self, op: np.ndarray) -> np.ndarray:
        return np.einsum("ij,tji->t", op, self.states).real


class UnitaryPropagator:
    """Exact rho(t) = exp(-iHt) rho0 exp(iHt) via the eigenbasis of H."""

    def __init__(self, H: np.ndarray, rho0: np.ndarray):
        if not is_hermitian(H, 1e-12):
            raise ValidationError("Hamiltonian is not Hermitian")
        self.H = H
        self.rho0 = np.asarray(rho0, dtype=complex)
        self.energies, self.basis = np.linalg.eigh((H + H.conj().T) / 2)
        self._rho0_eig = self.basis.conj().T @ self.rho0 @ self.basis

    def states(self, times) -> np.ndarray:
        t = np.atleast_1d(np.asarray(times, dtype=float))
        phase = np.exp(-1j * np.outer(t, self.energies))
        r = phase[:, :, None] * self._rho0_eig[None] * phase.conj()[:, None, :]
        return self.basis @ r @ self.basis.conj().T

    def state(self, t: float) -> np.ndarray:
        return self.states([t])[0]


@dataclass(frozen=True)
class HaberkornReaction:
    """Spin-selective recombination: -(k_S/2){Q_S, rho} - (k_T/2){Q_T, rho}."""

    Q_S: np.ndarray
    k_S: float
    k_T: float

    @property
    def rate_operator(self) -> np.ndarray:
        Q_T = np.eye(self.Q_S.shape[0]) - self.Q_S
        return (self.k_S * self.Q_S + self.k_T * Q_T) / 2

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        K = self.rate_operator
        return -(K @ rho + rho @ K)

    @property
    def max_rate(self) -> float:
        return max(self.k_S, self.k_T)


ReactionModel = Callable[[np.ndarray], np.ndarray]


def haberkorn_reaction(model: RadicalPairModel) -> HaberkornReaction:
    return HaberkornReaction(singlet_projector(model.layout), model.k_S, model.k_T)


def rk4_step_bound(
    H: np.ndarray, max_rate: float, grid_spacing: float = math.inf,
    step_factor: float = STEP_FACTOR,
) -> float:
    """Largest RK4 step allowed for a generator with this H and decay rate."""
    hnorm = np.linalg.norm(H, 2)
    bounds = [grid_spacing]
    if hnorm > 0:
        bounds.append(step_factor / hnorm)
    if max_rate > 0:
        bounds.append(RATE_STEP_FACTOR / max_rate)
    h = min(bounds)
    if not math.isfinite(h):
        # H = 0 and no decay: one step per interval is exact
        h = math.inf
    return h


class RK4Propagator:
    """Fixed-step classical RK4 for d(rho)/dt = -i[H, rho] + reaction(rho).

    States are cached at every requested time; a new request integrates
    forward from the latest cached time that does not exceed it, using
    ``ceil(dt / h_max)`` equal sub-steps so the target is hit exactly.
    """

    def __init__(
        self,
        H: np.ndarray,
        rho0: np.ndarray,
        reaction: ReactionModel | None = None,
        *,
        h_max: float | None = None,
        step_factor: float = STEP_FACTOR,
    ):
        self.H = np.asarray(H, dtype=complex)
        self.reaction = reaction
        max_rate = getattr(reaction, "max_rate", 0.0) if reaction is not None else 0.0
        self.h_max = h_max if h_max is not None else rk4_step_bound(
            self.H, max_rate, step_factor=step_factor
        )
        if isinstance(reaction, HaberkornReaction):
            # -i[H, rho] - {K, rho} == -(M rho + (M rho)^dagger), M = iH + K
            M = 1j * self.H + reaction.rate_operator
            self._rhs = lambda rho: _haberkorn_rhs(M, rho)
        else:
            self._rhs = self._general_rhs
        self._times = [0.0]
        self._states = [np.asarray(rho0, dtype=complex)]

    def _general_rhs(self, rho):
        out = -1j * (self.H @ rho - rho @ self.H)
        if self.reaction is not None:
            out = out + self.reaction(rho)
        return out

    def _advance(self, rho: np.ndarray, dt: float) -> np.ndarray:
        n = 1 if not math.isfinite(self.h_max) else math.ceil(dt / self.h_max - 1e-12)
        n = max(n, 1)
        if n > MAX_SUBSTEPS:
            raise NumericalError(f"{n} RK4 sub-steps needed for an interval of {dt} ns")
        h = dt / n
        f = self._rhs
        for _ in range(n):
            k1 = f(rho)
            k2 = f(rho + (h / 2) * k1)
            k3 = f(rho + (h / 2) * k2)
            k4 = f(rho + h * k3)
            rho = rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        return rho

    def state(self, t: float) -> np.ndarray:
        t = float(t)
        if t < 0:
            raise ValidationError("time must be >= 0")
        i = bisect.bisect_right(self._times, t) - 1
        t0, rho0 = self._times[i], self._states[i]
        if t0 == t:
            return rho0
        rho = self._advance(rho0, t - t0)
        if not np.all(np.isfinite(rho)):
            raise NumericalError(f"non-finite state at t = {t} ns")
        self._times.insert(i + 1, t)
        self._states.insert(i + 1, rho)
        return rho

    def states(self, times) -> np.ndarray:
        return np.stack([self.state(t) for t in np.atleast_1d(times)])


def _haberkorn_rhs(M: np.ndarray, rho: np.ndarray) -> np.ndarray:
    m = M @ rho
    return -(m + m.conj().T)


def evolve_unitary(H: np.ndarray, rho0: np.ndarray, times) -> Trajectory:
    t = _check_grid(times)
    states = UnitaryPropagator(H, rho0).states(t)
    states[0] = rho0
    return Trajectory(t, states)


def evolve_haberkorn(
    model: RadicalPairModel,
    rho0: np.ndarray,
    times,
    *,
    reaction: ReactionModel | None = None,
    step_factor: float = STEP_FACTOR,
    h_max: float | None = None,
) -> Trajectory:
    """RK4 integration of the master equation with spin-selective recombination.

    ``reaction`` defaults to :func:`haberkorn_reaction` for ``model``; any
    callable ``rho -> d(rho)/dt`` contribution may stand in for it.
    """
    t = _check_grid(times)
    H = build_hamiltonian(model)
    reaction = reaction if reaction is not None else haberkorn_reaction(model)
    if h_max is None:
        spacing = float(np.max(np.diff(t))) if t.size > 1 else math.inf
        h_max = rk4_step_bound(
            H, getattr(reaction, "max_rate", 0.0), spacing, step_factor=step_factor
        )
    prop = RK4Propagator(H, rho0, reaction, h_max=h_max)
    return Trajectory(t, prop.states(t))


def model_propagator(model: RadicalPairModel, rho0: np.ndarray | None = None, **kw):
    """Exact spectral propagator when there is no recombination, RK4 otherwise."""
    if rho0 is None:
        rho0 = initial_radical_pair_state(model.layout)
    H = build_hamiltonian(model)
    if not model.has_recombination:
        return UnitaryPropagator(H, rho0)
    return RK4Propagator(H, rho0, haberkorn_reaction(model), **kw)
