"""Spin-1/2 operator algebra on the radical-pair tensor-product space.

Everything here works on plain complex ``numpy`` arrays in the z-product
basis.  Slot order is fixed: electron 1, electron 2, nucleus 1, ..., nucleus N,
and slot 0 is the most significant factor of the Kronecker product.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .exceptions import InvalidStateError, ValidationError

HERMITIAN_RTOL = 1e-10
POSITIVITY_FLOOR = -1e-10
TRACE_SLACK = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

_PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)
SINGLET = (np.kron(UP, DOWN) - np.kron(DOWN, UP)) / np.sqrt(2)
TRIPLET_ZERO = (np.kron(UP, DOWN) + np.kron(DOWN, UP)) / np.sqrt(2)


@dataclass(frozen=True)
class Particle:
    kind: str  # "electron" or "nucleus"
    label: str


@dataclass(frozen=True)
class SystemLayout:
    """Ordered roster of spin-1/2 particles: two electrons, then nuclei."""

    particles: tuple[Particle, ...]

    def __post_init__(self):
        kinds = [p.kind for p in self.particles]
        bad = set(kinds) - {"electron", "nucleus"}
        if bad:
            raise ValidationError(f"unknown particle kind(s): {sorted(bad)}")
        if kinds[:2] != ["electron", "electron"] or "electron" in kinds[2:]:
            raise ValidationError(
                "layout must hold exactly two electrons in slots 0 and 1, "
                f"followed by nuclei; got {kinds}"
            )

    @classmethod
    def radical_pair(cls, n_nuclei: int = 1) -> "SystemLayout":
        if n_nuclei < 0:
            raise ValidationError("n_nuclei must be >= 0")
        particles = [Particle("electron", "e1"), Particle("electron", "e2")]
        particles += [Particle("nucleus", f"n{i + 1}") for i in range(n_nuclei)]
        return cls(tuple(particles))

    @property
    def n_particles(self) -> int:
        return len(self.particles)

    @property
    def n_nuclei(self) -> int:
        return self.n_particles - 2

    @property
    def dim(self) -> int:
        return 2**self.n_particles

    @property
    def electron_slots(self) -> tuple[int, int]:
        return (0, 1)

    @property
    def nucleus_slots(self) -> tuple[int, ...]:
        return tuple(range(2, self.n_particles))

    def slot(self, label: str) -> int:
        for i, p in enumerate(self.particles):
            if p.label == label:
                return i
        raise ValidationError(f"no particle labelled {label!r}")


def _n_spins(layout: SystemLayout | int) -> int:
    return layout if isinstance(layout, int) else layout.n_particles


def tensor_product(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of operators (or state vectors) in slot order."""
    if not factors:
        raise ValidationError("tensor_product needs at least one factor")
    return reduce(np.kron, factors)


def embed(op: np.ndarray, slot: int, layout: SystemLayout | int) -> np.ndarray:
    """Place a single-spin operator in ``slot`` with identities elsewhere.

    ``layout`` may be a :class:`SystemLayout` or simply a particle count.
    """
    n = _n_spins(layout)
    if not 0 <= slot < n:
        raise ValidationError(f"slot {slot} out of range for {n} particles")
    return tensor_product(*(op if i == slot else IDENTITY_2 for i in range(n)))


def spin_operator(axis: str, slot: int, layout: SystemLayout | int) -> np.ndarray:
    """Spin-1/2 operator S_axis (eigenvalues +-1/2) acting on ``slot``."""
    try:
        pauli = _PAULI[axis]
    except KeyError:
        raise ValidationError(f"axis must be one of x, y, z; got {axis!r}") from None
    return embed(pauli / 2, slot, layout)


def spin_vector(slot: int, layout: SystemLayout | int) -> tuple[np.ndarray, ...]:
    return tuple(spin_operator(a, slot, layout) for a in "xyz")


def partial_trace(
    rho: np.ndarray, keep: Iterable[int], layout: SystemLayout | int
) -> np.ndarray:
    """Reduced density matrix on the slots in ``keep``.

    Works on a single ``(D, D)`` matrix or a stack ``(..., D, D)``.  The kept
    slots come out in canonical (ascending) order whatever order ``keep``
    lists them in.
    """
    n = _n_spins(layout)
    keep = sorted(set(keep))
    if not keep:
        raise ValidationError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValidationError(f"keep slots {keep} out of range for {n} particles")
    rho = np.asarray(rho)
    batch = rho.shape[:-2]
    if rho.shape[-2:] != (2**n, 2**n):
        raise ValidationError(f"matrix shape {rho.shape[-2:]} does not match {n} spins")

    traced = [i for i in range(n) if i not in keep]
    nb = len(batch)
    t = rho.reshape(batch + (2,) * (2 * n))
    # einsum labels: batch, then row indices, then column indices
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    b = "".join(letters[:nb])
    rows = list(letters[nb : nb + n])
    cols = list(letters[nb + n : nb + 2 * n])
    for i in traced:
        cols[i] = rows[i]
    out = b + "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    reduced = np.einsum(f"{b}{''.join(rows)}{''.join(cols)}->{out}", t)
    d = 2 ** len(keep)
    return reduced.reshape(batch + (d, d))


def singlet_projector(layout: SystemLayout) -> np.ndarray:
    """Q_S = |S><S| on the electrons, identity on every nucleus."""
    s = np.outer(SINGLET, SINGLET.conj())
    return tensor_product(s, np.eye(2**layout.n_nuclei, dtype=complex))




def is_hermitian(m: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    m = np.asarray(m)
    scale = np.max(np.abs(m)) if m.size else 0.0
    if scale == 0.0:
        return True
    return bool(np.max(np.abs(m - m.conj().swapaxes(-1, -2))) <= rtol * scale)


def validate_density_matrix(
    rho: np.ndarray,
    *,
    hermitian_rtol: float = HERMITIAN_RTOL,
    positivity_floor: float = POSITIVITY_FLOOR,
    trace_slack: float = TRACE_SLACK,
) -> np.ndarray:
    """Check Hermiticity, positivity and 0 < tr <= 1 + slack; return ``rho``.

    Raises :class:`InvalidStateError` on the first violated invariant.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
    if not is_hermitian(rho, hermitian_rtol):
        raise InvalidStateError("density matrix is not Hermitian")
    evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if evals.min() < positivity_floor:
        raise InvalidStateError(f"negative eigenvalue {evals.min():.3e}")
    tr = np.trace(rho).real
    if not 0.0 < tr <= 1.0 + trace_slack:
        raise InvalidStateError(f"trace {tr!r} outside (0, 1]")
    return rho


def validate_pure_state(psi: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    psi = np.asarray(psi)
    if psi.ndim != 1:
        raise InvalidStateError("pure state must be a vector")
    if abs(np.linalg.norm(psi) - 1.0) > atol:
        raise InvalidStateError(f"state norm {np.linalg.norm(psi)!r} is not 1")
    return psi


def projector(psi: Sequence[complex]) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())
