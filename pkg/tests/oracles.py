"""Independent reference computations for the test-suite.

Nothing here imports the package: Hamiltonians are assembled from explicit
Kronecker products, propagation uses ``scipy.linalg.expm`` of the
(non-Hermitian, recombination-damped) effective Hamiltonian, concurrence is
computed literally from the eigenvalues of rho (Y x Y) rho* (Y x Y), and
death times come from dense time grids refined with ``brentq``.
"""
import math

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

GAMMA = 0.176
A_20MHZ = 2 * math.pi * 0.020

_sx = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_sy = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
_sz = np.array([[1, 0], [0, -1]], dtype=complex) / 2
_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))
_SINGLET = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)


def _kron3(a, b, c):
    return np.kron(np.kron(a, b), c)


def one_nucleus_hamiltonian(B, A=A_20MHZ, gamma=GAMMA):
    I = np.eye(2)
    zee = gamma * B * (_kron3(_sz, I, I) + _kron3(I, _sz, I))
    hf = A * sum(_kron3(s, I, s) for s in (_sx, _sy, _sz))
    return zee + hf


def singlet_start():
    return np.kron(np.outer(_SINGLET, _SINGLET), np.eye(2) / 2)


def singlet_projector_3():
    return np.kron(np.outer(_SINGLET, _SINGLET), np.eye(2))


def concurrence_by_eigvals(rho4):
    """max(0, l1-l2-l3-l4), l = sqrt(eig(rho Ytilde rho* Ytilde)) decreasing."""
    R = rho4 @ _YY @ rho4.conj() @ _YY
    ev = np.sort(np.abs(np.linalg.eigvals(R).real))[::-1]
    lam = np.sqrt(ev)
    return lam[0] - lam[1] - lam[2] - lam[3]


def werner_concurrence(p):
    return max(0.0, (3 * p - 1) / 2)


def werner_state(p):
    return p * np.outer(_SINGLET, _SINGLET) + (1 - p) * np.eye(4) / 4


def electron_reduce(rho8):
    return rho8.reshape(4, 2, 4, 2).trace(axis1=1, axis2=3)


def zero_field_lifetime(A=A_20MHZ, eps=1e-6):
    """Closed form at B = 0: singlet-born pair, one nucleus, isotropic A.

    The electron pair stays Werner-like with P_S = 5/8 + 3/8 cos(At), so
    C = 2 P_S - 1 = 1/4 + 3/4 cos(At) first reaches eps at
    arccos((4 eps - 1)/3)/A.
    """
    return math.acos((4 * eps - 1) / 3) / A


class ExpmModel:
    """rho(t) = exp(-iKt) rho0 exp(iK^dag t), K = H - (i/2)(k_S Q_S + k_T Q_T)."""

    def __init__(self, B, A=A_20MHZ, k_S=0.0, k_T=0.0, gamma=GAMMA):
        H = one_nucleus_hamiltonian(B, A, gamma)
        QS = singlet_projector_3()
        self.K = H - 0.5j * (k_S * QS + k_T * (np.eye(8) - QS))
        self.rho0 = singlet_start()

    def state(self, t):
        U = expm(-1j * self.K * t)
        return U @ self.rho0 @ U.conj().T

    def states_on_grid(self, dt, start, count, rho_start):
        """States at (start + j)*dt for j < count, stepping from rho_start."""
        U = expm(-1j * self.K * dt)
        out = np.empty((count, 8, 8), dtype=complex)
        r = rho_start
        for j in range(count):
            out[j] = r
            r = U @ r @ U.conj().T
        return out, r

    def conc(self, t):
        r = self.state(t)
        r = r / np.trace(r).real
        return concurrence_by_eigvals(electron_reduce(r))


def _batch_concurrence(states):
    tr = np.trace(states, axis1=1, axis2=2).real
    r = states / tr[:, None, None]
    red = r.reshape(-1, 4, 2, 4, 2).trace(axis1=2, axis2=4)
    R = red @ _YY @ red.conj() @ _YY
    ev = np.sort(np.abs(np.linalg.eigvals(R).real), axis=1)[:, ::-1]
    lam = np.sqrt(ev)
    return lam[:, 0] - lam[:, 1] - lam[:, 2] - lam[:, 3]


def dense_first_death(model, dt, horizon, eps=1e-6, chunk=2000):
    """First grid time with C <= eps, polished by brentq; None if censored."""
    n = int(round(horizon / dt)) + 1
    rho, start = model.rho0, 0
    while start < n:
        count = min(chunk, n - start)
        states, rho = model.states_on_grid(dt, start, count, rho)
        hits = np.flatnonzero(_batch_concurrence(states) <= eps)
        if hits.size:
            k = start + hits[0]
            if k == 0:
                return 0.0
            return brentq(lambda t: model.conc(t) - eps, (k - 1) * dt, k * dt,
                          xtol=1e-9)
        start += count
    return None
