"""Single-excitation scattering on a one-dimensional wire.

Two pieces live here: exact-shift propagation of one quantum moving left
at unit speed across a delta kick at the origin, and steady-state
frequency responses of passive linear components.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DimensionError, DomainExitError, PoleError, StructureError
from .ops import max_abs
from .slh import SLHTriple
from . import network

POLE_COND_LIMIT = 1e12


def delta_phase(epsilon):
    """Jump multiplier ``s = (1 - i eps/2) / (1 + i eps/2)`` with ``psi(0-) = s psi(0+)``."""
    z = 0.5j * epsilon
    return (1 - z) / (1 + z)


@dataclass(frozen=True, eq=False)
class WireState:
    """Amplitudes on the nodes ``x_k = -X + (k + 1/2) h``, ``k = 0 .. 2X/h - 1``.

    The origin sits midway between nodes ``M/2 - 1`` and ``M/2``.
    """

    psi: np.ndarray
    h: float
    epsilon: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        psi = np.array(self.psi, dtype=complex)
        if psi.ndim != 1 or psi.size % 2:
            raise DimensionError("psi must be a 1-d array with an even number of nodes")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    @classmethod
    def from_function(cls, f, x_max, h, epsilon=0.0):
        m = int(round(2 * x_max / h))
        if m % 2:
            m += 1
        x = -x_max + (np.arange(m) + 0.5) * h
        return cls(f(x), h, epsilon)

    @property
    def x(self):
        m = self.psi.size
        return (np.arange(m) - m / 2 + 0.5) * self.h

    def norm(self):
        return math.sqrt(self.h * float(np.sum(np.abs(self.psi) ** 2)))


def gaussian_packet(x, center, width=1.0, k0=0.0):
    return np.exp(-((x - center) ** 2) / (2 * width ** 2) + 1j * k0 * x)


def propagate_wavepacket(state, T, boundary_tol=1e-12):
    """Translate left by ``T`` (a whole number of nodes), applying the kick at the origin."""
    steps = T / state.h
    nsteps = int(round(steps))
    if nsteps < 0 or abs(steps - nsteps) > 1e-9 * max(1.0, abs(steps)):
        raise ValueError(f"T={T} is not a nonnegative multiple of h={state.h}")
    psi = state.psi
    m = psi.size
    if nsteps >= m:
        lost = psi
    else:
        lost = psi[:nsteps]
    if lost.size and np.max(np.abs(lost)) > boundary_tol:
        raise DomainExitError(
            f"packet reaches the left grid boundary within T={T}")
    out = np.zeros(m, dtype=complex)
    if nsteps < m:
        out[:m - nsteps] = psi[nsteps:]
    # Target nodes k received amplitude from node k + nsteps; it crossed the
    # origin if k < m/2 <= k + nsteps.
    half = m // 2
    crossed = slice(max(0, half - nsteps), half)
    out[crossed] *= delta_phase(state.epsilon)
    return WireState(out, state.h, state.epsilon, state.t + T)


@dataclass(frozen=True, eq=False)
class LinearPassive:
    """Declared structure ``L = C a``, ``H = a^dag Omega a`` with scalar scattering ``S``.

    ``S`` is ``n x n``, ``C`` is ``n x m`` and ``Omega`` is ``m x m`` Hermitian
    for ``m`` internal modes (``m = 0`` allowed).
    """

    S: np.ndarray
    C: np.ndarray
    Omega: np.ndarray

    def __post_init__(self):
        S = np.atleast_2d(np.asarray(self.S, dtype=complex))
        n = S.shape[0]
        C = np.asarray(self.C, dtype=complex).reshape(n, -1)
        m = C.shape[1]
        Omega = np.asarray(self.Omega, dtype=complex).reshape(m, m)
        if S.shape != (n, n):
            raise DimensionError("S must be square")
        if max_abs(Omega - Omega.conj().T) > 1e-10:
            raise StructureError("Omega must be Hermitian")
        for name, a in (("S", S), ("C", C), ("Omega", Omega)):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n(self):
        return self.S.shape[0]

    @property
    def modes(self):
        return self.C.shape[1]

    @classmethod
    def cavity(cls, kappa, delta):
        return cls([[1.0]], [[math.sqrt(kappa)]], [[delta]])

    @classmethod
    def phase(cls, theta):
        return cls([[np.exp(1j * theta)]], np.zeros((1, 0)), np.zeros((0, 0)))

    def mode_operators(self):
        """Lowering operators on the vacuum-plus-one-excitation space (dim ``m + 1``).

        Basis index 0 is the vacuum, ``k + 1`` is one quantum in mode ``k``.
        """
        m = self.modes
        ops = []
        for k in range(m):
            a = np.zeros((m + 1, m + 1), dtype=complex)
            a[0, k + 1] = 1.0
            ops.append(a)
        return ops

    def to_slh(self):
        """The triple on the single-excitation space plus its mode operators.

        Only quantities linear in the modes (``L``) and bilinear in them
        (``H``) appear, so the truncation is exact for the network rules.
        """
        modes = self.mode_operators()
        d = self.modes + 1
        n = self.n
        S = np.zeros((n, n, d, d), dtype=complex)
        for i in range(n):
            for j in range(n):
                S[i, j] = self.S[i, j] * np.eye(d)
        L = np.zeros((n, d, d), dtype=complex)
        H = np.zeros((d, d), dtype=complex)
        for k, ak in enumerate(modes):
            for i in range(n):
                L[i] += self.C[i, k] * ak
            for l, al in enumerate(modes):
                H += self.Omega[k, l] * ak.conj().T @ al
        return SLHTriple(S, L, H), modes


def linear_structure(G, modes, tol=1e-10):
    """Recover ``(S, C, Omega)`` from a triple given its mode lowering operators.

    The triple must be exactly of the declared form; otherwise
    :class:`StructureError` is raised.
    """
    n, d = G.n, G.dim
    m = len(modes)
    eye = np.eye(d)
    S = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            S[i, j] = np.trace(G.S[i, j]) / d
            if max_abs(G.S[i, j] - S[i, j] * eye) > tol:
                raise StructureError(f"S[{i},{j}] does not act trivially on the system")
    if m == 0:
        if max_abs(G.L) > tol or max_abs(G.H) > tol:
            raise StructureError("component without modes must have L = 0 and H = 0")
        return LinearPassive(S, np.zeros((n, 0)), np.zeros((0, 0)))
    basis_l = np.array([a.ravel() for a in modes]).T
    C = np.empty((n, m), dtype=complex)
    for i in range(n):
        coef, *_ = np.linalg.lstsq(basis_l, G.L[i].ravel(), rcond=None)
        if max_abs(basis_l @ coef - G.L[i].ravel()) > tol:
            raise StructureError(f"L[{i}] is not linear in the declared modes")
        C[i] = coef
    pairs = [a.conj().T @ b for a in modes for b in modes]
    basis_h = np.array([p.ravel() for p in pairs]).T
    coef, *_ = np.linalg.lstsq(basis_h, G.H.ravel(), rcond=None)
    if max_abs(basis_h @ coef - G.H.ravel()) > tol:
        raise StructureError("H is not a quadratic form in the declared modes")
    return LinearPassive(S, C, coef.reshape(m, m))


@dataclass(frozen=True)
class TransferPoint:
    omega: float
    Xi: np.ndarray


def transfer_function(P, omega):
    """Steady-state response ``Xi(w) = [1 - C (-iw - A)^-1 C^dag] S``.

    ``A = -i Omega - C^dag C / 2`` is the drift matrix of the mode
    amplitudes, driven by ``b_in ~ exp(-iwt)``.
    """
    if P.modes == 0:
        return TransferPoint(float(omega), P.S.copy())
    C, S = P.C, P.S
    A = -1j * P.Omega - 0.5 * C.conj().T @ C
    M = -1j * omega * np.eye(P.modes) - A
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > POLE_COND_LIMIT:
        raise PoleError(f"undamped mode resonant at omega={omega}")
    Xi = (np.eye(P.n) - C @ np.linalg.solve(M, C.conj().T)) @ S
    return TransferPoint(float(omega), Xi)


@dataclass
class CascadeReport:
    omegas: np.ndarray
    deviations: np.ndarray
    threshold: float = 1e-8

    @property
    def max_deviation(self):
        return float(np.max(self.deviations)) if self.deviations.size else 0.0

    @property
    def passed(self):
        return self.max_deviation <= self.threshold


def cascade_transfer(P1, P2, omega_grid, threshold=1e-8):
    """Compare the response of ``series(P2, P1)`` with ``Xi2(w) Xi1(w)``.

    The left side goes through the network series product on the
    single-excitation triples and re-extracts the mode structure.
    """
    if P1.n != P2.n:
        raise DimensionError("cascaded components need equal channel counts")
    G1, m1 = P1.to_slh()
    G2, m2 = P2.to_slh()
    G = network.series(G2, G1)
    d1, d2 = G1.dim, G2.dim
    modes = [np.kron(a, np.eye(d2)) for a in m1] + [np.kron(np.eye(d1), a) for a in m2]
    P = linear_structure(G, modes)
    omegas = np.asarray(omega_grid, dtype=float)
    dev = np.array([
        max_abs(transfer_function(P, w).Xi
                - transfer_function(P2, w).Xi @ transfer_function(P1, w).Xi)
        for w in omegas])
    return CascadeReport(omegas, dev, threshold)
