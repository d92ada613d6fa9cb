"""SLH triples, the Stratonovich/Ito coefficient conversion and the
generators derived from a triple.

Operator matrices are stored as 4-d arrays ``S[i, j]`` of shape
``(n, n, d, d)`` and operator vectors as ``L[i]`` of shape ``(n, d, d)``.
Channel indices are 0-based.
"""
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    InvariantError,
    NoStratonovichFormError,
    SingularTransformError,
)
from .ops import DEFAULT_TOL, as_operator, im_part, max_abs

#: Condition-number ceiling for the operator-matrix inverses used by the
#: Stratonovich/Ito conversion.
COND_LIMIT = 1e12


def to_block(m):
    """``(n, n, d, d)`` operator matrix -> ``(n*d, n*d)`` dense matrix."""
    n, _, d, _ = m.shape
    return m.transpose(0, 2, 1, 3).reshape(n * d, n * d)


def from_block(b, n):
    d = b.shape[0] // n
    return b.reshape(n, d, n, d).transpose(0, 2, 1, 3)


def stack(v):
    """``(n, d, d)`` operator vector -> ``(n*d, d)`` column of blocks."""
    n, d, _ = v.shape
    return v.reshape(n * d, d)


def unstack(c, n):
    d = c.shape[1]
    return c.reshape(n, d, d)


def _operator_matrix(x, n, d, name):
    a = np.array(x, dtype=complex)
    if a.ndim == 2 and a.shape == (n * d, n * d):
        a = from_block(a, n)
    if a.shape != (n, n, d, d):
        raise DimensionError(f"{name}: expected shape {(n, n, d, d)}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvariantError(f"{name}: entries must be finite")
    return a


def _operator_vector(x, n, d, name):
    a = np.array(x, dtype=complex)
    if a.ndim == 2 and a.shape == (n * d, d):
        a = unstack(a, n)
    if a.shape != (n, d, d):
        raise DimensionError(f"{name}: expected shape {(n, d, d)}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvariantError(f"{name}: entries must be finite")
    return a


def _inverse(m, what, exc):
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise exc(f"{what} is singular or ill-conditioned (cond={cond:.3g})")
    return np.linalg.inv(m)


@dataclass(frozen=True, eq=False)
class SLHTriple:
    """An ``n``-channel open quantum component on a ``dim``-dimensional system.

    ``S``, ``L`` and ``H`` may be given as nested operator arrays or, for
    ``S`` and ``L``, in dense block form ``(n*d, n*d)`` / ``(n*d, d)``.
    Shapes are checked on construction; unitarity and Hermiticity are
    checked by :meth:`validate`.
    """

    S: np.ndarray
    L: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        H = as_operator(self.H, name="H")
        d = H.shape[0]
        L = np.array(self.L, dtype=complex)
        if L.ndim == 3:
            n = L.shape[0]
        elif L.ndim == 2 and L.shape[1] == d and L.shape[0] % d == 0:
            n = L.shape[0] // d
        else:
            raise DimensionError(f"L: cannot infer channel count from shape {L.shape}")
        if n < 1:
            raise DimensionError("an SLH triple needs at least one channel")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "L", _operator_vector(L, n, d, "L"))
        object.__setattr__(self, "S", _operator_matrix(self.S, n, d, "S"))
        for a in (self.S, self.L, self.H):
            a.setflags(write=False)

    @property
    def n(self):
        return self.L.shape[0]

    @property
    def dim(self):
        return self.H.shape[0]

    @classmethod
    def identity(cls, n=1, dim=1):
        S = np.zeros((n, n, dim, dim), dtype=complex)
        for i in range(n):
            S[i, i] = np.eye(dim)
        return cls(S, np.zeros((n, dim, dim)), np.zeros((dim, dim)))

    @classmethod
    def scalar(cls, S, L, H=0.0):
        """Build a triple with trivial (``dim=1``) system space from numbers."""
        S = np.atleast_2d(np.asarray(S, dtype=complex))
        L = np.atleast_1d(np.asarray(L, dtype=complex))
        n = L.shape[0]
        return cls(S.reshape(n, n, 1, 1), L.reshape(n, 1, 1), np.reshape(H, (1, 1)))

    @classmethod
    def single_channel(cls, S, L, H):
        """Build a one-channel triple from three ``d x d`` operators."""
        S = as_operator(S, name="S")
        d = S.shape[0]
        return cls(S.reshape(1, 1, d, d), as_operator(L, d, "L").reshape(1, d, d),
                   as_operator(H, d, "H"))

    def S_block(self):
        return to_block(self.S)

    def L_stack(self):
        return stack(self.L)

    def unitarity_residual(self):
        """Max of both operator-matrix unitarity defects of ``S``."""
        s = self.S_block()
        eye = np.eye(s.shape[0])
        return max(max_abs(s.conj().T @ s - eye), max_abs(s @ s.conj().T - eye))

    def hermiticity_residual(self):
        return max_abs(self.H - self.H.conj().T)

    def validate(self, tol=DEFAULT_TOL):
        dev = self.unitarity_residual()
        if dev > tol:
            raise InvariantError(f"S is not unitary (deviation {dev:.3g} > tol {tol:.3g})")
        dev = self.hermiticity_residual()
        if dev > tol:
            raise InvariantError(f"H is not Hermitian (deviation {dev:.3g} > tol {tol:.3g})")
        return self

    def is_valid(self, tol=DEFAULT_TOL):
        return self.unitarity_residual() <= tol and self.hermiticity_residual() <= tol

    def max_abs_diff(self, other):
        """Largest entrywise difference to ``other`` (inf if shapes differ)."""
        if (self.n, self.dim) != (other.n, other.dim):
            return float("inf")
        return max(max_abs(self.S - other.S), max_abs(self.L - other.L),
                   max_abs(self.H - other.H))

    def __repr__(self):
        return f"SLHTriple(n={self.n}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class StratonovichCoefficients:
    """The Hamiltonian-side coefficients ``E_ij``, ``E_i0`` and ``E_00``.

    ``E_0j`` is not stored; it is always ``Evec[j]^dagger``.
    """

    E: np.ndarray
    Evec: np.ndarray
    E00: np.ndarray

    def __post_init__(self):
        E00 = as_operator(self.E00, name="E00")
        d = E00.shape[0]
        Evec = np.array(self.Evec, dtype=complex)
        if Evec.ndim == 3:
            n = Evec.shape[0]
        elif Evec.ndim == 2 and Evec.shape[1] == d and Evec.shape[0] % d == 0:
            n = Evec.shape[0] // d
        else:
            raise DimensionError(f"Evec: cannot infer channel count from shape {Evec.shape}")
        object.__setattr__(self, "E00", E00)
        object.__setattr__(self, "Evec", _operator_vector(Evec, n, d, "Evec"))
        object.__setattr__(self, "E", _operator_matrix(self.E, n, d, "E"))
        for a in (self.E, self.Evec, self.E00):
            a.setflags(write=False)

    @property
    def n(self):
        return self.Evec.shape[0]

    @property
    def dim(self):
        return self.E00.shape[0]

    @classmethod
    def scalar(cls, E, Evec, E00=0.0):
        E = np.atleast_2d(np.asarray(E, dtype=complex))
        Evec = np.atleast_1d(np.asarray(Evec, dtype=complex))
        n = Evec.shape[0]
        return cls(E.reshape(n, n, 1, 1), Evec.reshape(n, 1, 1), np.reshape(E00, (1, 1)))

    def E_block(self):
        return to_block(self.E)

    def hermiticity_residual(self):
        e = self.E_block()
        return max(max_abs(e - e.conj().T), max_abs(self.E00 - self.E00.conj().T))

    def validate(self, tol=DEFAULT_TOL):
        dev = self.hermiticity_residual()
        if dev > tol:
            raise InvariantError(f"E is not Hermitian (deviation {dev:.3g} > tol {tol:.3g})")
        return self

    def max_abs_diff(self, other):
        if (self.n, self.dim) != (other.n, other.dim):
            return float("inf")
        return max(max_abs(self.E - other.E), max_abs(self.Evec - other.Evec),
                   max_abs(self.E00 - other.E00))

    def __repr__(self):
        return f"StratonovichCoefficients(n={self.n}, dim={self.dim})"


def stratonovich_to_ito(C):
    """Cayley-transform Stratonovich coefficients into an Ito SLH triple.

    With ``K = (1 + iE/2)^-1``::

        S = (1 - iE/2) K
        L = -i K E_0            (E_0 the column of E_i0)
        H = E_00 + 1/2 E_0^dagger Im(K) E_0

    The sign of ``L`` is the one produced by Wick-ordering the
    Stratonovich equation ``dU = -i(E dLambda + ...) o U``; see
    ``tests/test_slh.py::test_stratonovich_ito_correction`` for the check
    against the Ito product.
    """
    n, d = C.n, C.dim
    e = C.E_block()
    eye = np.eye(n * d)
    k = _inverse(eye + 0.5j * e, "1 + (i/2)E", SingularTransformError)
    s = (eye - 0.5j * e) @ k
    e0 = stack(C.Evec)
    l = -1j * k @ e0
    h = C.E00 + 0.5 * e0.conj().T @ im_part(k) @ e0
    h = (h + h.conj().T) / 2
    return SLHTriple(from_block(s, n), unstack(l, n), h)


def ito_to_stratonovich(G):
    """Inverse of :func:`stratonovich_to_ito`.

    ``E = 2i (S - 1)(1 + S)^-1``; since ``(1 + iE/2)^-1 = (1 + S)/2`` the
    other coefficients are ``E_0 = 2i (1 + S)^-1 L`` and
    ``E_00 = H - 1/2 E_0^dagger Im((1 + S)/2) E_0``.
    """
    n, d = G.n, G.dim
    s = G.S_block()
    eye = np.eye(n * d)
    inv = _inverse(eye + s, "1 + S", NoStratonovichFormError)
    e = 2j * (s - eye) @ inv
    e = (e + e.conj().T) / 2
    e0 = 2j * inv @ G.L_stack()
    k = (eye + s) / 2
    e00 = G.H - 0.5 * e0.conj().T @ im_part(k) @ e0
    e00 = (e00 + e00.conj().T) / 2
    return StratonovichCoefficients(from_block(e, n), unstack(e0, n), e00)


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Coefficients of the four Ito differentials of ``dU = G U``.

    ``G00`` multiplies ``dt``, ``Gi0[i]`` multiplies ``dB_i^dagger``,
    ``G0j[j]`` multiplies ``dB_j`` and ``Gij[i, j]`` multiplies
    ``dLambda_ij``. In the dense form the index 0 is the vacuum/time slot
    followed by the ``n`` channels, and the Ito table becomes matrix
    multiplication with the vacuum slot projected out between factors.
    """

    G00: np.ndarray
    G0j: np.ndarray
    Gi0: np.ndarray
    Gij: np.ndarray

    @property
    def n(self):
        return self.Gi0.shape[0]

    @property
    def dim(self):
        return self.G00.shape[0]

    def full(self):
        n, d = self.n, self.dim
        out = np.zeros(((n + 1) * d, (n + 1) * d), dtype=complex)
        out[:d, :d] = self.G00
        out[:d, d:] = np.concatenate(list(self.G0j), axis=1)
        out[d:, :d] = stack(self.Gi0)
        out[d:, d:] = to_block(self.Gij)
        return out

    @classmethod
    def from_full(cls, m, n):
        d = m.shape[0] // (n + 1)
        G00 = m[:d, :d]
        G0j = m[:d, d:].reshape(d, n, d).transpose(1, 0, 2)
        Gi0 = unstack(m[d:, :d], n)
        Gij = from_block(m[d:, d:], n)
        return cls(G00.copy(), G0j.copy(), Gi0.copy(), Gij.copy())

    @classmethod
    def zero(cls, n, d):
        return cls(np.zeros((d, d), complex), np.zeros((n, d, d), complex),
                   np.zeros((n, d, d), complex), np.zeros((n, n, d, d), complex))

    def dagger(self):
        """Adjoint differential (``dB <-> dB^dagger``, ``dLambda_ij -> dLambda_ji``)."""
        return GeneratorMatrix.from_full(self.full().conj().T, self.n)

    def __add__(self, other):
        return GeneratorMatrix.from_full(self.full() + other.full(), self.n)

    def unitarity_residual(self):
        """Max-abs of ``G + G^dagger + G^dagger . G`` (the Ito-product)."""
        g = self.full()
        return max_abs(g + g.conj().T + ito_product(self.dagger(), self).full())


def generator_matrix(G):
    n, d = G.n, G.dim
    Gij = G.S.copy()
    for i in range(n):
        Gij[i, i] = Gij[i, i] - np.eye(d)
    Ldag = G.L.conj().transpose(0, 2, 1)
    G0j = -np.einsum("iab,ijbc->jac", Ldag, G.S)
    LdL = np.einsum("iab,ibc->ac", Ldag, G.L)
    G00 = -(0.5 * LdL + 1j * G.H)
    return GeneratorMatrix(G00, G0j, G.L.copy(), Gij)


def ito_product(A, B):
    """Product of two differentials under the quantum Ito table.

    Only ``dB_i dB_j^dagger = delta_ij dt``, ``dB_i dLambda_jk = delta_ij dB_k``,
    ``dLambda_ij dB_k^dagger = delta_jk dB_i^dagger`` and
    ``dLambda_ij dLambda_kl = delta_jk dLambda_il`` survive.
    """
    if (A.n, A.dim) != (B.n, B.dim):
        raise DimensionError(
            f"generator shapes differ: (n={A.n}, d={A.dim}) vs (n={B.n}, d={B.dim})")
    d = A.dim
    a, b = A.full(), B.full()
    # Summing only over channel slots is the projection onto dLambda-compatible
    # indices; the dt slot never contracts.
    return GeneratorMatrix.from_full(a[:, d:] @ b[d:, :], A.n)


def _check_dim(G, X, name="X"):
    return as_operator(X, G.dim, name)


def lindblad_heisenberg(G, X):
    """Heisenberg-picture Lindblad generator applied to ``X``."""
    X = _check_dim(G, X)
    out = -1j * (X @ G.H - G.H @ X)
    for Li in G.L:
        Ld = Li.conj().T
        out = out + 0.5 * Ld @ (X @ Li - Li @ X) + 0.5 * (Ld @ X - X @ Ld) @ Li
    return out


def lindblad_schrodinger(G, rho):
    """Master-equation generator: the trace-dual of :func:`lindblad_heisenberg`."""
    rho = _check_dim(G, rho, "rho")
    out = -1j * (G.H @ rho - rho @ G.H)
    for Li in G.L:
        Ld = Li.conj().T
        LdL = Ld @ Li
        out = out + Li @ rho @ Ld - 0.5 * (LdL @ rho + rho @ LdL)
    return out


@dataclass(frozen=True, eq=False)
class LangevinCoefficients:
    """``d j(X) = gauge_ij dLambda_ij + creation_i dB_i^dag + annihilation_j dB_j + drift dt``."""

    gauge: np.ndarray
    creation: np.ndarray
    annihilation: np.ndarray
    drift: np.ndarray

    def max_abs_diff(self, other):
        return max(max_abs(self.gauge - other.gauge),
                   max_abs(self.creation - other.creation),
                   max_abs(self.annihilation - other.annihilation),
                   max_abs(self.drift - other.drift))

    def max_abs(self):
        return max(max_abs(self.gauge), max_abs(self.creation),
                   max_abs(self.annihilation), max_abs(self.drift))


def _gauge(G, X):
    n = G.n
    Sdag = G.S.conj().transpose(1, 0, 3, 2)  # Sdag[i, k] = S[k, i]^dagger
    gauge = np.einsum("ikab,bc,kjcd->ijad", Sdag, X, G.S)
    for i in range(n):
        gauge[i, i] = gauge[i, i] - X
    return gauge


def langevin_coefficients(G, X):
    X = _check_dim(G, X)
    comm_XL = np.array([X @ Li - Li @ X for Li in G.L])
    comm_LdX = np.array([Li.conj().T @ X - X @ Li.conj().T for Li in G.L])
    # creation_i = sum_j S_ji^dag [X, L_j];  annihilation_j = sum_i [L_i^dag, X] S_ij
    creation = np.einsum("jiba,jbc->iac", G.S.conj(), comm_XL)
    annihilation = np.einsum("iab,ijbc->jac", comm_LdX, G.S)
    return LangevinCoefficients(_gauge(G, X), creation, annihilation,
                                lindblad_heisenberg(G, X))


def io_coefficients(G):
    """The ``(S, L)`` pair entering ``dB_out = j_t(S) dB + j_t(L) dt``."""
    return G.S, G.L
