"""Dense complex operator algebra on finite-dimensional Hilbert spaces.

Operators are plain ``numpy`` arrays of shape ``(dim, dim)`` and dtype
``complex128``. :func:`as_operator` is the single validation point; all
other functions accept anything it accepts and return fresh arrays.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionError, ModelError

#: Largest Hilbert-space dimension :func:`tensor` will build.
MAX_DIM = 4096

#: Default tolerance wherever a tolerance is optional.
DEFAULT_TOL = 1e-10


def as_operator(x, dim=None, name="operator"):
    """Coerce ``x`` to a square, finite ``complex128`` matrix.

    Scalars are promoted to ``1x1`` matrices. If ``dim`` is given the
    result must have that side length.
    """
    a = np.array(x, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name}: expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        raise DimensionError(f"{name}: dimension must be positive")
    if dim is not None and a.shape[0] != dim:
        raise DimensionError(f"{name}: expected dim {dim}, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise ModelError(f"{name}: entries must be finite")
    return a


def identity(dim):
    return np.eye(dim, dtype=complex)


def dim_of(a):
    return a.shape[0]


def tensor(a, b, max_dim=None):
    """Kronecker product with ``a`` as the slow (outer) index."""
    a = as_operator(a)
    b = as_operator(b)
    cap = MAX_DIM if max_dim is None else max_dim
    d = a.shape[0] * b.shape[0]
    if d > cap:
        raise DimensionError(f"tensor product dimension {d} exceeds limit {cap}")
    return np.kron(a, b)


def tensor_all(*ops, max_dim=None):
    out = as_operator(ops[0])
    for op in ops[1:]:
        out = tensor(out, op, max_dim=max_dim)
    return out


def dagger(a):
    return as_operator(a).conj().T


class Bracket(str, Enum):
    COMMUTATOR = "commutator"
    ANTICOMMUTATOR = "anticommutator"


def bracket(kind, a, b):
    """Commutator ``ab - ba`` or anticommutator ``ab + ba``."""
    kind = Bracket(kind)
    a = as_operator(a)
    b = as_operator(b, dim=a.shape[0], name="second operand")
    if kind is Bracket.COMMUTATOR:
        return a @ b - b @ a
    return a @ b + b @ a


def commutator(a, b):
    return bracket(Bracket.COMMUTATOR, a, b)


def anticommutator(a, b):
    return bracket(Bracket.ANTICOMMUTATOR, a, b)


def im_part(a):
    """Operator imaginary part ``(a - a^dagger) / 2i``; always Hermitian."""
    a = np.asarray(a, dtype=complex)
    return (a - a.conj().T) / 2j


def max_abs(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


class Property(str, Enum):
    HERMITIAN = "hermitian"
    UNITARY = "unitary"
    POSITIVE_SEMIDEFINITE = "positive_semidefinite"
    UNIT_TRACE = "unit_trace"


@dataclass(frozen=True)
class PropertyReport:
    property: Property
    deviation: float
    tol: float

    @property
    def passed(self):
        return self.deviation <= self.tol


def residual(a, prop):
    """Max-abs residual of the defining identity of ``prop``."""
    prop = Property(prop)
    a = as_operator(a)
    if prop is Property.HERMITIAN:
        return max_abs(a - a.conj().T)
    if prop is Property.UNITARY:
        return max_abs(a.conj().T @ a - np.eye(a.shape[0]))
    if prop is Property.UNIT_TRACE:
        return abs(np.trace(a) - 1.0)
    # PSD: Hermiticity defect plus the most negative eigenvalue of the
    # Hermitian part.
    herm = max_abs(a - a.conj().T)
    lam = np.linalg.eigvalsh((a + a.conj().T) / 2).min()
    return max(herm, max(0.0, -float(lam)))


def check(a, prop, tol=DEFAULT_TOL):
    if not tol > 0:
        raise ValueError("tol must be positive")
    prop = Property(prop)
    return PropertyReport(prop, residual(a, prop), tol)


# Standard small operators. Qubit basis order is (|g>, |e>), so
# sigma_minus = |g><e| and sigma_z = |e><e| - |g><g|.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.T.copy()
for _m in (SIGMA_X, SIGMA_Y, SIGMA_Z, SIGMA_MINUS, SIGMA_PLUS):
    _m.setflags(write=False)


def destroy(n):
    """Truncated bosonic annihilation operator on ``n`` Fock levels."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def random_hermitian(d, rng, scale=1.0):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (x + x.conj().T) / 2


def random_unitary(d, rng):
    """Haar-random unitary via QR of a Ginibre matrix."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(d, rng):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = x @ x.conj().T
    return rho / np.trace(rho)
