"""Parity-graded (Fermi) components.

The grading is carried by a parity operator ``eta`` on the system space;
``eta(X) = eta X eta``. A Fermi component needs every ``S_ij`` and ``H``
even and every ``L_i`` odd.
"""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionError, InvariantError, ParityError
from .ops import DEFAULT_TOL, as_operator, max_abs
from .slh import LangevinCoefficients, SLHTriple, StratonovichCoefficients, _gauge
from . import network

#: Largest number of modes :func:`fermion_modes` will build.
MAX_MODES = 6


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"


@dataclass(frozen=True, eq=False)
class ParityContext:
    eta: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        eta = as_operator(self.eta, name="eta")
        d = eta.shape[0]
        if max_abs(eta - eta.conj().T) > self.tol:
            raise InvariantError("eta is not Hermitian")
        if max_abs(eta @ eta - np.eye(d)) > self.tol:
            raise InvariantError("eta does not square to the identity")
        eta.setflags(write=False)
        object.__setattr__(self, "eta", eta)

    @property
    def dim(self):
        return self.eta.shape[0]

    def conj(self, X):
        """``eta(X) = eta X eta``."""
        X = as_operator(X, self.dim)
        return self.eta @ X @ self.eta


@dataclass(frozen=True)
class ParityResult:
    parity: Parity
    even_deviation: float
    odd_deviation: float


def parity_of(X, ctx, tol=DEFAULT_TOL):
    eX = ctx.conj(X)
    X = as_operator(X)
    even_dev = max_abs(eX - X)
    odd_dev = max_abs(eX + X)
    if even_dev <= tol:
        kind = Parity.EVEN
    elif odd_dev <= tol:
        kind = Parity.ODD
    else:
        kind = Parity.MIXED
    return ParityResult(kind, even_dev, odd_dev)


def split_parity(X, ctx):
    """Return ``(X_even, X_odd)`` with ``X_even + X_odd == X``."""
    X = as_operator(X, ctx.dim)
    X_even = 0.5 * (X + ctx.conj(X))
    return X_even, X - X_even


def fermion_modes(m, max_modes=None):
    """Jordan-Wigner annihilators ``c_0 .. c_{m-1}`` on ``2**m`` dimensions.

    Each site uses the basis (empty, occupied); ``c_k`` carries a parity
    string on the sites before it. Returns ``(modes, eta)`` with ``eta``
    the global parity ``(-1)**N``.
    """
    cap = MAX_MODES if max_modes is None else max_modes
    if m < 1:
        raise ValueError("need at least one mode")
    if m > cap:
        raise DimensionError(f"{m} modes exceeds cap {cap}")
    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    eye = np.eye(2, dtype=complex)
    modes = []
    for k in range(m):
        c = np.ones((1, 1), dtype=complex)
        for site in range(m):
            c = np.kron(c, z if site < k else lower if site == k else eye)
        modes.append(c)
    eta = np.ones((1, 1), dtype=complex)
    for _ in range(m):
        eta = np.kron(eta, z)
    return modes, eta


@dataclass(frozen=True, eq=False)
class FermiSLH:
    triple: SLHTriple
    ctx: ParityContext

    def __post_init__(self):
        if self.triple.dim != self.ctx.dim:
            raise DimensionError(
                f"triple dim {self.triple.dim} does not match eta dim {self.ctx.dim}")


@dataclass(frozen=True)
class ParityCheck:
    coefficient: str
    required: Parity
    deviation: float
    passed: bool


@dataclass
class FermiDiagnostics:
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def table(self):
        rows = ["coefficient,required,deviation,status"]
        for c in self.checks:
            rows.append(f"{c.coefficient},{c.required.value},{c.deviation!r},"
                        f"{'ok' if c.passed else 'FAIL'}")
        return "\n".join(rows)


def _require(diag, name, X, required, ctx, tol):
    res = parity_of(X, ctx, tol)
    dev = res.even_deviation if required is Parity.EVEN else res.odd_deviation
    diag.checks.append(ParityCheck(name, required, dev, dev <= tol))


def validate_fermi(G, tol=DEFAULT_TOL):
    """Check the parity table on an Ito-side Fermi component."""
    diag = FermiDiagnostics()
    T, ctx = G.triple, G.ctx
    for i in range(T.n):
        for j in range(T.n):
            _require(diag, f"S[{i},{j}]", T.S[i, j], Parity.EVEN, ctx, tol)
    for i in range(T.n):
        _require(diag, f"L[{i}]", T.L[i], Parity.ODD, ctx, tol)
    _require(diag, "H", T.H, Parity.EVEN, ctx, tol)
    return diag


def validate_fermi_stratonovich(C, ctx, tol=DEFAULT_TOL):
    """Check the parity table on Stratonovich coefficients (E_ij, E_00 even; E_i0 odd)."""
    if C.dim != ctx.dim:
        raise DimensionError(f"coefficient dim {C.dim} does not match eta dim {ctx.dim}")
    diag = FermiDiagnostics()
    for i in range(C.n):
        for j in range(C.n):
            _require(diag, f"E[{i},{j}]", C.E[i, j], Parity.EVEN, ctx, tol)
    for i in range(C.n):
        _require(diag, f"Evec[{i}]", C.Evec[i], Parity.ODD, ctx, tol)
    _require(diag, "E00", C.E00, Parity.EVEN, ctx, tol)
    return diag


def fermi_langevin(G, X):
    """Graded Langevin coefficients; reduces to the Bose form for even ``X``."""
    T, ctx = G.triple, G.ctx
    X = as_operator(X, T.dim, "X")
    eX = ctx.conj(X)
    Ld = T.L.conj().transpose(0, 2, 1)
    cre_inner = np.array([eX @ Li - Li @ X for Li in T.L])
    ann_inner = np.array([Ldi @ eX - X @ Ldi for Ldi in Ld])
    creation = np.einsum("jiba,jbc->iac", T.S.conj(), cre_inner)
    annihilation = np.einsum("iab,ijbc->jac", ann_inner, T.S)
    LdL = np.einsum("iab,ibc->ac", Ld, T.L)
    drift = (sum(Ldi @ eX @ Li for Ldi, Li in zip(Ld, T.L))
             - 0.5 * (X @ LdL + LdL @ X) - 1j * (X @ T.H - T.H @ X))
    return LangevinCoefficients(_gauge(T, X), creation, annihilation, drift)


def _require_valid(G, tol, label):
    diag = validate_fermi(G, tol)
    if not diag.passed:
        bad = ", ".join(c.coefficient for c in diag.failures())
        raise ParityError(f"{label} violates the parity table ({bad})")


def _same_grading(a, b, tol):
    if a.dim != b.dim or max_abs(a.eta - b.eta) > tol:
        raise ParityError("components carry different parity operators")


def fermi_series(G2, G1, tol=DEFAULT_TOL):
    """Series product of two Fermi components on a common graded space."""
    _same_grading(G2.ctx, G1.ctx, tol)
    _require_valid(G1, tol, "first component")
    _require_valid(G2, tol, "second component")
    out = FermiSLH(network.series(G2.triple, G1.triple, shared=True), G1.ctx)
    _require_valid(out, tol, "series product")
    return out


def fermi_feedback_reduce(G, r0, s0, tol=DEFAULT_TOL):
    _require_valid(G, tol, "component")
    out = FermiSLH(network.feedback_reduce(G.triple, r0, s0), G.ctx)
    _require_valid(out, tol, "reduced component")
    return out
