"""Master-equation integration and classical-noise embeddings."""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import IntegrationDivergedError, InvariantError, ModelError
from .ops import DEFAULT_TOL, as_operator, destroy, max_abs
from .slh import SLHTriple

TRACE_TOL = 1e-9
HERMITICITY_TOL = 1e-9
POSITIVITY_FLOOR = -1e-7


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    rho: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        rho = as_operator(self.rho, name="rho")
        if max_abs(rho - rho.conj().T) > self.tol:
            raise InvariantError("rho is not Hermitian")
        if abs(np.trace(rho) - 1) > self.tol:
            raise InvariantError(f"rho has trace {np.trace(rho).real:.6g}, expected 1")
        lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
        if lam < -self.tol:
            raise InvariantError(f"rho has negative eigenvalue {lam:.3g}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self):
        return self.rho.shape[0]

    @classmethod
    def pure(cls, psi):
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))


def expectation(rho, X):
    """``Tr(rho X)``."""
    r = rho.rho if isinstance(rho, DensityMatrix) else as_operator(rho, name="rho")
    X = as_operator(X, r.shape[0], "X")
    return complex(np.einsum("ij,ji->", r, X))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    observables: dict = field(default_factory=dict)
    min_eigenvalues: np.ndarray = None

    def __len__(self):
        return len(self.times)


def _rhs_parts(G):
    Ls = [np.asarray(Li) for Li in G.L if np.any(Li)]
    LdL = sum((Li.conj().T @ Li for Li in Ls), np.zeros_like(G.H))
    K = -1j * G.H - 0.5 * LdL
    Kd = K.conj().T

    def rhs(rho):
        out = K @ rho + rho @ Kd
        for Li in Ls:
            out += Li @ rho @ Li.conj().T
        return out

    return rhs


def _check_state(rho, t):
    tr_dev = abs(np.trace(rho) - 1)
    herm_dev = max_abs(rho - rho.conj().T)
    if tr_dev > TRACE_TOL or herm_dev > HERMITICITY_TOL:
        raise IntegrationDivergedError(
            f"integration diverged at t={t:.6g} (trace deviation {tr_dev:.3g}, "
            f"hermiticity deviation {herm_dev:.3g})", time=t)
    lam = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
    if lam < POSITIVITY_FLOOR:
        raise IntegrationDivergedError(
            f"integration lost positivity at t={t:.6g} (min eigenvalue {lam:.3g})", time=t)
    return lam


def integrate_master(G, rho0, t_end, dt, observables=None, every=1):
    """Integrate ``d rho/dt = L*(rho)`` with fixed-step classical RK4.

    The grid is ``0, dt, 2 dt, ...`` with a shorter last step landing on
    ``t_end``. Every ``every``-th state (and always the final one) is
    stored and checked for trace, Hermiticity and positivity.
    """
    if not isinstance(rho0, DensityMatrix):
        rho0 = DensityMatrix(rho0)
    if rho0.dim != G.dim:
        raise ModelError(f"rho0 dim {rho0.dim} does not match model dim {G.dim}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    obs = {k: as_operator(v, G.dim, k) for k, v in (observables or {}).items()}
    nfull = int(math.floor(t_end / dt + 1e-9))
    steps = [dt] * nfull
    rest = t_end - nfull * dt
    if rest > 1e-12 * max(1.0, t_end):
        steps.append(rest)
    f = _rhs_parts(G)
    rho = np.array(rho0.rho)
    t = 0.0
    times, states, lams = [0.0], [rho.copy()], [_check_state(rho, 0.0)]
    for k, h in enumerate(steps, start=1):
        k1 = f(rho)
        k2 = f(rho + 0.5 * h * k1)
        k3 = f(rho + 0.5 * h * k2)
        k4 = f(rho + h * k3)
        rho = rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = k * dt if k <= nfull else t_end
        if k % every == 0 or k == len(steps):
            lams.append(_check_state(rho, t))
            times.append(t)
            states.append(rho.copy())
    states = np.array(states)
    series = {k: np.einsum("tij,ji->t", states, X) for k, X in obs.items()}
    return Trajectory(np.array(times), states, series, np.array(lams))


def _require_hermitian(X, name, tol):
    X = as_operator(X, name=name)
    if max_abs(X - X.conj().T) > tol:
        raise InvariantError(f"{name} is not Hermitian")
    return X


def embed_quadrature(E, H, tol=DEFAULT_TOL):
    """Wiener-noise coupling ``dU = (-iE dW - E^2/2 dt - iH dt) U`` as ``(I, -iE, H)``."""
    E = _require_hermitian(E, "E", tol)
    H = _require_hermitian(H, "H", tol)
    if H.shape != E.shape:
        raise ModelError("E and H must have the same dimension")
    d = E.shape[0]
    return SLHTriple.single_channel(np.eye(d), -1j * E, H)


def embed_poisson(S, nu, tol=DEFAULT_TOL):
    """Poisson kicks ``dU = (S - I) U dN`` at rate ``nu``.

    The triple ``(S, sqrt(nu)(S - I), (nu/2i)(S^dag - S))`` has master
    equation ``nu (S rho S^dag - rho)``.
    """
    S = as_operator(S, name="S")
    d = S.shape[0]
    if max_abs(S.conj().T @ S - np.eye(d)) > tol:
        raise InvariantError("S is not unitary")
    if not nu > 0:
        raise ModelError("rate nu must be positive")
    L = math.sqrt(nu) * (S - np.eye(d))
    H = (nu / 2j) * (S.conj().T - S)
    return SLHTriple.single_channel(S, L, (H + H.conj().T) / 2)


MIN_TRUNCATION = 8


def quadratures(N):
    """Truncated ``(q, p)`` with ``q = (a + a^dag)/sqrt2``, ``p = (a - a^dag)/(i sqrt2)``."""
    a = destroy(N)
    ad = a.conj().T
    return (a + ad) / math.sqrt(2), (a - ad) / (1j * math.sqrt(2))


def _poly(coeffs, q):
    out = np.zeros_like(q)
    power = np.eye(q.shape[0], dtype=complex)
    for c in coeffs:
        out = out + c * power
        power = power @ q
    return out


def embed_diffusion(w_coeffs, sigma_coeffs, N):
    """Quantum model of ``dx = v dt + sigma(x) dW`` on an ``N``-level oscillator.

    ``w_coeffs`` and ``sigma_coeffs`` are polynomial coefficients in
    ascending order (degree at most 2) of the Stratonovich drift ``w`` and
    the noise amplitude ``sigma``.
    """
    if N < MIN_TRUNCATION:
        raise ModelError(f"truncation N={N} below minimum {MIN_TRUNCATION}")
    polys = []
    for name, c in (("w", w_coeffs), ("sigma", sigma_coeffs)):
        c = np.atleast_1d(np.asarray(c))
        if np.iscomplexobj(c) and np.any(c.imag != 0):
            raise ModelError(f"{name} coefficients must be real")
        c = c.real.astype(float)
        if len(c) > 3:
            raise ModelError(f"{name} polynomial degree exceeds 2")
        polys.append(c)
    q, p = quadratures(N)
    wq, sq = _poly(polys[0], q), _poly(polys[1], q)
    H = 0.5 * (p @ wq + wq @ p)
    E = 0.5 * (p @ sq + sq @ p)
    return embed_quadrature((E + E.conj().T) / 2, (H + H.conj().T) / 2)


def coherent_state(alpha, N):
    """Normalised truncated coherent state vector."""
    n = np.arange(N)
    logfact = np.array([math.lgamma(k + 1) for k in n])
    amp = np.exp(-abs(alpha) ** 2 / 2 - 0.5 * logfact) * alpha ** n
    return amp / np.linalg.norm(amp)
