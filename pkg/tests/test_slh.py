import itertools

import numpy as np
import pytest

from slhnet.errors import DimensionError, NoStratonovichFormError, SingularTransformError
from slhnet.network import series
from slhnet.ops import SIGMA_MINUS, SIGMA_Z, destroy, random_density, random_hermitian
from slhnet.slh import (
    GeneratorMatrix,
    SLHTriple,
    StratonovichCoefficients,
    generator_matrix,
    io_coefficients,
    ito_product,
    ito_to_stratonovich,
    langevin_coefficients,
    lindblad_heisenberg,
    lindblad_schrodinger,
    stratonovich_to_ito,
    to_block,
)

from conftest import random_coefficients, random_triple


# --- a literal transcription of the Ito table, used as an oracle ---------
#
# A differential is a dict mapping a label to its operator coefficient:
# ("dt",), ("dB", j), ("dBd", i), ("dL", i, j).

def _table(x, y):
    """Product of two basic differentials: returns a label or None."""
    if x[0] == "dB" and y[0] == "dBd":
        return ("dt",) if x[1] == y[1] else None
    if x[0] == "dB" and y[0] == "dL":
        return ("dB", y[2]) if x[1] == y[1] else None
    if x[0] == "dL" and y[0] == "dBd":
        return ("dBd", x[1]) if x[2] == y[1] else None
    if x[0] == "dL" and y[0] == "dL":
        return ("dL", x[1], y[2]) if x[2] == y[1] else None
    return None


def _as_dict(G):
    out = {("dt",): G.G00}
    for i in range(G.n):
        out[("dBd", i)] = G.Gi0[i]
        out[("dB", i)] = G.G0j[i]
        for j in range(G.n):
            out[("dL", i, j)] = G.Gij[i, j]
    return out


def _dict_product(a, b, n, d):
    out = {}
    for (x, A), (y, B) in itertools.product(a.items(), b.items()):
        lab = _table(x, y)
        if lab is not None:
            out[lab] = out.get(lab, np.zeros((d, d), complex)) + A @ B
    G = GeneratorMatrix.zero(n, d)
    G00, G0j, Gi0, Gij = G.G00.copy(), G.G0j.copy(), G.Gi0.copy(), G.Gij.copy()
    for lab, v in out.items():
        if lab[0] == "dt":
            G00 = v
        elif lab[0] == "dB":
            G0j[lab[1]] = v
        elif lab[0] == "dBd":
            Gi0[lab[1]] = v
        else:
            Gij[lab[1], lab[2]] = v
    return GeneratorMatrix(G00, G0j, Gi0, Gij)


def _random_generator(rng, n, d):
    def r(*shape):
        return rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return GeneratorMatrix(r(d, d), r(n, d, d), r(n, d, d), r(n, n, d, d))


def _gen_diff(a, b):
    return np.max(np.abs(a.full() - b.full()))


# --- stratonovich_to_ito ---------------------------------------------------

def test_zero_coupling():
    G = stratonovich_to_ito(StratonovichCoefficients.scalar(0, 0, 0.7))
    assert G.S[0, 0, 0, 0] == 1 and G.L[0, 0, 0] == 0 and G.H[0, 0] == 0.7


def test_scalar_scattering_is_cayley():
    G = stratonovich_to_ito(StratonovichCoefficients.scalar(2, 0, 0))
    assert abs(G.S[0, 0, 0, 0] - (1 - 1j) / (1 + 1j)) <= 1e-15
    assert abs(G.S[0, 0, 0, 0] - (-1j)) <= 1e-15
    assert G.L[0, 0, 0] == 0 and G.H[0, 0] == 0


def test_scalar_coupling_sign():
    # With E = 0 the resolvent is 1: L = -i alpha, and Im(1) = 0 so H = 0.
    alpha = 0.3 - 1.2j
    G = stratonovich_to_ito(StratonovichCoefficients.scalar(0, alpha, 0))
    assert G.S[0, 0, 0, 0] == 1
    assert abs(G.L[0, 0, 0] - (-1j * alpha)) <= 1e-15
    assert abs(G.H[0, 0]) <= 1e-15


def test_scalar_hamiltonian_correction():
    # n = d = 1: H = E00 + |a|^2/2 Im(1/(1 + ie/2)) = E00 - |a|^2 e / (4 (1 + e^2/4))
    e, a, h = 0.8, 0.5 + 0.25j, -0.3
    G = stratonovich_to_ito(StratonovichCoefficients.scalar(e, a, h))
    expected = h - abs(a) ** 2 * e / (4 * (1 + e ** 2 / 4))
    assert abs(G.H[0, 0] - expected) <= 1e-15


def test_stratonovich_ito_correction(rng):
    """Independent check of all four Ito coefficients.

    ``dU = -i dM o U`` with the midpoint rule ``X o dY = X dY + dX dY / 2``
    gives ``G = -iM - (i/2) M.G`` under the Ito table, where ``M`` packs the
    Stratonovich coefficients into differential slots.
    """
    for n, d in [(1, 1), (1, 3), (2, 2), (3, 2)]:
        C = random_coefficients(rng, n, d)
        M = GeneratorMatrix(C.E00, C.Evec.conj().transpose(0, 2, 1), C.Evec, C.E)
        G = generator_matrix(stratonovich_to_ito(C))
        MG = _dict_product(_as_dict(M), _as_dict(G), n, d)
        resid = G.full() + 0.5j * MG.full() + 1j * M.full()
        assert np.max(np.abs(resid)) <= 1e-12


def test_singular_transform():
    C = StratonovichCoefficients.scalar(2j, 0, 0)  # 1 + (i/2)(2i) = 0
    with pytest.raises(SingularTransformError):
        stratonovich_to_ito(C)


def test_cayley_unitarity_and_hermiticity(rng):
    for _ in range(50):
        n, d = rng.integers(1, 4, size=2)
        C = random_coefficients(rng, n, d, scale=float(rng.uniform(0.1, 100)))
        G = stratonovich_to_ito(C)
        assert G.unitarity_residual() <= 1e-10
        assert G.hermiticity_residual() <= 1e-10


# --- ito_to_stratonovich ---------------------------------------------------

def test_inverse_trivial():
    C = ito_to_stratonovich(SLHTriple.scalar(1, 0, 0.4))
    assert C.E[0, 0, 0, 0] == 0 and C.Evec[0, 0, 0] == 0 and C.E00[0, 0] == 0.4


def test_inverse_scalar():
    C = ito_to_stratonovich(SLHTriple.scalar(-1j, 0, 0))
    assert abs(C.E[0, 0, 0, 0] - 2) <= 1e-15


def test_roundtrip(rng):
    for _ in range(20):
        C = random_coefficients(rng, 2, 2)
        back = ito_to_stratonovich(stratonovich_to_ito(C))
        assert back.max_abs_diff(C) <= 1e-9


def test_roundtrip_from_ito_side(rng):
    G = random_triple(rng, 2, 3)
    assert stratonovich_to_ito(ito_to_stratonovich(G)).max_abs_diff(G) <= 1e-9


def test_no_stratonovich_form():
    with pytest.raises(NoStratonovichFormError):
        ito_to_stratonovich(SLHTriple.scalar(-1, 0.5, 0))


# --- generator matrix and Ito product ---------------------------------------

def test_generator_of_identity_is_zero():
    G = generator_matrix(SLHTriple.identity(2, 3))
    assert np.array_equal(G.full(), np.zeros((9, 9)))


def test_generator_of_cavity():
    kappa, delta = 0.7, 1.3
    a = destroy(3)
    n_op = a.conj().T @ a
    G = generator_matrix(SLHTriple.single_channel(np.eye(3), np.sqrt(kappa) * a, delta * n_op))
    assert np.max(np.abs(G.G00 - (-(kappa / 2) * n_op - 1j * delta * n_op))) <= 1e-15
    assert np.max(np.abs(G.Gi0[0] - np.sqrt(kappa) * a)) <= 1e-15
    assert np.max(np.abs(G.G0j[0] + np.sqrt(kappa) * a.conj().T)) <= 1e-15
    assert np.max(np.abs(G.Gij)) == 0


def test_ito_product_matches_table(rng):
    for n, d in [(1, 1), (2, 2), (3, 1)]:
        A, B = _random_generator(rng, n, d), _random_generator(rng, n, d)
        assert _gen_diff(ito_product(A, B), _dict_product(_as_dict(A), _as_dict(B), n, d)) <= 1e-12


def test_ito_product_zero(rng):
    B = _random_generator(rng, 2, 2)
    assert np.max(np.abs(ito_product(GeneratorMatrix.zero(2, 2), B).full())) == 0


def test_gauge_times_creation(rng):
    n, d = 2, 2
    A = _random_generator(rng, n, d)
    A = GeneratorMatrix(0 * A.G00, 0 * A.G0j, 0 * A.Gi0, A.Gij)
    B = _random_generator(rng, n, d)
    B = GeneratorMatrix(0 * B.G00, 0 * B.G0j, B.Gi0, 0 * B.Gij)
    P = ito_product(A, B)
    expected = np.einsum("ijab,jbc->iac", A.Gij, B.Gi0)
    assert np.max(np.abs(P.Gi0 - expected)) <= 1e-12
    assert np.max(np.abs(P.G00)) == 0 and np.max(np.abs(P.G0j)) == 0
    assert np.max(np.abs(P.Gij)) == 0


def test_ito_product_shape_mismatch(rng):
    with pytest.raises(DimensionError):
        ito_product(_random_generator(rng, 1, 2), _random_generator(rng, 2, 2))


def test_scalar_unitarity_expansion():
    # n = d = 1: collect each differential in dU* U + U* dU + dU* dU using
    # dB dB* = dt, dB dLambda = dB, dLambda dB* = dB*, dLambda dLambda = dLambda.
    theta, l, h = 0.9, 0.4 - 0.7j, 0.25
    s = np.exp(1j * theta)
    G = generator_matrix(SLHTriple.scalar(s, l, h))
    g00, g01, g10, g11 = G.G00[0, 0], G.G0j[0, 0, 0], G.Gi0[0, 0, 0], G.Gij[0, 0, 0, 0]
    dt = g00 + np.conj(g00) + np.conj(g10) * g10
    dbd = g10 + np.conj(g01) + np.conj(g11) * g10
    db = g01 + np.conj(g10) + np.conj(g10) * g11
    dlam = g11 + np.conj(g11) + np.conj(g11) * g11
    for v in (dt, dbd, db, dlam):
        assert abs(v) <= 1e-15
    assert G.unitarity_residual() <= 1e-15


def test_generator_unitarity_residual(rng):
    for _ in range(20):
        G = stratonovich_to_ito(random_coefficients(rng, 2, 3))
        assert generator_matrix(G).unitarity_residual() <= 1e-10
        assert generator_matrix(random_triple(rng, 3, 2)).unitarity_residual() <= 1e-10


# --- Lindblad generators -----------------------------------------------------

def test_heisenberg_kills_identity(rng):
    G = random_triple(rng, 2, 3)
    assert np.max(np.abs(lindblad_heisenberg(G, np.eye(3)))) <= 1e-12


def test_heisenberg_qubit_decay():
    G = SLHTriple.single_channel(np.eye(2), SIGMA_MINUS, np.zeros((2, 2)))
    out = lindblad_heisenberg(G, SIGMA_Z)
    assert np.max(np.abs(out + (np.eye(2) + SIGMA_Z))) <= 1e-15


def test_heisenberg_preserves_hermiticity(rng):
    G = random_triple(rng, 2, 3)
    X = random_hermitian(3, rng)
    out = lindblad_heisenberg(G, X)
    assert np.max(np.abs(out - out.conj().T)) <= 1e-12


def test_schrodinger_maximally_mixed_fixed(rng):
    H = random_hermitian(3, rng)
    G = SLHTriple(np.eye(3).reshape(1, 1, 3, 3), np.zeros((1, 3, 3)), H)
    assert np.max(np.abs(lindblad_schrodinger(G, np.eye(3) / 3))) <= 1e-15


def test_schrodinger_dephasing_coherence(rng):
    G = SLHTriple.single_channel(np.eye(2), -1j * SIGMA_Z, np.zeros((2, 2)))
    rho = random_density(2, rng)
    out = lindblad_schrodinger(G, rho)
    assert abs(out[0, 1] - (-2 * rho[0, 1])) <= 1e-15
    # entrywise oracle: sigma_z rho sigma_z - rho
    assert np.max(np.abs(out - (SIGMA_Z @ rho @ SIGMA_Z - rho))) <= 1e-15


def test_trace_preservation_and_duality(rng):
    for _ in range(10):
        G = random_triple(rng, 2, 4)
        rho = random_density(4, rng)
        X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert abs(np.trace(lindblad_schrodinger(G, rho))) <= 1e-11
        lhs = np.trace(lindblad_heisenberg(G, X) @ rho)
        rhs = np.trace(X @ lindblad_schrodinger(G, rho))
        assert abs(lhs - rhs) <= 1e-11


def test_dimension_mismatch(rng):
    G = random_triple(rng, 1, 2)
    with pytest.raises(DimensionError):
        lindblad_heisenberg(G, np.eye(3))
    with pytest.raises(DimensionError):
        lindblad_schrodinger(G, np.eye(3) / 3)


# --- Langevin and input-output ---------------------------------------------

def test_langevin_identity_observable(rng):
    G = SLHTriple(np.eye(2).reshape(1, 1, 2, 2), rng.normal(size=(1, 2, 2)), np.diag([1.0, 2.0]))
    assert langevin_coefficients(G, np.eye(2)).max_abs() <= 1e-15
    G = random_triple(rng, 2, 2)
    assert langevin_coefficients(G, np.eye(2)).max_abs() <= 1e-12


def test_langevin_trivial_scattering(rng):
    G = random_triple(rng, 2, 3)
    S = np.zeros_like(G.S)
    S[0, 0] = S[1, 1] = np.eye(3)
    G = SLHTriple(S, G.L, G.H)
    X = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    c = langevin_coefficients(G, X)
    assert np.max(np.abs(c.gauge)) <= 1e-15
    for i in range(2):
        assert np.max(np.abs(c.creation[i] - (X @ G.L[i] - G.L[i] @ X))) <= 1e-15


def test_langevin_cavity():
    kappa, delta = 0.5, 2.0
    a = destroy(4)
    G = SLHTriple.single_channel(np.eye(4), np.sqrt(kappa) * a, delta * a.conj().T @ a)
    c = langevin_coefficients(G, a)
    assert np.max(np.abs(c.creation)) == 0
    # [a^dag, a] = -1 away from the truncation edge
    assert np.max(np.abs(c.annihilation[0][:3, :3] + np.sqrt(kappa) * np.eye(3))) <= 1e-15
    assert np.max(np.abs(c.drift - (-(1j * delta + kappa / 2) * a))) <= 1e-14


def test_langevin_hermitian_structure(rng):
    G = random_triple(rng, 2, 3)
    X = random_hermitian(3, rng)
    c = langevin_coefficients(G, X)
    for i in range(2):
        assert np.max(np.abs(c.creation[i] - c.annihilation[i].conj().T)) <= 1e-12
    assert np.max(np.abs(c.drift - c.drift.conj().T)) <= 1e-12


def test_io_coefficients(rng):
    S, L = io_coefficients(SLHTriple.identity(2, 2))
    assert np.array_equal(to_block(S), np.eye(4)) and not L.any()
    a = destroy(3)
    G = SLHTriple.single_channel(np.eye(3), 0.8 * a, np.zeros((3, 3)))
    S, L = io_coefficients(G)
    assert np.array_equal(S[0, 0], np.eye(3)) and np.array_equal(L[0], 0.8 * a)
    G1, G2 = random_triple(rng, 2, 2), random_triple(rng, 2, 2)
    S, L = io_coefficients(series(G2, G1, shared=True))
    assert np.max(np.abs(S - np.einsum("ikab,kjbc->ijac", G2.S, G1.S))) <= 1e-14
    assert np.max(np.abs(L - (G2.L + np.einsum("ikab,kbc->iac", G2.S, G1.L)))) <= 1e-14


def test_triple_validation(rng):
    with pytest.raises(ValueError):
        SLHTriple.scalar(2.0, 0, 0).validate()
    with pytest.raises(ValueError):
        SLHTriple.scalar(1.0, 0, 1j).validate()
    with pytest.raises(DimensionError):
        SLHTriple(np.eye(2), np.zeros((1, 3, 3)), np.eye(3))
