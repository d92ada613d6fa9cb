"""Quantum feedback network algebra in the zero-delay limit.

Components either share one system space (``shared=True``: all triples
must have equal ``dim`` and are combined directly) or live on distinct
spaces (default: the joint space is the tensor product in argument order,
first component as the slow index).
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import AlgebraicLoopError, DimensionError, InvariantError
from .ops import MAX_DIM, im_part
from .slh import SLHTriple

#: Condition-number ceiling for ``1 - S[s0, r0]`` in feedback elimination.
LOOP_COND_LIMIT = 1e10


def promote(G, left=1, right=1):
    """Embed ``G`` as ``I_left (x) G (x) I_right`` on a larger space."""
    if left == 1 and right == 1:
        return G
    d = left * G.dim * right
    if d > MAX_DIM:
        raise DimensionError(f"joint dimension {d} exceeds limit {MAX_DIM}")
    il, ir = np.eye(left), np.eye(right)

    def lift(a):
        return np.kron(np.kron(il, a), ir)

    n = G.n
    S = np.empty((n, n, d, d), dtype=complex)
    for i in range(n):
        for j in range(n):
            S[i, j] = lift(G.S[i, j])
    L = np.array([lift(Li) for Li in G.L])
    return SLHTriple(S, L, lift(G.H))


def _joint(triples, shared):
    """Bring ``triples`` onto one system space."""
    if shared:
        dims = {G.dim for G in triples}
        if len(dims) != 1:
            raise DimensionError(f"shared-space components have unequal dims {sorted(dims)}")
        return list(triples)
    dims = [G.dim for G in triples]
    total = int(np.prod(dims))
    if total > MAX_DIM:
        raise DimensionError(f"joint dimension {total} exceeds limit {MAX_DIM}")
    out = []
    for k, G in enumerate(triples):
        left = int(np.prod(dims[:k]))
        right = int(np.prod(dims[k + 1:]))
        out.append(promote(G, left, right))
    return out


def concatenate(*triples, shared=False):
    """Stack components side by side: block-diagonal ``S``, stacked ``L``, summed ``H``."""
    if not triples:
        raise ValueError("concatenate needs at least one component")
    parts = _joint(triples, shared)
    d = parts[0].dim
    n = sum(G.n for G in parts)
    S = np.zeros((n, n, d, d), dtype=complex)
    L = np.zeros((n, d, d), dtype=complex)
    H = np.zeros((d, d), dtype=complex)
    k = 0
    for G in parts:
        S[k:k + G.n, k:k + G.n] = G.S
        L[k:k + G.n] = G.L
        H = H + G.H
        k += G.n
    return SLHTriple(S, L, H)


def series(G2, G1, shared=False):
    """Series product ``G2 <| G1``: the output of ``G1`` feeds ``G2``.

    ``S = S2 S1``, ``L = L2 + S2 L1``,
    ``H = H1 + H2 + Im(sum_i L2_i^dagger (S2 L1)_i)``.
    """
    if G1.n != G2.n:
        raise DimensionError(f"series needs equal channel counts, got {G2.n} and {G1.n}")
    G1, G2 = _joint([G1, G2], shared)
    S = np.einsum("ikab,kjbc->ijac", G2.S, G1.S)
    S2L1 = np.einsum("ikab,kbc->iac", G2.S, G1.L)
    L = G2.L + S2L1
    cross = np.einsum("iba,ibc->ac", G2.L.conj(), S2L1)
    H = G1.H + G2.H + im_part(cross)
    return SLHTriple(S, L, H)


def _loop_inverse(m, where):
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > LOOP_COND_LIMIT:
        raise AlgebraicLoopError(
            f"algebraic loop at {where}: 1 - S[s0, r0] is singular (cond={cond:.3g})")
    return np.linalg.inv(m), float(cond)


def feedback_reduce(G, r0, s0, *, _where=None, _return_cond=False):
    """Feed output channel ``s0`` back into input channel ``r0``.

    The retained channels keep their relative order. The Hamiltonian
    correction sums over every output channel of ``G``, the eliminated
    ``s0`` included.
    """
    n, d = G.n, G.dim
    if n < 2:
        raise DimensionError("feedback reduction needs at least two channels")
    if not (0 <= r0 < n and 0 <= s0 < n):
        raise IndexError(f"ports (r0={r0}, s0={s0}) out of range for n={n}")
    where = _where or f"(r0={r0}, s0={s0})"
    inv, cond = _loop_inverse(np.eye(d) - G.S[s0, r0], where)
    # col[s] = S[s, r0] (1 - S[s0, r0])^-1, for every output s
    col = np.einsum("sab,bc->sac", G.S[:, r0], inv)
    S_full = G.S + np.einsum("sab,rbc->srac", col, G.S[s0])
    L_full = G.L + np.einsum("sab,bc->sac", col, G.L[s0])
    corr = np.einsum("sba,sbc,cd->ad", G.L.conj(), col, G.L[s0])
    H = G.H + im_part(corr)
    rows = [s for s in range(n) if s != s0]
    cols = [r for r in range(n) if r != r0]
    red = SLHTriple(S_full[np.ix_(rows, cols)], L_full[rows], H)
    return (red, cond) if _return_cond else red


def permute_channels(G, input_perm, output_perm):
    """Reorder channels: ``S'[a, b] = S[output_perm[a], input_perm[b]]``, ``L'[a] = L[output_perm[a]]``."""
    n = G.n
    for name, p in (("input_perm", input_perm), ("output_perm", output_perm)):
        if sorted(p) != list(range(n)):
            raise ValueError(f"{name} {list(p)} is not a permutation of range({n})")
    ip, op = list(input_perm), list(output_perm)
    return SLHTriple(G.S[np.ix_(op, ip)], G.L[op], G.H)


@dataclass(frozen=True)
class NetworkSpec:
    """A directed graph of named components.

    ``edges`` are ``((src, out_port), (dst, in_port))`` pairs.
    ``external_inputs`` / ``external_outputs`` list ``(component, port)``
    pairs in the order the reduced triple should present them.
    """

    components: dict
    edges: list
    external_inputs: list
    external_outputs: list
    shared: bool = False

    def __post_init__(self):
        object.__setattr__(self, "edges", [(tuple(a), tuple(b)) for a, b in self.edges])
        object.__setattr__(self, "external_inputs", [tuple(p) for p in self.external_inputs])
        object.__setattr__(self, "external_outputs", [tuple(p) for p in self.external_outputs])
        self.validate()

    def ports(self):
        """All ``(component, port)`` pairs; every component has as many inputs as outputs."""
        return [(name, k) for name, G in self.components.items() for k in range(G.n)]

    def validate(self):
        if not self.components:
            raise InvariantError("network has no components")
        all_ports = set(self.ports())
        used_out, used_in = set(), set()
        for src, dst in self.edges:
            for port, used, label in ((src, used_out, "output"), (dst, used_in, "input")):
                if port not in all_ports:
                    raise InvariantError(f"edge references unknown {label} port {port}")
                if port in used:
                    raise InvariantError(f"{label} port {port} appears in more than one edge")
                used.add(port)
        for ext, used, label in ((self.external_inputs, used_in, "input"),
                                 (self.external_outputs, used_out, "output")):
            if len(set(ext)) != len(ext):
                raise InvariantError(f"duplicate external {label} ports")
            free = all_ports - used
            if set(ext) != free:
                missing = sorted(free - set(ext))
                extra = sorted(set(ext) - free)
                raise InvariantError(
                    f"external {label} ports must be exactly the unconnected ones "
                    f"(missing {missing}, unexpected {extra})")


@dataclass
class ReductionStep:
    edge: tuple
    cond: float
    channels: int


@dataclass
class ReductionTrace:
    steps: list = field(default_factory=list)


def reduce_network(spec, order=None):
    """Collapse a network to one SLH triple by successive feedback elimination.

    Components are concatenated in declaration order; edges are eliminated
    in ``order`` (indices into ``spec.edges``, default declaration order).
    Returns ``(triple, trace)``.
    """
    names = list(spec.components)
    G = concatenate(*(spec.components[k] for k in names), shared=spec.shared)
    outs = [(name, k) for name in names for k in range(spec.components[name].n)]
    ins = list(outs)
    trace = ReductionTrace()
    if order is None:
        order = range(len(spec.edges))
    order = list(order)
    if sorted(order) != list(range(len(spec.edges))):
        raise ValueError("order must be a permutation of the edge indices")
    for idx in order:
        src, dst = spec.edges[idx]
        s0, r0 = outs.index(src), ins.index(dst)
        where = f"edge {src[0]}.out[{src[1]}] -> {dst[0]}.in[{dst[1]}]"
        G, cond = feedback_reduce(G, r0, s0, _where=where, _return_cond=True)
        del outs[s0]
        del ins[r0]
        trace.steps.append(ReductionStep((src, dst), cond, G.n))
    if not outs:
        raise InvariantError("network has no external ports left after reduction")
    G = permute_channels(G, [ins.index(p) for p in spec.external_inputs],
                         [outs.index(p) for p in spec.external_outputs])
    return G, trace
