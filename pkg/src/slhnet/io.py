"""Model files and CSV output.

A model file is JSON with a ``version`` tag and exactly one model block::

    {"version": 1, "slh": {"n": 1, "dim": 1,
                           "S": [[[1, 0]]], "L": [[[0, 0]]], "H": [[[0, 0]]]}}

Complex numbers are ``[re, im]`` pairs. ``S`` and ``E`` are dense
``(n*dim) x (n*dim)`` block matrices, ``L`` and ``Evec`` are
``(n*dim) x dim`` stacked columns of blocks. Other kinds are
``stratonovich`` (``E``, ``Evec``, ``E00``), ``fermi`` (an slh block plus
``eta``), ``network`` and ``linear_passive`` (``S``, ``C``, ``Omega``).
"""
from dataclasses import dataclass
import json

import numpy as np

from .errors import DimensionError, InvariantError, ParseError
from .fermi import FermiSLH, ParityContext
from .network import NetworkSpec
from .ops import DEFAULT_TOL
from .slh import SLHTriple, StratonovichCoefficients
from .wire import LinearPassive

FORMAT_VERSION = 1
KINDS = ("slh", "stratonovich", "fermi", "network", "linear_passive")


@dataclass
class ModelFile:
    kind: str
    model: object
    version: int = FORMAT_VERSION


def decode_matrix(x, path, shape=None):
    """Nested ``[re, im]`` pairs -> complex array."""
    try:
        a = np.array(x, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{path}: not a rectangular array of [re, im] pairs")
    if a.ndim < 1 or a.shape[-1] != 2:
        raise ParseError(f"{path}: innermost entries must be [re, im] pairs")
    if not np.all(np.isfinite(a)):
        raise ParseError(f"{path}: non-finite entry")
    z = a[..., 0] + 1j * a[..., 1]
    if shape is not None and z.shape != tuple(shape):
        raise DimensionError(f"{path}: expected shape {tuple(shape)}, got {z.shape}")
    return z


def _clean(v):
    v = float(v)
    return 0.0 if v == 0 else v


def encode_matrix(z):
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        return [_clean(z.real), _clean(z.imag)]
    return [encode_matrix(row) for row in z]


def encode_triple(G):
    return {"n": G.n, "dim": G.dim, "S": encode_matrix(G.S_block()),
            "L": encode_matrix(G.L_stack()), "H": encode_matrix(G.H)}


def encode_stratonovich(C):
    return {"n": C.n, "dim": C.dim, "E": encode_matrix(C.E_block()),
            "Evec": encode_matrix(C.Evec.reshape(C.n * C.dim, C.dim)),
            "E00": encode_matrix(C.E00)}


def dump_model(kind, block):
    return json.dumps({"version": FORMAT_VERSION, kind: block}, indent=1) + "\n"


def _field(block, key, path):
    if key not in block:
        raise ParseError(f"{path}.{key}: missing field")
    return block[key]


def _nd(block, path):
    n, d = _field(block, "n", path), _field(block, "dim", path)
    if not (isinstance(n, int) and isinstance(d, int) and n >= 1 and d >= 1):
        raise ParseError(f"{path}: n and dim must be positive integers")
    return n, d


def parse_slh(block, path, tol=DEFAULT_TOL):
    n, d = _nd(block, path)
    S = decode_matrix(_field(block, "S", path), f"{path}.S", (n * d, n * d))
    L = decode_matrix(_field(block, "L", path), f"{path}.L", (n * d, d))
    H = decode_matrix(_field(block, "H", path), f"{path}.H", (d, d))
    G = SLHTriple(S, L, H)
    dev = G.unitarity_residual()
    if dev > tol:
        raise InvariantError(f"{path}.S: not unitary (deviation {dev:.3g} > tol {tol:.3g})")
    dev = G.hermiticity_residual()
    if dev > tol:
        raise InvariantError(f"{path}.H: not Hermitian (deviation {dev:.3g} > tol {tol:.3g})")
    return G


def parse_stratonovich(block, path, tol=DEFAULT_TOL):
    n, d = _nd(block, path)
    E = decode_matrix(_field(block, "E", path), f"{path}.E", (n * d, n * d))
    Evec = decode_matrix(_field(block, "Evec", path), f"{path}.Evec", (n * d, d))
    E00 = decode_matrix(_field(block, "E00", path), f"{path}.E00", (d, d))
    for name, a in (("E", E), ("E00", E00)):
        dev = float(np.max(np.abs(a - a.conj().T)))
        if dev > tol:
            raise InvariantError(f"{path}.{name}: not Hermitian (deviation {dev:.3g} > tol {tol:.3g})")
    return StratonovichCoefficients(E, Evec, E00)


def parse_fermi(block, path, tol=DEFAULT_TOL):
    G = parse_slh(block, path, tol)
    eta = decode_matrix(_field(block, "eta", path), f"{path}.eta", (G.dim, G.dim))
    try:
        ctx = ParityContext(eta, tol)
    except InvariantError as exc:
        raise InvariantError(f"{path}.eta: {exc}") from None
    return FermiSLH(G, ctx)


def _port(x, path, direction=None):
    if isinstance(x, list) and len(x) == 3 and x[1] in ("in", "out"):
        if direction is not None and x[1] != direction:
            raise ParseError(f"{path}: expected an '{direction}' port")
        x = [x[0], x[2]]
    if not (isinstance(x, list) and len(x) == 2 and isinstance(x[0], str)
            and isinstance(x[1], int)):
        raise ParseError(f"{path}: malformed port {x!r}")
    return (x[0], x[1])


def parse_network(block, path, tol=DEFAULT_TOL):
    comps = _field(block, "components", path)
    if not isinstance(comps, dict):
        raise ParseError(f"{path}.components: expected an object")
    components = {name: parse_slh(c, f"{path}.components.{name}", tol)
                  for name, c in comps.items()}
    edges = []
    for k, e in enumerate(_field(block, "edges", path)):
        if not (isinstance(e, list) and len(e) == 2):
            raise ParseError(f"{path}.edges[{k}]: expected [source, target]")
        edges.append((_port(e[0], f"{path}.edges[{k}][0]", "out"),
                      _port(e[1], f"{path}.edges[{k}][1]", "in")))
    ins = [_port(p, f"{path}.external_inputs[{k}]", "in")
           for k, p in enumerate(_field(block, "external_inputs", path))]
    outs = [_port(p, f"{path}.external_outputs[{k}]", "out")
            for k, p in enumerate(_field(block, "external_outputs", path))]
    shared = block.get("shared", False)
    if not isinstance(shared, bool):
        raise ParseError(f"{path}.shared: expected a boolean")
    try:
        return NetworkSpec(components, edges, ins, outs, shared=shared)
    except InvariantError as exc:
        raise InvariantError(f"{path}: {exc}") from None


def parse_linear_passive(block, path, tol=DEFAULT_TOL):
    S = decode_matrix(_field(block, "S", path), f"{path}.S")
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionError(f"{path}.S: must be square")
    n = S.shape[0]
    Omega = decode_matrix(_field(block, "Omega", path), f"{path}.Omega")
    m = 0 if Omega.size == 0 else Omega.shape[0]
    Omega = Omega.reshape(m, m) if Omega.size else np.zeros((0, 0))
    C = decode_matrix(_field(block, "C", path), f"{path}.C") if m else np.zeros((n, 0))
    if C.shape != (n, m):
        raise DimensionError(f"{path}.C: expected shape {(n, m)}, got {C.shape}")
    dev = float(np.max(np.abs(S.conj().T @ S - np.eye(n))))
    if dev > tol:
        raise InvariantError(f"{path}.S: not unitary (deviation {dev:.3g} > tol {tol:.3g})")
    if m:
        dev = float(np.max(np.abs(Omega - Omega.conj().T)))
        if dev > tol:
            raise InvariantError(f"{path}.Omega: not Hermitian (deviation {dev:.3g})")
    return LinearPassive(S, C, Omega)


_PARSERS = {
    "slh": parse_slh,
    "stratonovich": parse_stratonovich,
    "fermi": parse_fermi,
    "network": parse_network,
    "linear_passive": parse_linear_passive,
}


def load_json(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def parse_model_data(data, tol=DEFAULT_TOL):
    if not isinstance(data, dict):
        raise ParseError("top level must be a JSON object")
    version = data.get("version")
    if version != FORMAT_VERSION:
        raise ParseError(f"version: unsupported format version {version!r}")
    kinds = [k for k in KINDS if k in data]
    unknown = sorted(set(data) - set(KINDS) - {"version"})
    if unknown:
        raise ParseError(f"{unknown[0]}: unknown top-level key")
    if len(kinds) != 1:
        raise ParseError(f"expected exactly one model block among {KINDS}, found {kinds}")
    kind = kinds[0]
    block = data[kind]
    if not isinstance(block, dict):
        raise ParseError(f"{kind}: expected an object")
    return ModelFile(kind, _PARSERS[kind](block, kind, tol), version)


def parse_model(path, tol=DEFAULT_TOL):
    return parse_model_data(load_json(path), tol)


def fmt(x):
    """Shortest round-trip decimal; negative zero is written as 0.0."""
    x = float(x)
    return repr(0.0 if x == 0 else x)


def triple_csv(G):
    rows = ["block,row,col,re,im"]
    for name, m in (("S", G.S_block()), ("L", G.L_stack()), ("H", G.H)):
        for r in range(m.shape[0]):
            for c in range(m.shape[1]):
                z = m[r, c]
                rows.append(f"{name},{r},{c},{fmt(z.real)},{fmt(z.imag)}")
    return "\n".join(rows) + "\n"


def trajectory_csv(traj, names):
    header = ["time"]
    for k in names:
        header += [f"{k}_re", f"{k}_im"]
    rows = [",".join(header)]
    for idx, t in enumerate(traj.times):
        vals = [fmt(t)]
        for k in names:
            z = traj.observables[k][idx]
            vals += [fmt(z.real), fmt(z.imag)]
        rows.append(",".join(vals))
    return "\n".join(rows) + "\n"


def sweep_csv(points):
    n = points[0].Xi.shape[0] if points else 0
    header = ["omega"]
    for i in range(n):
        for j in range(n):
            header += [f"Xi_{i}_{j}_re", f"Xi_{i}_{j}_im"]
    rows = [",".join(header)]
    for p in points:
        vals = [fmt(p.omega)]
        for z in p.Xi.ravel():
            vals += [fmt(z.real), fmt(z.imag)]
        rows.append(",".join(vals))
    return "\n".join(rows) + "\n"
