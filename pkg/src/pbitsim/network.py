"""p-bit network construction, validation, energy and text serialization."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter

import numpy as np


class Kind(str, enum.Enum):
    EMOA = "emoa"  # symmetric couplings, Boltzmann stationary law
    PGA = "pga"  # directed acyclic couplings, no energy functional

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    """Synapse matrix ``j``, bias ``h``, network kind and update order.

    ``j[i, k]`` is the weight with which device ``k`` drives device ``i``.
    Arrays are copied and made read-only.  Invariants are *not* enforced here
    (see :func:`validate`); only shapes are.
    """

    j: np.ndarray
    h: np.ndarray
    kind: Kind
    update_order: tuple[int, ...] | None = None
    name: str = field(default="custom", compare=False)
    io: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        j = np.array(self.j, dtype=float)
        h = np.array(self.h, dtype=float)
        if j.ndim != 2 or j.shape[0] != j.shape[1]:
            raise ValueError(f"J must be square, got shape {j.shape}")
        if h.shape != (j.shape[0],):
            raise ValueError(f"h must have length {j.shape[0]}, got shape {h.shape}")
        j.setflags(write=False)
        h.setflags(write=False)
        order = tuple(range(j.shape[0])) if self.update_order is None else tuple(int(i) for i in self.update_order)
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "update_order", order)

    @property
    def n(self) -> int:
        return self.h.shape[0]

    def __eq__(self, other):
        if not isinstance(other, NetworkSpec):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.update_order == other.update_order
            and np.array_equal(self.j, other.j)
            and np.array_equal(self.h, other.h)
        )

    __hash__ = None


@dataclass(frozen=True)
class EnergySample:
    state: tuple[int, ...]
    energy: float


class NetworkFormatError(ValueError):
    """Malformed network text.  ``line`` and ``column`` are 1-based."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# --- validation ---------------------------------------------------------------

def _edges(j: np.ndarray):
    """Directed edges (source, target) for every nonzero off-diagonal weight."""
    targets, sources = np.nonzero(j)
    return [(int(s), int(t)) for t, s in zip(targets, sources) if s != t]


def validate(net: NetworkSpec) -> list[str]:
    """Return every invariant violation of ``net``; an empty list means valid."""
    violations = []
    n = net.n
    if not (np.all(np.isfinite(net.j)) and np.all(np.isfinite(net.h))):
        violations.append("J and h must be finite")
    diag = np.flatnonzero(np.diag(net.j))
    if diag.size:
        violations.append(f"nonzero diagonal at devices {diag.tolist()}")
    if sorted(net.update_order) != list(range(n)):
        violations.append(f"update_order is not a permutation of 0..{n - 1}")

    if net.kind is Kind.EMOA:
        asym = np.argwhere(net.j != net.j.T)
        if asym.size:
            i, k = asym[0]
            violations.append(f"EMOA network has asymmetric J ({len(asym) // 2} pairs, first ({i},{k}))")
    else:
        edges = _edges(net.j)
        graph = {i: set() for i in range(n)}
        for src, dst in edges:
            graph[dst].add(src)
        try:
            tuple(TopologicalSorter(graph).static_order())
        except CycleError as exc:
            violations.append(f"PGA network has a directed cycle through {exc.args[1]}")
        else:
            if sorted(net.update_order) == list(range(n)):
                pos = {dev: k for k, dev in enumerate(net.update_order)}
                bad = [(s, t) for s, t in edges if pos[s] >= pos[t]]
                if bad:
                    violations.append(f"update_order is not topological, e.g. edge {bad[0][0]}->{bad[0][1]}")
        if n > 1 and np.array_equal(net.j, net.j.T):
            violations.append("PGA network has symmetric J")
    return violations


def check(net: NetworkSpec) -> NetworkSpec:
    """Raise ``ValueError`` listing all violations, else return ``net``."""
    violations = validate(net)
    if violations:
        raise ValueError("invalid network: " + "; ".join(violations))
    return net


# --- energy -------------------------------------------------------------------

def energy(net: NetworkSpec, state) -> float:
    """Ising energy ``-(1/2 m.J.m + h.m)`` of a +-1 state."""
    if net.kind is not Kind.EMOA:
        raise ValueError("energy is only defined for EMOA (symmetric) networks")
    m = np.asarray(state, dtype=float)
    if m.shape != (net.n,) or not np.all(np.abs(m) == 1):
        raise ValueError("state must be a length-n vector of +-1")
    return float(-(0.5 * m @ net.j @ m + net.h @ m))


def all_states(n: int) -> np.ndarray:
    """Every +-1 state as rows, row ``c`` having bit ``i`` of ``c`` set iff ``m_i = +1``."""
    codes = np.arange(2**n, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


def state_code(state) -> int:
    m = np.asarray(state)
    return int(np.sum((m > 0).astype(np.int64) << np.arange(m.size, dtype=np.int64)))


def energies(net: NetworkSpec) -> np.ndarray:
    """Energy of every state, indexed by state code (brute force, n <= 24)."""
    if net.kind is not Kind.EMOA:
        raise ValueError("energy is only defined for EMOA (symmetric) networks")
    if net.n > 24:
        raise ValueError("brute-force enumeration limited to n <= 24")
    s = all_states(net.n).astype(float)
    return -(0.5 * np.einsum("si,ij,sj->s", s, net.j, s) + s @ net.h)


def ground_states(net: NetworkSpec, atol: float = 1e-9) -> list[EnergySample]:
    e = energies(net)
    emin = e.min()
    states = all_states(net.n)
    return [EnergySample(tuple(int(v) for v in states[c]), float(e[c])) for c in np.flatnonzero(e <= emin + atol)]


def boltzmann(net: NetworkSpec, beta_kappa: float) -> np.ndarray:
    """Exact stationary law ``exp(-beta*kappa*E) / Z`` indexed by state code.

    A p-bit with input ``kappa*I`` is +1 with probability
    ``(1 + tanh(beta*kappa*I)) / 2 = 1 / (1 + exp(-2*beta*kappa*I))``, which is
    the heat-bath conditional of ``exp(-beta*kappa*E)``.
    """
    e = energies(net)
    w = np.exp(-beta_kappa * (e - e.min()))
    return w / w.sum()


# --- builders -----------------------------------------------------------------

def and_gate() -> NetworkSpec:
    """Invertible AND: devices (A, B, C) with C = A AND B in the ground states."""
    j = [[0, -1, 2], [-1, 0, 2], [2, 2, 0]]
    h = [1, 1, -2]
    return NetworkSpec(j, h, Kind.EMOA, name="and_gate", io=(0, 1, 2))


# Devices 0-4 are A, B, Cin, Sum, Cout.  Hidden devices: 5 X=A^B, 6 and 7 the
# XOR auxiliaries, 8 A&B, 9 X&Cin, 10-13 fan-out copies of A, B, X, Cin.
# Composed from two XOR gadgets, two AND gadgets, an OR gadget and four
# ferromagnetic copy links.
_FULL_ADDER_TEXT = """\
pbitnet v1 kind=emoa n=14
0 -1 0 0 0 1 2 0 0 0 1 0 0 0
-1 0 0 0 0 1 2 0 0 0 0 1 0 0
0 0 0 1 0 -1 0 2 0 0 0 0 0 1
0 0 1 0 0 1 0 -2 0 0 0 0 0 0
0 0 0 0 0 0 0 0 2 2 0 0 0 0
1 1 -1 1 0 0 -2 2 0 0 0 0 1 0
2 2 0 0 0 -2 0 0 0 0 0 0 0 0
0 0 2 -2 0 2 0 0 0 0 0 0 0 0
0 0 0 0 2 0 0 0 0 -1 2 2 0 0
0 0 0 0 2 0 0 0 -1 0 0 0 2 2
1 0 0 0 0 0 0 0 2 0 0 -1 0 0
0 1 0 0 0 0 0 0 2 0 -1 0 0 0
0 0 0 0 0 1 0 0 0 2 0 0 0 -1
0 0 1 0 0 0 0 0 0 2 0 0 -1 0
1 1 1 -1 2 0 -2 -2 -3 -3 1 1 1 1
order: 0 1 2 3 4 5 6 7 8 9 10 11 12 13
"""


def full_adder(table: str = _FULL_ADDER_TEXT) -> NetworkSpec:
    """Invertible 14-device full adder; I/O devices are (A, B, Cin, Sum, Cout)."""
    net = load_network(table)
    if net.n != 14 or net.kind is not Kind.EMOA:
        raise ValueError("full-adder table must describe a 14-device EMOA network")
    return NetworkSpec(net.j, net.h, net.kind, net.update_order, name="full_adder", io=(0, 1, 2, 3, 4))


def random_symmetric(n: int, weight_range: float = 1.0, seed: int = 0) -> NetworkSpec:
    """Symmetric couplings uniform in [-weight_range, weight_range], zero bias."""
    if n < 2:
        raise ValueError("random_symmetric needs n >= 2")
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    j = np.zeros((n, n))
    j[iu] = rng.uniform(-weight_range, weight_range, size=iu[0].size)
    j = j + j.T
    return NetworkSpec(j, np.zeros(n), Kind.EMOA, name=f"random_symmetric_{n}")


# generation sizes; the first three reproduce the 8-member family tree
_GENERATIONS = {8: (2, 2, 4), 20: (2, 2, 4, 4, 8), 50: (2, 2, 4, 8, 16, 18)}


def family_tree_bn(n: int = 8, coupling: float = 1.0, seed: int = 0) -> NetworkSpec:
    """Directed genealogy Bayesian network.

    Two grandparents feed two parents (each a child of both), who feed four
    children (each a child of both parents).  Larger trees add generations in
    which every member has two distinct parents drawn, from ``seed``, out of
    the previous generation.  Edge ``parent -> child`` sets ``J[child, parent]``.
    """
    if n not in _GENERATIONS:
        raise ValueError(f"family_tree_bn supports n in {sorted(_GENERATIONS)}, got {n}")
    rng = np.random.default_rng(seed)
    sizes = _GENERATIONS[n]
    layers, start = [], 0
    for size in sizes:
        layers.append(list(range(start, start + size)))
        start += size
    j = np.zeros((n, n))
    for g in range(1, len(layers)):
        prev = layers[g - 1]
        for child in layers[g]:
            if g <= 2:
                parents = prev
            else:
                parents = sorted(rng.choice(prev, size=2, replace=False).tolist())
            for p in parents:
                j[child, p] = coupling
    return NetworkSpec(j, np.zeros(n), Kind.PGA, name=f"family_tree_bn_{n}")


def generations(net: NetworkSpec) -> list[list[int]]:
    """Longest-path layering of a PGA network (roots first)."""
    depth = {}
    for dev in net.update_order:
        parents = np.flatnonzero(net.j[dev])
        depth[dev] = 1 + max((depth[p] for p in parents), default=-1)
    out = [[] for _ in range(max(depth.values()) + 1)] if depth else []
    for dev, d in sorted(depth.items()):
        out[d].append(dev)
    return out


BUILDERS = {
    "and_gate": lambda **kw: and_gate(),
    "full_adder": lambda **kw: full_adder(),
    "random_symmetric": lambda n=50, weight_range=1.0, seed=0, **kw: random_symmetric(n, weight_range, seed),
    "family_tree_bn": lambda n=8, coupling=1.0, seed=0, **kw: family_tree_bn(n, coupling, seed),
}


def build(name: str, **params) -> NetworkSpec:
    if name not in BUILDERS:
        raise ValueError(f"unknown network {name!r}; choose from {sorted(BUILDERS)}")
    return BUILDERS[name](**params)


# --- text format --------------------------------------------------------------

def _fmt(x: float) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def save_network(net: NetworkSpec) -> str:
    lines = [f"pbitnet v1 kind={net.kind.value} n={net.n}"]
    lines += [" ".join(_fmt(v) for v in row) for row in net.j]
    lines.append(" ".join(_fmt(v) for v in net.h))
    lines.append("order: " + " ".join(str(i) for i in net.update_order))
    return "\n".join(lines) + "\n"


def _parse_floats(text: str, lineno: int, expected: int, what: str) -> list[float]:
    tokens = text.split()
    if len(tokens) != expected:
        raise NetworkFormatError(f"{what} has {len(tokens)} entries, expected {expected}", lineno)
    out, col = [], 1
    for tok in tokens:
        col = text.index(tok, col - 1) + 1
        try:
            out.append(float(tok))
        except ValueError:
            raise NetworkFormatError(f"{what}: cannot parse {tok!r} as a number", lineno, col) from None
        col += len(tok)
    return out


def load_network(text: str, name: str = "custom") -> NetworkSpec:
    """Parse the ``pbitnet v1`` text format and validate the result."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise NetworkFormatError("empty input", 1)
    head = lines[0].split()
    if head[:2] != ["pbitnet", "v1"] or len(head) != 4:
        raise NetworkFormatError("header must be 'pbitnet v1 kind=<emoa|pga> n=<N>'", 1)
    fields = dict(tok.partition("=")[::2] for tok in head[2:])
    try:
        kind = Kind(fields.get("kind"))
    except ValueError:
        raise NetworkFormatError(f"unknown kind {fields.get('kind')!r}", 1, lines[0].find("kind=") + 1) from None
    try:
        n = int(fields.get("n", ""))
    except ValueError:
        raise NetworkFormatError("n must be an integer", 1, lines[0].find("n=") + 1) from None
    if n < 0:
        raise NetworkFormatError("n must be non-negative", 1)
    if len(lines) != n + 3:
        raise NetworkFormatError(f"expected {n + 3} lines, found {len(lines)}", min(len(lines), n + 3) + 1)
    j = [_parse_floats(lines[1 + r], 2 + r, n, f"J row {r}") for r in range(n)]
    h = _parse_floats(lines[n + 1], n + 2, n, "bias row")
    order_line = lines[n + 2]
    if not order_line.startswith("order:"):
        raise NetworkFormatError("expected 'order:' line", n + 3)
    try:
        order = [int(tok) for tok in order_line[len("order:"):].split()]
    except ValueError:
        raise NetworkFormatError("order entries must be integers", n + 3, 7) from None
    if len(order) != n:
        raise NetworkFormatError(f"order has {len(order)} entries, expected {n}", n + 3, 7)
    net = NetworkSpec(np.array(j).reshape(n, n), np.array(h), kind, tuple(order), name=name)
    return check(net)


def projections(states, devices) -> set[tuple[int, ...]]:
    return {tuple(int(s[d]) for d in devices) for s in states}


def full_adder_rows() -> set[tuple[int, ...]]:
    """Valid (A, B, Cin, Sum, Cout) rows as +-1 tuples."""
    rows = set()
    for a, b, c in itertools.product((0, 1), repeat=3):
        s, co = a ^ b ^ c, int(a + b + c >= 2)
        rows.add(tuple(2 * v - 1 for v in (a, b, c, s, co)))
    return rows


def and_rows() -> set[tuple[int, ...]]:
    return {tuple(2 * v - 1 for v in (a, b, a & b)) for a, b in itertools.product((0, 1), repeat=2)}
