"""Exact graph-state rewrite engine.

Small-scale oracle for cluster-fragment evolution: Pauli measurements,
local complementation and fusion projections on graphs with local-Clifford
bookkeeping.  Connectivity is the observable the rest of the toolkit
consumes; local-Clifford tags are tracked so that small fragments can be
cross-checked against dense state vectors, but no percolation logic ever
reads them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

__all__ = [
    "LocalClifford",
    "FusionBasis",
    "FusionMode",
    "GraphState",
    "new_ghz",
    "local_complement",
    "measure_pauli",
    "fuse",
    "connected_component",
    "to_text",
    "from_text",
]

# Pauli encoding: 0=I, 1=X, 2=Y, 3=Z.
_PAULI_NAMES = "IXYZ"

# i^k phase table for single-qubit Pauli products: _MUL[p][q] = (k, p*q).
_MUL = {
    (0, 0): (0, 0), (0, 1): (0, 1), (0, 2): (0, 2), (0, 3): (0, 3),
    (1, 0): (0, 1), (1, 1): (0, 0), (1, 2): (1, 3), (1, 3): (3, 2),
    (2, 0): (0, 2), (2, 1): (3, 3), (2, 2): (0, 0), (2, 3): (1, 1),
    (3, 0): (0, 3), (3, 1): (1, 2), (3, 2): (3, 1), (3, 3): (0, 0),
}


class LocalClifford:
    """Single-qubit Clifford, stored by its conjugation action on X and Z.

    ``sx * px`` is the image of X under C . C^dagger, likewise ``sz * pz``
    for Z.  There are 6 * 4 = 24 such actions, one per Clifford modulo
    global phase.
    """

    __slots__ = ("sx", "px", "sz", "pz")

    def __init__(self, sx: int, px: int, sz: int, pz: int):
        if px == pz or px == 0 or pz == 0:
            raise ValueError("images of X and Z must be distinct non-identity Paulis")
        self.sx, self.px, self.sz, self.pz = sx, px, sz, pz

    def __eq__(self, other) -> bool:
        return (self.sx, self.px, self.sz, self.pz) == (other.sx, other.px, other.sz, other.pz)

    def __hash__(self) -> int:
        return hash((self.sx, self.px, self.sz, self.pz))

    def __repr__(self) -> str:
        return f"LocalClifford({self.name()!r})"

    def is_identity(self) -> bool:
        return (self.sx, self.px, self.sz, self.pz) == (1, 1, 1, 3)

    def act(self, sign: int, pauli: int) -> tuple[int, int]:
        """Image of ``sign * pauli`` under C . C^dagger."""
        if pauli == 0:
            return sign, 0
        if pauli == 1:
            return sign * self.sx, self.px
        if pauli == 3:
            return sign * self.sz, self.pz
        # Y = i X Z
        k, r = _MUL[(self.px, self.pz)]
        # i^(1+k) is +-1 because px != pz guarantees k odd.
        phase = 1 if (1 + k) % 4 == 0 else -1
        return sign * self.sx * self.sz * phase, r

    def compose(self, other: "LocalClifford") -> "LocalClifford":
        """C_self after C_other (i.e. the operator self @ other)."""
        sx, px = self.act(*other.act(1, 1))
        sz, pz = self.act(*other.act(1, 3))
        return LocalClifford(sx, px, sz, pz)

    def inverse(self) -> "LocalClifford":
        sx, px, sz, pz = self.sx, self.px, self.sz, self.pz
        img = {px: (sx, 1), pz: (sz, 3)}
        ky, y_img = _MUL[(px, pz)]
        phase = 1 if (1 + ky) % 4 == 0 else -1
        img[y_img] = (sx * sz * phase, 2)
        rx_s, rx_p = img[1]
        rz_s, rz_p = img[3]
        return LocalClifford(rx_s, rx_p, rz_s, rz_p)

    def conj_pauli(self, pauli: int) -> tuple[int, int]:
        """C^dagger P C as (sign, pauli): the effective measurement axis."""
        return self.inverse().act(1, pauli)

    def name(self) -> str:
        """Canonical shortest word in {H, S} (identity is 'I')."""
        return _CANONICAL_NAMES[(self.sx, self.px, self.sz, self.pz)]

    @staticmethod
    def from_name(word: str) -> "LocalClifford":
        """Fold a word over {I, H, S, X, Y, Z} (applied left to right)."""
        c = IDENTITY
        for ch in word:
            if ch == "I":
                continue
            try:
                c = _LETTER_OPS[ch].compose(c)
            except KeyError:
                raise ValueError(f"unknown Clifford letter {ch!r}") from None
        return c


IDENTITY = LocalClifford(1, 1, 1, 3)
H_OP = LocalClifford(1, 3, 1, 1)           # X<->Z
S_OP = LocalClifford(1, 2, 1, 3)           # X->Y,  Z->Z   (sqrt(-iZ) action)
SDG_OP = LocalClifford(-1, 2, 1, 3)        # X->-Y, Z->Z   (sqrt(+iZ) action)
X_OP = LocalClifford(1, 1, -1, 3)
Y_OP = LocalClifford(-1, 1, -1, 3)
Z_OP = LocalClifford(-1, 1, 1, 3)
SQRT_PIY = LocalClifford(1, 3, -1, 1)      # sqrt(+iY): X->Z,  Z->-X
SQRT_MIY = LocalClifford(-1, 3, 1, 1)      # sqrt(-iY): X->-Z, Z->X

_LETTER_OPS = {"H": H_OP, "S": S_OP, "X": X_OP, "Y": Y_OP, "Z": Z_OP}


def _enumerate_cliffords() -> dict[tuple[int, int, int, int], str]:
    """BFS over {H, S} products; assigns each of the 24 actions a shortest word."""
    names = {(1, 1, 1, 3): "I"}
    frontier = [(IDENTITY, "")]
    while frontier:
        nxt = []
        for c, word in frontier:
            for letter in "HS":
                c2 = _LETTER_OPS[letter].compose(c)
                key = (c2.sx, c2.px, c2.sz, c2.pz)
                if key not in names:
                    names[key] = word + letter
                    nxt.append((c2, word + letter))
        frontier = nxt
    assert len(names) == 24
    return names


_CANONICAL_NAMES = _enumerate_cliffords()


class FusionMode(str, Enum):
    STANDARD = "standard"
    ROTATED = "rotated"


@dataclass(frozen=True)
class FusionBasis:
    """Fusion gate flavour: success is always the bipartite neighborhood
    join; ``failure_axes`` are the single-qubit measurement axes applied to
    (v1, v2) when the gate fails.

    The rotated flavour is the one used inside microclusters: its failure
    deletes the kept-fragment qubit cleanly (Z) while X on the counterpart
    turns that GHZ's two leaves into a detached Bell pair.  The standard
    flavour joins already-built sites; its failure consumes both arm qubits
    without collateral damage (Z, Z).
    """

    mode: FusionMode = FusionMode.STANDARD
    failure_axes: tuple[str, str] = ("Z", "Z")

    def __post_init__(self):
        for ax in self.failure_axes:
            if ax not in ("X", "Y", "Z"):
                raise ValueError(f"invalid failure axis {ax!r}")

    @staticmethod
    def rotated() -> "FusionBasis":
        return FusionBasis(FusionMode.ROTATED, ("Z", "X"))

    @staticmethod
    def standard() -> "FusionBasis":
        return FusionBasis(FusionMode.STANDARD, ("Z", "Z"))


_AXIS_CODE = {"X": 1, "Y": 2, "Z": 3}


@dataclass
class GraphState:
    """Undirected simple graph over qubit ids with local-Clifford tags.

    Represents the state (tensor of vcops) |G>.  Identity tags are not
    stored.  Instances are plain values: operations return fresh states.
    """

    adj: dict[int, set[int]] = field(default_factory=dict)
    vcops: dict[int, LocalClifford] = field(default_factory=dict)

    @property
    def vertices(self) -> set[int]:
        return set(self.adj)

    @property
    def edges(self) -> set[frozenset[int]]:
        return {frozenset((u, v)) for u, nbrs in self.adj.items() for v in nbrs if u < v}

    def copy(self) -> "GraphState":
        return GraphState({v: set(n) for v, n in self.adj.items()}, dict(self.vcops))

    def add_vertex(self, v: int) -> None:
        self.adj.setdefault(v, set())

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError("self-loops are not allowed")
        self.add_vertex(u)
        self.add_vertex(v)
        self.adj[u].add(v)
        self.adj[v].add(u)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj.get(u, ())

    def neighbors(self, v: int) -> set[int]:
        return set(self.adj[v])

    def vcop(self, v: int) -> LocalClifford:
        return self.vcops.get(v, IDENTITY)

    def _require(self, v: int) -> None:
        if v not in self.adj:
            raise KeyError(f"vertex {v} not in state")

    def _toggle_edge(self, u: int, v: int) -> None:
        if v in self.adj[u]:
            self.adj[u].discard(v)
            self.adj[v].discard(u)
        else:
            self.adj[u].add(v)
            self.adj[v].add(u)

    def _delete_vertex(self, v: int) -> None:
        for w in self.adj.pop(v):
            self.adj[w].discard(v)
        self.vcops.pop(v, None)

    def _merge_tag(self, v: int, op: LocalClifford) -> None:
        new = self.vcop(v).compose(op)
        if new.is_identity():
            self.vcops.pop(v, None)
        else:
            self.vcops[v] = new


def new_ghz(n: int, start: int = 0) -> GraphState:
    """n-photon GHZ state as a star graph: center ``start``, leaves after.

    The GHZ computational-basis form is the star graph state with H applied
    to every leaf; those H's are recorded as local-Clifford tags.
    """
    if n < 1:
        raise ValueError("GHZ size must be at least 1")
    g = GraphState()
    g.add_vertex(start)
    for i in range(1, n):
        g.add_edge(start, start + i)
        g.vcops[start + i] = H_OP
    return g


def local_complement(state: GraphState, v: int) -> GraphState:
    """Complement the edge set inside N(v).  Pure graph transformation
    (the measurement rules account for the compensating local Cliffords)."""
    state._require(v)
    out = state.copy()
    _lc_inplace(out, v)
    return out


def _lc_inplace(g: GraphState, v: int) -> None:
    nbrs = sorted(g.adj[v])
    for i, a in enumerate(nbrs):
        for b in nbrs[i + 1:]:
            g._toggle_edge(a, b)


def measure_pauli(state: GraphState, v: int, axis: str) -> GraphState:
    """Measure a Pauli on qubit v and remove it from the state.

    The physical axis is conjugated through v's local-Clifford tag, the
    standard graph rewrite for the effective axis is applied, and the
    outcome byproducts are merged into the neighbors' tags.  The returned
    state is the +1 physical-outcome branch (the realizable branch when
    the outcome is deterministic).
    """
    state._require(v)
    code = _AXIS_CODE.get(axis)
    if code is None:
        raise ValueError(f"axis must be X, Y or Z, got {axis!r}")
    g = state.copy()
    sign, eff = g.vcop(v).conj_pauli(code)
    _measure_graph_frame(g, v, eff, sign)
    return g


def _measure_graph_frame(g: GraphState, v: int, eff: int, sign: int) -> None:
    """Apply the graph-frame rewrite for measuring ``sign*eff`` on v with
    physical outcome +1 (graph-frame outcome ``sign``)."""
    nbrs = sorted(g.adj[v])
    if eff == 3:  # Z: delete v; minus branch flips Z byproducts onto N(v)
        if sign < 0:
            for b in nbrs:
                g._merge_tag(b, Z_OP)
        g._delete_vertex(v)
    elif eff == 2:  # Y: locally complement at v, then delete
        _lc_inplace(g, v)
        op = S_OP if sign > 0 else SDG_OP
        for b in nbrs:
            g._merge_tag(b, op)
        g._delete_vertex(v)
    else:  # X
        if not nbrs:
            # isolated |+>: X outcome is deterministic; no byproducts
            g._delete_vertex(v)
            return
        b0 = nbrs[0]
        n_v = set(nbrs)
        n_b0 = g.neighbors(b0)
        _lc_inplace(g, b0)
        _lc_inplace(g, v)
        _lc_inplace(g, b0)
        if sign > 0:
            g._merge_tag(b0, SQRT_PIY)
            for b in sorted(n_v - n_b0 - {b0}):
                g._merge_tag(b, Z_OP)
        else:
            g._merge_tag(b0, SQRT_MIY)
            for b in sorted(n_b0 - n_v - {v}):
                g._merge_tag(b, Z_OP)
        g._delete_vertex(v)


def fuse(
    state: GraphState,
    v1: int,
    v2: int,
    outcome: str,
    basis: FusionBasis | None = None,
) -> GraphState:
    """Apply one fusion gate to qubits (v1, v2); both are always consumed.

    Success toggles every pair in N(v1) x N(v2) (complete-bipartite join of
    the former neighborhoods) and deletes both qubits.  Failure measures v1
    and v2 in the basis' failure axes.  The gate is defined in the graph
    frame; tags carried by v1/v2 are consumed with them.
    """
    state._require(v1)
    state._require(v2)
    if v1 == v2:
        raise ValueError("fusion needs two distinct qubits")
    if state.has_edge(v1, v2):
        raise ValueError(f"cannot fuse adjacent qubits {v1}, {v2}")
    if basis is None:
        basis = FusionBasis.standard()
    if outcome not in ("success", "failure"):
        raise ValueError(f"outcome must be 'success' or 'failure', got {outcome!r}")
    g = state.copy()
    if outcome == "success":
        for a in sorted(g.adj[v1]):
            for b in sorted(g.adj[v2]):
                if a != b:
                    g._toggle_edge(a, b)
        g._delete_vertex(v1)
        g._delete_vertex(v2)
    else:
        ax1, ax2 = basis.failure_axes
        _measure_graph_frame(g, v1, _AXIS_CODE[ax1], 1)
        _measure_graph_frame(g, v2, _AXIS_CODE[ax2], 1)
    return g


def connected_component(state: GraphState, v: int) -> set[int]:
    """Exact connected component of v in the current edge set."""
    state._require(v)
    seen = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        for w in state.adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def component_partition(state: GraphState) -> list[frozenset[int]]:
    """All connected components, sorted by smallest member."""
    out = []
    todo = set(state.adj)
    while todo:
        v = min(todo)
        comp = connected_component(state, v)
        todo -= comp
        out.append(frozenset(comp))
    return sorted(out, key=min)


def to_text(state: GraphState) -> str:
    """Line format: ``v <id>`` / ``e <id> <id>`` / ``lc <id> <tag>``."""
    lines = [f"v {v}" for v in sorted(state.adj)]
    lines += [f"e {min(e)} {max(e)}" for e in sorted(state.edges, key=sorted)]
    lines += [f"lc {v} {c.name()}" for v, c in sorted(state.vcops.items())]
    return "\n".join(lines) + "\n"


def from_text(text: str) -> GraphState:
    g = GraphState()
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "v" and len(parts) == 2:
                g.add_vertex(int(parts[1]))
            elif parts[0] == "e" and len(parts) == 3:
                g.add_edge(int(parts[1]), int(parts[2]))
            elif parts[0] == "lc" and len(parts) == 3:
                v = int(parts[1])
                if v not in g.adj:
                    raise ValueError(f"lc tag for unknown vertex {v}")
                c = LocalClifford.from_name(parts[2])
                if not c.is_identity():
                    g.vcops[v] = c
            else:
                raise ValueError(f"unrecognized record {line!r}")
        except (ValueError, KeyError) as exc:
            raise ValueError(f"line {ln}: {exc}") from None
    return g
