"""Dense state-vector oracle, capped at 14 qubits.

Ground truth for deriving and checking the graph rewrite rules on small
fragments.  States are full complex vectors; qubits are addressed by the
same external ids the GraphState fragments use.
"""

from __future__ import annotations

import numpy as np

from .graphstate import GraphState, LocalClifford, H_OP, S_OP, IDENTITY

MAX_QUBITS = 14

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _clifford_matrices() -> dict[tuple[int, int, int, int], np.ndarray]:
    mats = {(IDENTITY.sx, IDENTITY.px, IDENTITY.sz, IDENTITY.pz): np.eye(2, dtype=complex)}
    frontier = [(IDENTITY, np.eye(2, dtype=complex))]
    while frontier:
        nxt = []
        for c, m in frontier:
            for op, g in ((H_OP, _H), (S_OP, _S)):
                c2 = op.compose(c)
                key = (c2.sx, c2.px, c2.sz, c2.pz)
                if key not in mats:
                    m2 = g @ m
                    mats[key] = m2
                    nxt.append((c2, m2))
        frontier = nxt
    assert len(mats) == 24
    return mats


_CLIFFORD_MATS = _clifford_matrices()


def clifford_matrix(c: LocalClifford) -> np.ndarray:
    """A concrete unitary with c's conjugation action (fixed phase choice)."""
    return _CLIFFORD_MATS[(c.sx, c.px, c.sz, c.pz)]


class DenseState:
    """State vector over an ordered list of externally-labelled qubits."""

    def __init__(self, qubits, vec: np.ndarray):
        self.qubits = list(qubits)
        self.vec = vec

    @classmethod
    def from_graph_state(cls, state: GraphState) -> "DenseState":
        qubits = sorted(state.adj)
        n = len(qubits)
        if n > MAX_QUBITS:
            raise ValueError(f"dense oracle capped at {MAX_QUBITS} qubits, got {n}")
        idx = {q: i for i, q in enumerate(qubits)}
        vec = np.full(2**n, 2 ** (-n / 2), dtype=complex)
        # CZ for each edge: flip sign where both bits are 1.
        indices = np.arange(2**n)
        for e in state.edges:
            u, v = sorted(e)
            bu = (indices >> (n - 1 - idx[u])) & 1
            bv = (indices >> (n - 1 - idx[v])) & 1
            vec = np.where((bu & bv).astype(bool), -vec, vec)
        out = cls(qubits, vec)
        for q, c in state.vcops.items():
            out.apply_1q(q, clifford_matrix(c))
        return out

    def _axis(self, qubit: int) -> int:
        return self.qubits.index(qubit)

    def apply_1q(self, qubit: int, mat: np.ndarray) -> None:
        n = len(self.qubits)
        ax = self._axis(qubit)
        t = self.vec.reshape([2] * n)
        t = np.tensordot(mat, t, axes=([1], [ax]))
        self.vec = np.moveaxis(t, 0, ax).reshape(-1)

    def _pauli_action(self, ops: dict[int, str]) -> np.ndarray:
        out = self.vec
        n = len(self.qubits)
        t = out.reshape([2] * n)
        for q, axname in ops.items():
            ax = self._axis(q)
            t = np.tensordot(_PAULI[axname], t, axes=([1], [ax]))
            t = np.moveaxis(t, 0, ax)
        return t.reshape(-1)

    def project_pauli(self, ops: dict[int, str], sign: int) -> float:
        """Project onto the ``sign`` eigenspace of a Pauli product;
        returns the branch probability (state left unnormalized-safe:
        normalized when the probability is nonzero)."""
        pv = self._pauli_action(ops)
        proj = 0.5 * (self.vec + sign * pv)
        prob = float(np.vdot(proj, proj).real)
        if prob > 1e-12:
            self.vec = proj / np.sqrt(prob)
        return prob

    def measure_and_remove(self, qubit: int, axisname: str, prefer_sign: int = 1) -> int:
        """Project a single-qubit Pauli (preferred branch, else the other)
        and factor the measured qubit out of the state."""
        sign = prefer_sign
        prob = self.project_pauli({qubit: axisname}, sign)
        if prob <= 1e-12:
            sign = -prefer_sign
            prob = self.project_pauli({qubit: axisname}, sign)
            assert prob > 1e-12
        eigvec = {
            ("X", 1): np.array([1, 1]) / np.sqrt(2),
            ("X", -1): np.array([1, -1]) / np.sqrt(2),
            ("Y", 1): np.array([1, 1j]) / np.sqrt(2),
            ("Y", -1): np.array([1, -1j]) / np.sqrt(2),
            ("Z", 1): np.array([1, 0]),
            ("Z", -1): np.array([0, 1]),
        }[(axisname, sign)].astype(complex)
        self._contract(qubit, eigvec)
        return sign

    def fuse_success(self, a: int, b: int) -> None:
        """Bell projection (XX=+1, ZZ=+1) on (a, b), then factor both out."""
        p1 = self.project_pauli({a: "X", b: "X"}, 1)
        p2 = self.project_pauli({a: "Z", b: "Z"}, 1)
        assert p1 > 1e-12 and p2 > 1e-12, "fusion success branch has zero amplitude"
        bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        n = len(self.qubits)
        axa, axb = self._axis(a), self._axis(b)
        t = self.vec.reshape([2] * n)
        t = np.moveaxis(t, (axa, axb), (0, 1)).reshape(4, -1)
        self.vec = (bell.conj() @ t).reshape(-1)
        self.qubits = [q for q in self.qubits if q not in (a, b)]
        norm = np.linalg.norm(self.vec)
        assert norm > 1e-12
        self.vec = self.vec / norm

    def _contract(self, qubit: int, single: np.ndarray) -> None:
        n = len(self.qubits)
        ax = self._axis(qubit)
        t = self.vec.reshape([2] * n)
        t = np.tensordot(single.conj(), t, axes=([0], [ax]))
        self.vec = t.reshape(-1)
        self.qubits.remove(qubit)
        norm = np.linalg.norm(self.vec)
        assert norm > 1e-12
        self.vec = self.vec / norm

    def overlap(self, other: "DenseState") -> float:
        """|<self|other>| after aligning qubit order."""
        assert sorted(self.qubits) == sorted(other.qubits)
        n = len(self.qubits)
        t = other.vec.reshape([2] * n)
        if n:
            # move other's axis j (qubit other.qubits[j]) to self's position
            dest = [self.qubits.index(q) for q in other.qubits]
            t = np.moveaxis(t, range(n), dest)
        aligned = t.reshape(-1)
        return float(abs(np.vdot(self.vec, aligned)))
