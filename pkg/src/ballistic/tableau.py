"""Stabilizer-tableau oracle.

Independent Clifford-only simulator used to validate the graph rewrite
engine: binary symplectic generators with sign bits, Pauli measurements,
Bell-type fusion projections and canonical graph extraction.  Exact and
deliberately simple; meant for fragments of tens of qubits, not for the
lattice driver.
"""

from __future__ import annotations

import numpy as np

from .graphstate import GraphState

__all__ = ["StabilizerTableau"]


def _pauli_phase(x1, z1, x2, z2) -> int:
    """Exponent of i from multiplying single-qubit Paulis X^x1 Z^z1 by
    X^x2 Z^z2 on the left (Aaronson-Gottesman g function)."""
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:  # Y
        return int(z2) - int(x2)
    if x1 == 1:  # X
        return int(z2) * (2 * int(x2) - 1)
    return int(x2) * (1 - 2 * int(z2))  # Z


class StabilizerTableau:
    """n commuting, independent Pauli generators with signs (no destabilizers).

    Rows are (x | z) bit vectors; ``signs[i]`` is 0 for +, 1 for -.
    Qubits carry external ids so fragments keep their labels as qubits are
    consumed.
    """

    def __init__(self, qubits):
        self.qubits = list(qubits)
        n = len(self.qubits)
        self.x = np.zeros((n, n), dtype=np.uint8)
        self.z = np.eye(n, dtype=np.uint8)
        self.signs = np.zeros(n, dtype=np.uint8)

    @property
    def n(self) -> int:
        return len(self.qubits)

    # -- construction -------------------------------------------------

    @classmethod
    def from_graph_state(cls, state: GraphState) -> "StabilizerTableau":
        """Tableau of (tensor of vcops)|G> for a GraphState fragment."""
        tab = cls(sorted(state.adj))
        idx = {q: i for i, q in enumerate(tab.qubits)}
        n = tab.n
        tab.x = np.eye(n, dtype=np.uint8)
        tab.z = np.zeros((n, n), dtype=np.uint8)
        for q in tab.qubits:
            i = idx[q]
            for w in state.adj[q]:
                tab.z[i, idx[w]] = 1
        for q, c in state.vcops.items():
            tab.apply_local(q, c)
        return tab

    def apply_local(self, qubit: int, c) -> None:
        """Conjugate all generators by a single-qubit Clifford on ``qubit``."""
        col = self._col(qubit)
        for i in range(self.n):
            xi, zi = int(self.x[i, col]), int(self.z[i, col])
            if xi == 0 and zi == 0:
                continue
            pauli_in = 2 if (xi and zi) else (1 if xi else 3)
            sign, pauli = c.act(1, pauli_in)
            self.x[i, col] = 1 if pauli in (1, 2) else 0
            self.z[i, col] = 1 if pauli in (2, 3) else 0
            if sign < 0:
                self.signs[i] ^= 1

    # -- internals ----------------------------------------------------

    def _col(self, qubit: int) -> int:
        try:
            return self.qubits.index(qubit)
        except ValueError:
            raise KeyError(f"qubit {qubit} not in tableau") from None

    def _row_mul(self, i: int, j: int) -> None:
        """generators[i] *= generators[j] (phase-correct)."""
        phase = 2 * int(self.signs[i]) + 2 * int(self.signs[j])
        for k in range(self.n):
            phase += _pauli_phase(self.x[j, k], self.z[j, k], self.x[i, k], self.z[i, k])
        self.x[i] ^= self.x[j]
        self.z[i] ^= self.z[j]
        assert phase % 2 == 0, "non-Hermitian product"
        self.signs[i] = (phase % 4) // 2

    def _anticommute_rows(self, px: np.ndarray, pz: np.ndarray) -> np.ndarray:
        sym = (self.x & pz[None, :]).sum(axis=1) + (self.z & px[None, :]).sum(axis=1)
        return np.flatnonzero(sym % 2)

    def _measure_pauli_string(self, px: np.ndarray, pz: np.ndarray, want_sign: int) -> int:
        """Project onto the ``want_sign`` eigenspace of the Pauli (px|pz);
        when the outcome is deterministic the realized sign is returned
        instead.  Random outcomes always realize ``want_sign``."""
        anti = self._anticommute_rows(px, pz)
        if anti.size:
            pivot = int(anti[0])
            for j in anti[1:]:
                self._row_mul(int(j), pivot)
            self.x[pivot] = px.copy()
            self.z[pivot] = pz.copy()
            self.signs[pivot] = 0 if want_sign > 0 else 1
            return want_sign
        return self._deterministic_sign(px, pz)

    def _deterministic_sign(self, px: np.ndarray, pz: np.ndarray) -> int:
        """Sign with which the commuting Pauli (px|pz) is stabilized."""
        n = self.n
        mwork = np.concatenate([self.x, self.z], axis=1).astype(np.uint8)
        target = np.concatenate([px, pz]).astype(np.uint8)
        combo = [1 << i for i in range(n)]  # original-row membership masks
        members = 0
        avail = list(range(n))
        for col in range(2 * n):
            pivot = next((r for r in avail if mwork[r, col]), None)
            if pivot is not None:
                avail.remove(pivot)
                for r in range(n):
                    if r != pivot and mwork[r, col]:
                        mwork[r] ^= mwork[pivot]
                        combo[r] ^= combo[pivot]
                if target[col]:
                    target ^= mwork[pivot]
                    members ^= combo[pivot]
            elif target[col]:
                raise AssertionError("Pauli not in stabilizer group")
        assert not target.any()
        acc_x = np.zeros(n, dtype=np.uint8)
        acc_z = np.zeros(n, dtype=np.uint8)
        phase = 0
        for g in range(n):
            if not (members >> g) & 1:
                continue
            phase += 2 * int(self.signs[g])
            for k in range(n):
                phase += _pauli_phase(self.x[g, k], self.z[g, k], acc_x[k], acc_z[k])
            acc_x ^= self.x[g]
            acc_z ^= self.z[g]
        assert np.array_equal(acc_x, px) and np.array_equal(acc_z, pz)
        assert phase % 2 == 0
        return 1 if phase % 4 == 0 else -1

    def _drop_qubits(self, drop: list[int]) -> None:
        """Remove qubits that jointly factor out of the state (their
        stabilizer marginal is full on the dropped set).

        Pivot generators for the dropped bit-columns are isolated by GF(2)
        elimination, other rows are cleared on those columns, the pivots'
        residual support outside the dropped set is eliminated against the
        remaining generators, and pivot rows plus columns are removed.
        """
        n = self.n
        cols = [self._col(q) for q in drop]
        bitcols = set(cols) | {c + n for c in cols}

        def getbit(row: int, bc: int) -> int:
            return int(self.x[row, bc]) if bc < n else int(self.z[row, bc - n])

        # Isolate pivot generators for the dropped bit-columns.
        pivots: list[int] = []
        for bc in sorted(bitcols):
            pivot = next(
                (r for r in range(n) if r not in pivots and getbit(r, bc)), None
            )
            if pivot is None:
                continue
            pivots.append(pivot)
            for r in range(n):
                if r != pivot and getbit(r, bc):
                    self._row_mul(r, pivot)
        # Non-pivot rows are now clear of the dropped columns and generate
        # the kept-qubit marginal; RREF them over the kept columns, clearing
        # the pivots' residual support along the way.
        keep_rows = [r for r in range(n) if r not in pivots]
        avail = list(keep_rows)
        for bc in range(2 * n):
            if bc in bitcols:
                continue
            hr = next((r for r in avail if getbit(r, bc)), None)
            if hr is None:
                continue
            avail.remove(hr)
            for r in range(n):
                if r != hr and getbit(r, bc):
                    self._row_mul(r, hr)
        for p in pivots:
            bad = [bc for bc in range(2 * n) if bc not in bitcols and getbit(p, bc)]
            assert not bad, "dropped qubits still entangled with the rest"
        keep_cols = [c for c in range(n) if c not in cols]
        self.x = self.x[np.ix_(keep_rows, keep_cols)]
        self.z = self.z[np.ix_(keep_rows, keep_cols)]
        self.signs = self.signs[keep_rows]
        self.qubits = [q for i, q in enumerate(self.qubits) if i not in cols]

    # -- public operations ---------------------------------------------

    def measure(self, qubit: int, axis: str, remove: bool = True) -> int:
        """Measure X/Y/Z on a qubit (+1 branch when random); optionally
        remove the measured qubit from the tableau."""
        col = self._col(qubit)
        px = np.zeros(self.n, dtype=np.uint8)
        pz = np.zeros(self.n, dtype=np.uint8)
        if axis == "X":
            px[col] = 1
        elif axis == "Z":
            pz[col] = 1
        elif axis == "Y":
            px[col] = 1
            pz[col] = 1
        else:
            raise ValueError(f"axis must be X, Y or Z, got {axis!r}")
        sign = self._measure_pauli_string(px, pz, +1)
        if remove:
            self._drop_qubits([qubit])
        return sign

    def fuse(self, v1: int, v2: int, outcome: str, basis=None) -> None:
        """Fusion projection: success measures X1X2 then Z1Z2 (a Bell
        measurement) and discards both qubits; failure measures each qubit
        in the basis' failure axes."""
        if outcome == "success":
            c1, c2 = self._col(v1), self._col(v2)
            px = np.zeros(self.n, dtype=np.uint8)
            pz = np.zeros(self.n, dtype=np.uint8)
            px[c1] = px[c2] = 1
            self._measure_pauli_string(px, pz, +1)
            px = np.zeros(self.n, dtype=np.uint8)
            pz = np.zeros(self.n, dtype=np.uint8)
            pz[c1] = pz[c2] = 1
            self._measure_pauli_string(px, pz, +1)
            self._drop_qubits([v1, v2])
        elif outcome == "failure":
            from .graphstate import FusionBasis

            if basis is None:
                basis = FusionBasis.standard()
            self.measure(v1, basis.failure_axes[0])
            self.measure(v2, basis.failure_axes[1])
        else:
            raise ValueError(f"outcome must be 'success' or 'failure', got {outcome!r}")

    # -- canonical extraction -------------------------------------------

    def to_graph(self) -> tuple[dict[int, set[int]], dict[int, str]]:
        """Canonical graph extraction: (adjacency over qubit ids, per-qubit
        local-op hints).  The extracted graph is one local-Clifford
        representative of the state; its connected components are exactly
        the state's product factors."""
        n = self.n
        x = self.x.copy()
        z = self.z.copy()
        hints: dict[int, str] = {}

        def pivot_cols(mat: np.ndarray) -> set[int]:
            m = mat.copy()
            r = 0
            cols = set()
            for c in range(m.shape[1]):
                rows = [i for i in range(r, m.shape[0]) if m[i, c]]
                if not rows:
                    continue
                m[[r, rows[0]]] = m[[rows[0], r]]
                for i in range(m.shape[0]):
                    if i != r and m[i, c]:
                        m[i] ^= m[r]
                cols.add(c)
                r += 1
            return cols

        for _ in range(n + 1):
            pcols = pivot_cols(x)
            if len(pcols) == n:
                break
            swapped = False
            for c in range(n):
                if c in pcols:
                    continue
                trial = x.copy()
                trial[:, c] = z[:, c]
                if len(pivot_cols(trial)) > len(pcols):
                    x[:, c], z[:, c] = z[:, c].copy(), x[:, c].copy()
                    hints[self.qubits[c]] = hints.get(self.qubits[c], "") + "H"
                    swapped = True
                    break
            assert swapped, "X block cannot be completed (tableau rank-deficient?)"

        aug = np.concatenate([x, z], axis=1)
        for c in range(n):
            rows = [i for i in range(c, n) if aug[i, c]]
            assert rows, "X block not invertible after completion"
            if rows[0] != c:
                aug[[c, rows[0]]] = aug[[rows[0], c]]
            for i in range(n):
                if i != c and aug[i, c]:
                    aug[i] ^= aug[c]
        gamma = aug[:, n:]
        for c in range(n):
            if gamma[c, c]:
                gamma[c, c] = 0
                hints[self.qubits[c]] = hints.get(self.qubits[c], "") + "S"
        assert np.array_equal(gamma, gamma.T), "extracted adjacency not symmetric"
        adjacency: dict[int, set[int]] = {q: set() for q in self.qubits}
        for i in range(n):
            for j in range(i + 1, n):
                if gamma[i, j]:
                    adjacency[self.qubits[i]].add(self.qubits[j])
                    adjacency[self.qubits[j]].add(self.qubits[i])
        return adjacency, hints

    def component_partition(self) -> list[frozenset[int]]:
        """Product-factor partition of the qubits (local-Clifford invariant)."""
        adjacency, _ = self.to_graph()
        out = []
        todo = set(self.qubits)
        while todo:
            v = min(todo)
            comp = {v}
            stack = [v]
            while stack:
                u = stack.pop()
                for w in adjacency[u]:
                    if w not in comp:
                        comp.add(w)
                        stack.append(w)
            todo -= comp
            out.append(frozenset(comp))
        return sorted(out, key=min)

    def stabilizer_strings(self) -> list[str]:
        """Signed Pauli strings, for debugging and dense cross-checks."""
        out = []
        for i in range(self.n):
            s = "-" if self.signs[i] else "+"
            body = "".join(
                "IXZY"[int(self.x[i, k]) + 2 * int(self.z[i, k])] for k in range(self.n)
            )
            out.append(s + body)
        return out
