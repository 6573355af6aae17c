"""Rule-vs-oracle equivalence checks.

Builds explicit GHZ fragments for one or two lattice sites, executes the
construction protocol (internal rotated fusions, one inter-site fusion,
loss remedies) on the graph rewrite engine while replaying every primitive
on the independent stabilizer tableau, and compares the resulting component
structure against the fast model's predictions.  This is the exhaustive
check behind the ``oracle-check`` command.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .fusion import FusionKind, FusionResult
from .graphstate import (
    FusionBasis,
    GraphState,
    component_partition,
    connected_component,
    fuse,
    measure_pauli,
    to_text,
)
from .lattice import (
    Dims,
    ExternalLossRemedy,
    assemble_reference,
    LATTICE_BOND,
)
from .microcluster import (
    ArmAssignment,
    ArmSlot,
    SiteOutcome,
    default_assignment,
    site_outcome_from_gates,
)
from .tableau import StabilizerTableau

__all__ = [
    "SiteFragment",
    "FragmentRun",
    "check_single_site",
    "check_two_site",
    "run_all_checks",
    "CheckReport",
]

SITE_STRIDE = 10  # qubit-id stride between site fragments


@dataclass(frozen=True)
class SiteFragment:
    """Qubit-id layout of one site's three GHZ states."""

    offset: int
    assignment: ArmAssignment

    @property
    def center(self) -> int:
        return self.offset

    def central_leaf(self, gate: int) -> int:
        return self.offset + 1 + gate  # gate 0 -> +1, gate 1 -> +2

    def side_center(self, side: int) -> int:
        return self.offset + 3 + 3 * side

    def side_arms(self, side: int) -> tuple[int, int]:
        base = self.offset + 4 + 3 * side
        return (base, base + 1)

    def arm_qubit(self, slot: ArmSlot) -> int:
        for side, slots in enumerate(
            (self.assignment.side1_slots, self.assignment.side2_slots)
        ):
            if slot in slots:
                return self.side_arms(side)[slots.index(slot)]
        raise ValueError(f"slot {slot} not in assignment")

    def add_to(self, g: GraphState) -> None:
        g.add_edge(self.center, self.central_leaf(0))
        g.add_edge(self.center, self.central_leaf(1))
        for side in range(2):
            sc = self.side_center(side)
            for arm in self.side_arms(side):
                g.add_edge(sc, arm)


class FragmentRun:
    """Executes model operations on the rewrite engine while recording the
    primitive measurement/fusion script for independent tableau replay."""

    def __init__(self, initial: GraphState):
        self.initial = initial.copy()
        self.state = initial.copy()
        self.script: list[tuple] = []

    def _measure_z(self, q: int) -> None:
        self.state = measure_pauli(self.state, q, "Z")
        self.script.append(("measure", q, "Z"))

    def exists(self, q: int) -> bool:
        return q in self.state.adj

    def internal_gate(self, frag: SiteFragment, gate: int, result: FusionResult) -> None:
        """One rotated fusion: central leaf (data1) x side-GHZ center (data2)."""
        q1 = frag.central_leaf(gate)
        q2 = frag.side_center(gate)
        basis = FusionBasis.rotated()
        if result.kind is FusionKind.SUCCESS:
            self.state = fuse(self.state, q1, q2, "success", basis)
            self.script.append(("fuse", q1, q2))
        elif result.kind is FusionKind.FAILURE:
            self.state = fuse(self.state, q1, q2, "failure", basis)
            self.script.append(("measure", q1, basis.failure_axes[0]))
            self.script.append(("measure", q2, basis.failure_axes[1]))
        else:
            lost = [q for role, q in (("data1", q1), ("data2", q2))
                    if role in result.lost_photons]
            for q in lost:
                for w in sorted(self.state.neighbors(q)):
                    self._measure_z(w)
                self._measure_z(q)
            for q in (q1, q2):
                if self.exists(q):
                    self._measure_z(q)

    def external_gate(
        self,
        qa: int,
        qb: int,
        result: FusionResult,
        remedy: ExternalLossRemedy = ExternalLossRemedy.Z_CUT,
    ) -> None:
        """One standard inter-site fusion between two facing arm qubits."""
        basis = FusionBasis.standard()
        if result.kind is FusionKind.SUCCESS:
            if self.exists(qa) and self.exists(qb):
                self.state = fuse(self.state, qa, qb, "success", basis)
                self.script.append(("fuse", qa, qb))
            else:
                for q in (qa, qb):
                    if self.exists(q):
                        self._measure_z(q)
        elif result.kind is FusionKind.FAILURE:
            for q, ax in ((qa, basis.failure_axes[0]), (qb, basis.failure_axes[1])):
                if self.exists(q):
                    self.state = measure_pauli(self.state, q, ax)
                    self.script.append(("measure", q, ax))
        else:
            if remedy is ExternalLossRemedy.Z_CUT:
                for q in (qa, qb):
                    if self.exists(q):
                        for w in sorted(self.state.neighbors(q)):
                            self._measure_z(w)
            for q in (qa, qb):
                if self.exists(q):
                    self._measure_z(q)

    def replay_tableau(self) -> StabilizerTableau:
        tab = StabilizerTableau.from_graph_state(self.initial)
        for op in self.script:
            if op[0] == "fuse":
                tab.fuse(op[1], op[2], "success")
            else:
                tab.measure(op[1], op[2])
        return tab


@dataclass
class CheckReport:
    label: str
    ok: bool
    detail: str = ""
    fragment: str = ""


def _engine_vs_tableau(run: FragmentRun) -> tuple[bool, str]:
    eng = component_partition(run.state)
    tab = run.replay_tableau()
    orc = tab.component_partition()
    eng_qubits = set(run.state.adj)
    orc_qubits = set(tab.qubits)
    if eng_qubits != orc_qubits:
        return False, f"qubit sets differ: engine {sorted(eng_qubits)} vs tableau {sorted(orc_qubits)}"
    if eng != orc:
        return False, f"partitions differ: engine {eng} vs tableau {orc}"
    return True, ""


def _site_structure_ok(
    run: FragmentRun, frag: SiteFragment, outcome: SiteOutcome
) -> tuple[bool, str]:
    """Does the predicted SiteOutcome match the fragment's graph structure?"""
    c = frag.center
    if outcome.center_alive != run.exists(c):
        return False, f"center presence mismatch: predicted {outcome.center_alive}"
    for slot in ArmSlot:
        q = frag.arm_qubit(slot)
        if slot in outcome.attached_arms:
            if not (run.exists(q) and run.state.has_edge(c, q)):
                return False, f"slot {slot.value} predicted attached, not bonded to center"
        elif slot in outcome.dead_arms:
            if run.exists(q) and run.state.adj[q]:
                return False, f"slot {slot.value} predicted dead, still bonded"
    for pair in outcome.detached_pairs:
        qs = [frag.arm_qubit(s) for s in pair]
        if not (run.exists(qs[0]) and run.exists(qs[1]) and run.state.has_edge(*qs)):
            return False, f"predicted detached pair {sorted(s.value for s in pair)} missing"
        comp_has_center = run.exists(c) and qs[0] in connected_component(run.state, c)
        if comp_has_center:
            return False, f"detached pair {sorted(s.value for s in pair)} bonded to center"
    return True, ""


_LOSSFREE = (
    FusionResult(FusionKind.SUCCESS),
    FusionResult(FusionKind.FAILURE),
)
_SINGLE_LOSSES = (
    FusionResult(FusionKind.LOSS_DETECTED, ("data1",)),
    FusionResult(FusionKind.LOSS_DETECTED, ("data2",)),
    FusionResult(FusionKind.LOSS_DETECTED, ("ancilla_1",)),
)


def check_single_site(
    r1: FusionResult,
    r2: FusionResult,
    assignment: ArmAssignment | None = None,
    keep_fragment: bool = False,
) -> CheckReport:
    if assignment is None:
        assignment = default_assignment()
    frag = SiteFragment(0, assignment)
    g = GraphState()
    frag.add_to(g)
    run = FragmentRun(g)
    run.internal_gate(frag, 0, r1)
    run.internal_gate(frag, 1, r2)
    label = f"site[{_rlabel(r1)},{_rlabel(r2)}]"
    ok, detail = _engine_vs_tableau(run)
    if ok:
        outcome = site_outcome_from_gates(r1, r2, assignment)
        ok, detail = _site_structure_ok(run, frag, outcome)
    return CheckReport(label, ok, detail, to_text(run.state) if keep_fragment else "")


def check_two_site(
    gates_a: tuple[FusionResult, FusionResult],
    gates_b: tuple[FusionResult, FusionResult],
    bond_result: FusionResult,
    assignment: ArmAssignment | None = None,
    remedy: ExternalLossRemedy = ExternalLossRemedy.Z_CUT,
    keep_fragment: bool = False,
) -> CheckReport:
    """Two sites joined by the single x-bond of a 2x1x1 lattice."""
    if assignment is None:
        assignment = default_assignment()
    frag_a = SiteFragment(0, assignment)
    frag_b = SiteFragment(SITE_STRIDE, assignment)
    g = GraphState()
    frag_a.add_to(g)
    frag_b.add_to(g)
    run = FragmentRun(g)
    run.internal_gate(frag_a, 0, gates_a[0])
    run.internal_gate(frag_a, 1, gates_a[1])
    run.internal_gate(frag_b, 0, gates_b[0])
    run.internal_gate(frag_b, 1, gates_b[1])
    qa = frag_a.arm_qubit(ArmSlot.PLUS_X)
    qb = frag_b.arm_qubit(ArmSlot.MINUS_X)
    run.external_gate(qa, qb, bond_result, remedy)
    label = (
        f"two_site[A=({_rlabel(gates_a[0])},{_rlabel(gates_a[1])}),"
        f"B=({_rlabel(gates_b[0])},{_rlabel(gates_b[1])}),bond={_rlabel(bond_result)}]"
    )
    ok, detail = _engine_vs_tableau(run)
    if ok:
        ref = assemble_reference(
            Dims(2, 1, 1), [gates_a, gates_b], [bond_result], assignment, remedy
        )
        predicted_bond = any(
            {a, b} == {0, 1} and prov == LATTICE_BOND for a, b, prov in ref.bonds
        )
        ca, cb = frag_a.center, frag_b.center
        connected = (
            run.exists(ca)
            and run.exists(cb)
            and cb in connected_component(run.state, ca)
        )
        if predicted_bond != connected:
            ok = False
            detail = f"bond prediction {predicted_bond} vs fragment connectivity {connected}"
        for s, frag in ((0, frag_a), (1, frag_b)):
            alive = bool(ref.center_alive[s]) and not bool(ref.removed[s])
            if alive != run.exists(frag.center):
                ok = False
                detail = f"site {s} center-alive prediction {alive} vs fragment {run.exists(frag.center)}"
                break
    return CheckReport(label, ok, detail, to_text(run.state) if keep_fragment else "")


def _rlabel(r: FusionResult) -> str:
    if r.kind is FusionKind.SUCCESS:
        return "S"
    if r.kind is FusionKind.FAILURE:
        return "F"
    return "L(" + ",".join(r.lost_photons) + ")"


def run_all_checks(
    assignment: ArmAssignment | None = None, keep_fragments: bool = False
) -> list[CheckReport]:
    """The exhaustive suite: loss-free internal combinations, every
    single-photon-loss position in a site, and all two-site inter-fusion
    outcome combinations."""
    reports = []
    for r1, r2 in itertools.product(_LOSSFREE, repeat=2):
        reports.append(check_single_site(r1, r2, assignment, keep_fragments))
    for gate_idx, lossy in itertools.product(range(2), _SINGLE_LOSSES):
        for other in _LOSSFREE:
            rs = (lossy, other) if gate_idx == 0 else (other, lossy)
            reports.append(check_single_site(*rs, assignment, keep_fragments))
    bond_cases = _LOSSFREE + (
        FusionResult(FusionKind.LOSS_DETECTED, ("data1",)),
        FusionResult(FusionKind.LOSS_DETECTED, ("data2",)),
    )
    for ga in itertools.product(_LOSSFREE, repeat=2):
        for gb in itertools.product(_LOSSFREE, repeat=2):
            for bond in bond_cases:
                reports.append(
                    check_two_site(ga, gb, bond, assignment, keep_fragment=keep_fragments)
                )
    return reports
