"""Brickwork lattice geometry and instance assembly.

The diamond lattice is laid out as a 3D brickwork: every site has two X
arms and two transverse arms, with the transverse bonds alternating
direction by site parity.  Per-site microcluster outcomes and inter-site
fusions are assembled into a renormalizable site/bond graph with bond
provenance (lattice vs diagonal), plus unheralded/heralded loss
post-processing.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from ._kernels import ATTACHED, DEAD, OUT_FAILURE, OUT_LOSS, OUT_SUCCESS, PAIR
from .fusion import FusionKind, FusionResult, GateParams, LossScope
from .microcluster import ArmAssignment, ArmSlot, default_assignment

__all__ = [
    "Dims",
    "SiteCoord",
    "LossMode",
    "ExternalLossRemedy",
    "LossSpec",
    "PercolationGraph",
    "neighbors",
    "build_instance",
    "apply_unheralded_loss",
    "apply_heralded_loss",
    "dump_instance",
]

_SLOT_CODE = {
    ArmSlot.MINUS_X: _kernels.SLOT_MX,
    ArmSlot.PLUS_X: _kernels.SLOT_PX,
    ArmSlot.T1: _kernels.SLOT_T1,
    ArmSlot.T2: _kernels.SLOT_T2,
}
_CODE_SLOT = {v: k for k, v in _SLOT_CODE.items()}

LATTICE_BOND = 0
DIAGONAL_BOND = 1


@dataclass(frozen=True)
class Dims:
    """Site counts per axis; x is the preferred/spanning axis."""

    lx: int
    ly: int
    lz: int

    def __post_init__(self):
        if min(self.lx, self.ly, self.lz) < 1:
            raise ValueError(f"all dimensions must be >= 1, got {self}")

    @property
    def n_sites(self) -> int:
        return self.lx * self.ly * self.lz

    def index(self, x: int, y: int, z: int) -> int:
        return (x * self.ly + y) * self.lz + z

    def coord(self, s: int) -> tuple[int, int, int]:
        x, rem = divmod(s, self.ly * self.lz)
        y, z = divmod(rem, self.lz)
        return x, y, z

    def in_range(self, x: int, y: int, z: int) -> bool:
        return 0 <= x < self.lx and 0 <= y < self.ly and 0 <= z < self.lz


@dataclass(frozen=True)
class SiteCoord:
    x: int
    y: int
    z: int

    @property
    def parity(self) -> int:
        return (self.x + self.y + self.z) % 2


def _slot_target(x: int, y: int, z: int, code: int) -> tuple[int, int, int]:
    parity = (x + y + z) % 2
    if code == _kernels.SLOT_MX:
        return x - 1, y, z
    if code == _kernels.SLOT_PX:
        return x + 1, y, z
    if code == _kernels.SLOT_T1:
        return (x, y + 1, z) if parity == 0 else (x, y - 1, z)
    return (x, y, z + 1) if parity == 0 else (x, y, z - 1)


def neighbors(c: SiteCoord, d: Dims) -> list[tuple[SiteCoord, ArmSlot]]:
    """In-range geometric neighbors of a site with the arm slot facing each.

    Two X neighbors always; transverse neighbors go +Y/+Z from even-parity
    sites and -Y/-Z from odd ones, producing the degree-4 bipartite
    brickwork.
    """
    if not d.in_range(c.x, c.y, c.z):
        raise ValueError(f"site {c} out of range for {d}")
    out = []
    for code in range(4):
        tx, ty, tz = _slot_target(c.x, c.y, c.z, code)
        if d.in_range(tx, ty, tz):
            out.append((SiteCoord(tx, ty, tz), _CODE_SLOT[code]))
    return out


@functools.lru_cache(maxsize=32)
def _geometry_tables(lx: int, ly: int, lz: int):
    """Static per-dims arrays: slot_in_range (N,4) and the bond table.

    Bonds are enumerated in raster order over owning sites (+X bonds owned
    by the lower-x site, transverse bonds by the even-parity site), so bond
    ids are stable and RNG draws indexed by them are order-independent.
    """
    d = Dims(lx, ly, lz)
    n = d.n_sites
    slot_in_range = np.zeros((n, 4), dtype=np.bool_)
    bond_u, bond_su, bond_v, bond_sv = [], [], [], []
    for s in range(n):
        x, y, z = d.coord(s)
        parity = (x + y + z) % 2
        for code in range(4):
            tx, ty, tz = _slot_target(x, y, z, code)
            if not d.in_range(tx, ty, tz):
                continue
            slot_in_range[s, code] = True
            owns = code == _kernels.SLOT_PX or (
                code in (_kernels.SLOT_T1, _kernels.SLOT_T2) and parity == 0
            )
            if owns:
                t = d.index(tx, ty, tz)
                # the counterpart faces us through the same slot family
                if code == _kernels.SLOT_PX:
                    tcode = _kernels.SLOT_MX
                else:
                    tcode = code
                bond_u.append(s)
                bond_su.append(code)
                bond_v.append(t)
                bond_sv.append(tcode)
    return (
        slot_in_range,
        np.asarray(bond_u, dtype=np.int64),
        np.asarray(bond_su, dtype=np.int8),
        np.asarray(bond_v, dtype=np.int64),
        np.asarray(bond_sv, dtype=np.int8),
    )


def n_geometric_bonds(d: Dims) -> int:
    return _geometry_tables(d.lx, d.ly, d.lz)[1].shape[0]


def _assignment_tables(assignment: ArmAssignment):
    side_slots = np.zeros((2, 2), dtype=np.int8)
    side_of_slot = np.zeros(4, dtype=np.int8)
    partner_slot = np.zeros(4, dtype=np.int8)
    for side, slots in enumerate((assignment.side1_slots, assignment.side2_slots)):
        a, b = (_SLOT_CODE[s] for s in slots)
        side_slots[side, 0] = a
        side_slots[side, 1] = b
        side_of_slot[a] = side_of_slot[b] = side
        partner_slot[a] = b
        partner_slot[b] = a
    return side_slots, side_of_slot, partner_slot


class LossMode(str, Enum):
    UNHERALDED = "unheralded"
    HERALDED = "heralded"


class ExternalLossRemedy(str, Enum):
    Z_CUT = "z_cut"          # both arms' center-side neighbors Z-measured
    BOND_ONLY = "bond_only"  # milder option: the bond is simply void


@dataclass(frozen=True)
class LossSpec:
    p_loss: float = 0.0
    scope: LossScope = LossScope.DATA_ONLY
    mode: LossMode = LossMode.UNHERALDED
    external_remedy: ExternalLossRemedy = ExternalLossRemedy.Z_CUT

    def __post_init__(self):
        if not 0.0 <= self.p_loss <= 1.0:
            raise ValueError(f"p_loss must be in [0, 1], got {self.p_loss}")


@dataclass
class PercolationGraph:
    """Assembled instance: surviving centers, bond list with provenance,
    and the arm-level arrays the assembly produced."""

    dims: Dims
    assignment: ArmAssignment
    center_alive: np.ndarray        # (N,) bool, post construction deaths
    arm_state: np.ndarray           # (N, 4) int8
    arm_dead: np.ndarray            # (N, 4) bool
    bond_outcome: np.ndarray        # (B,) int8 over geometric bonds
    bond_kept: np.ndarray           # (B,) bool (successful fusion, both arms live)
    bonds: list[tuple[int, int, int]] = field(default_factory=list)  # (a, b, provenance)
    removed: np.ndarray | None = None  # (N,) bool, loss-processing excisions
    spans_cache: bool | None = None

    def __post_init__(self):
        if self.removed is None:
            self.removed = np.zeros(self.dims.n_sites, dtype=np.bool_)

    @property
    def n_sites(self) -> int:
        return self.dims.n_sites

    def alive_sites(self) -> np.ndarray:
        return self.center_alive & ~self.removed

    def bond_count(self) -> int:
        return len(self.bonds)

    def copy(self) -> "PercolationGraph":
        return PercolationGraph(
            self.dims,
            self.assignment,
            self.center_alive.copy(),
            self.arm_state.copy(),
            self.arm_dead.copy(),
            self.bond_outcome.copy(),
            self.bond_kept.copy(),
            list(self.bonds),
            self.removed.copy(),
            self.spans_cache,
        )


def draw_uniforms(rng: np.random.Generator, n_sites: int, n_bonds: int, k_scope: int):
    """Canonical per-instance draw layout: one block per internal gate per
    site (k photon-loss draws then the success draw), then the same per
    geometric bond.  Fixed layout keeps sweeps couplable on a common stream."""
    u_site = rng.random((n_sites, 2 * (k_scope + 1)))
    u_bond = rng.random((n_bonds, k_scope + 1))
    return u_site, u_bond


def _run_kernel(d, gate, loss, assignment, rng, heralded_removed=None, work=None):
    n = d.n_sites
    slot_in_range, bond_u, bond_su, bond_v, bond_sv = _geometry_tables(d.lx, d.ly, d.lz)
    nb = bond_u.shape[0]
    k_scope = gate.photons_in_scope(loss.scope)
    p_loss = 0.0 if loss.mode is LossMode.HERALDED else loss.p_loss
    u_site, u_bond = draw_uniforms(rng, n, nb, k_scope)
    side_slots, side_of_slot, partner_slot = _assignment_tables(assignment)
    if heralded_removed is None:
        heralded_removed = np.zeros(n, dtype=np.bool_)
    if work is None:
        work = allocate_workspace(n, nb)
    center_alive, arm_state, arm_dead, bond_outcome, bond_kept, parent, size = work
    spans = _kernels.assemble_and_span(
        d.lx, d.ly, d.lz,
        gate.p_success, p_loss, k_scope,
        u_site, u_bond,
        bond_u, bond_su, bond_v, bond_sv,
        side_slots, partner_slot, side_of_slot, slot_in_range,
        loss.external_remedy is ExternalLossRemedy.Z_CUT,
        heralded_removed,
        center_alive, arm_state, arm_dead, bond_outcome, bond_kept,
        parent, size,
    )
    return bool(spans), work


def allocate_workspace(n_sites: int, n_bonds: int):
    return (
        np.zeros(n_sites, dtype=np.bool_),
        np.zeros((n_sites, 4), dtype=np.int8),
        np.zeros((n_sites, 4), dtype=np.bool_),
        np.zeros(n_bonds, dtype=np.int8),
        np.zeros(n_bonds, dtype=np.bool_),
        np.zeros(3 * n_sites + 2, dtype=np.int64),
        np.zeros(3 * n_sites + 2, dtype=np.int64),
    )


def instance_spans(d, gate, loss, assignment, rng, work=None) -> bool:
    """Fast path: assemble and report only whether the instance spans.

    In heralded mode the construction is loss-free and site removals are
    drawn from a jumped substream, so the p_loss = 0 point of a heralded
    sweep reproduces the loss-free ensemble run for run."""
    if assignment is None:
        assignment = default_assignment()
    heralded_removed = None
    if loss.mode is LossMode.HERALDED and loss.p_loss > 0.0:
        sub = np.random.Generator(rng.bit_generator.jumped(1))
        heralded_removed = sub.random(d.n_sites) < loss.p_loss
    spans, _ = _run_kernel(d, gate, loss, assignment, rng, heralded_removed, work)
    return spans


def build_instance(
    d: Dims,
    gate: GateParams,
    loss: LossSpec,
    assignment: ArmAssignment | None = None,
    rng: np.random.Generator | None = None,
) -> PercolationGraph:
    """Assemble a full instance: per-site microclusters, inter-site fusions,
    detached-pair bridging and loss processing.

    Heralded mode builds loss-free and then removes sites using a jumped
    substream, so construction draws are identical to the unheralded
    p_loss = 0 ensemble."""
    if assignment is None:
        assignment = default_assignment()
    if rng is None:
        raise ValueError("an explicit rng is required for reproducibility")
    heralded = loss.mode is LossMode.HERALDED and loss.p_loss > 0.0
    # capture the removal substream before construction advances the stream
    sub = np.random.Generator(rng.bit_generator.jumped(1)) if heralded else None
    spans, work = _run_kernel(d, gate, loss, assignment, rng)
    center_alive, arm_state, arm_dead, bond_outcome, bond_kept = (
        work[0].copy(), work[1].copy(), work[2].copy(), work[3].copy(), work[4].copy(),
    )
    g = PercolationGraph(
        d, assignment, center_alive, arm_state, arm_dead, bond_outcome, bond_kept
    )
    g.bonds = _extract_site_bonds(g)
    g.spans_cache = spans
    if heralded:
        g = apply_heralded_loss(g, loss.p_loss, sub)
    return g


def assemble_reference(
    d: Dims,
    gate_results: list[tuple[FusionResult, FusionResult]],
    bond_results: list[FusionResult],
    assignment: ArmAssignment | None = None,
    remedy: ExternalLossRemedy = ExternalLossRemedy.Z_CUT,
) -> PercolationGraph:
    """Readable scalar assembly from explicit gate outcomes.

    Semantics twin of the fast kernel, built from the per-site outcome
    mapping; used by forced-scenario tests and the oracle checks.
    """
    from .microcluster import site_outcome_from_gates

    if assignment is None:
        assignment = default_assignment()
    n = d.n_sites
    slot_in_range, bond_u, bond_su, bond_v, bond_sv = _geometry_tables(d.lx, d.ly, d.lz)
    if len(gate_results) != n or len(bond_results) != bond_u.shape[0]:
        raise ValueError("need one gate-result pair per site and one result per bond")
    _, side_of_slot, partner_slot = _assignment_tables(assignment)
    center_alive = np.zeros(n, dtype=np.bool_)
    arm_state = np.zeros((n, 4), dtype=np.int8)
    arm_dead = np.zeros((n, 4), dtype=np.bool_)
    for s, (r1, r2) in enumerate(gate_results):
        outcome = site_outcome_from_gates(r1, r2, assignment)
        center_alive[s] = outcome.center_alive
        for slot in ArmSlot:
            code = _SLOT_CODE[slot]
            if slot in outcome.attached_arms:
                arm_state[s, code] = ATTACHED
            elif slot in outcome.dead_arms:
                arm_state[s, code] = DEAD
                arm_dead[s, code] = True
            else:
                arm_state[s, code] = PAIR
    for s in range(n):
        for code in range(4):
            if arm_state[s, code] == PAIR and not slot_in_range[s, code]:
                arm_dead[s, code] = True
    bond_outcome = np.zeros(bond_u.shape[0], dtype=np.int8)
    for b, res in enumerate(bond_results):
        if res.kind is FusionKind.SUCCESS:
            bond_outcome[b] = OUT_SUCCESS
            continue
        bond_outcome[b] = OUT_FAILURE if res.kind is FusionKind.FAILURE else OUT_LOSS
        arm_dead[bond_u[b], bond_su[b]] = True
        arm_dead[bond_v[b], bond_sv[b]] = True
        if res.kind is FusionKind.LOSS_DETECTED and remedy is ExternalLossRemedy.Z_CUT:
            for site, slot in ((int(bond_u[b]), int(bond_su[b])),
                               (int(bond_v[b]), int(bond_sv[b]))):
                st = int(arm_state[site, slot])
                if st == ATTACHED:
                    center_alive[site] = False
                elif st == PAIR:
                    arm_dead[site, int(partner_slot[slot])] = True
    bond_kept = np.zeros(bond_u.shape[0], dtype=np.bool_)
    for b in np.flatnonzero(bond_outcome == OUT_SUCCESS):
        live = True
        for site, slot in ((int(bond_u[b]), int(bond_su[b])),
                           (int(bond_v[b]), int(bond_sv[b]))):
            st = int(arm_state[site, slot])
            if st == ATTACHED:
                live = live and bool(center_alive[site]) and not arm_dead[site, slot]
            elif st == PAIR:
                live = (live and not arm_dead[site, slot]
                        and not arm_dead[site, int(partner_slot[slot])])
            else:
                live = False
        bond_kept[b] = live
    g = PercolationGraph(
        d, assignment, center_alive, arm_state, arm_dead, bond_outcome, bond_kept
    )
    g.bonds = _extract_site_bonds(g)
    return g


def _extract_site_bonds(g: PercolationGraph) -> list[tuple[int, int, int]]:
    """Site-level bond list: direct lattice bonds plus diagonal bonds from
    detached-pair chains (pairs whose both arms fused to live counterparts
    bridge the two remote sites)."""
    d = g.dims
    n = d.n_sites
    _, bond_u, bond_su, bond_v, bond_sv = _geometry_tables(d.lx, d.ly, d.lz)
    _, side_of_slot, _ = _assignment_tables(g.assignment)
    bonds: list[tuple[int, int, int]] = []
    # union-find over pair nodes to resolve chains
    parent: dict[int, int] = {}
    centers_on: dict[int, set[int]] = {}

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj

    for b in np.flatnonzero(g.bond_kept):
        u, su, v, sv = int(bond_u[b]), int(bond_su[b]), int(bond_v[b]), int(bond_sv[b])
        stu, stv = int(g.arm_state[u, su]), int(g.arm_state[v, sv])
        if stu == ATTACHED and stv == ATTACHED:
            bonds.append((u, v, LATTICE_BOND))
            continue
        nodes = []
        for site, slot, st in ((u, su, stu), (v, sv, stv)):
            if st == PAIR:
                pid = 2 * site + int(side_of_slot[slot])
                if pid not in parent:
                    parent[pid] = pid
                    centers_on[pid] = set()
                nodes.append(("p", pid))
            else:
                nodes.append(("c", site))
        (ka, ia), (kb, ib) = nodes
        if ka == "p" and kb == "p":
            union(ia, ib)
        elif ka == "p":
            centers_on[find(ia)].add(ib)
        else:
            centers_on[find(ib)].add(ia)
    # merge center sets up to roots
    by_root: dict[int, set[int]] = {}
    for pid in parent:
        root = find(pid)
        by_root.setdefault(root, set()).update(centers_on.get(pid, ()))
    for root, centers in by_root.items():
        ordered = sorted(centers)
        for i, a in enumerate(ordered):
            for bsite in ordered[i + 1:]:
                bonds.append((a, bsite, DIAGONAL_BOND))
    return bonds


def apply_heralded_loss(
    g: PercolationGraph, p_loss: float, rng: np.random.Generator
) -> PercolationGraph:
    """Heralded loss: every final-cluster site is independently removed
    with p_loss; only the site and its incident bonds go (no neighbor
    penalty).  The input graph must be built loss-free."""
    if not 0.0 <= p_loss <= 1.0:
        raise ValueError(f"p_loss must be in [0, 1], got {p_loss}")
    out = g.copy()
    removed = rng.random(g.n_sites) < p_loss
    out.removed = out.removed | removed
    out.bonds = [
        (a, b, prov) for a, b, prov in out.bonds if not (removed[a] or removed[b])
    ]
    out.spans_cache = None
    return out


def apply_unheralded_loss(g: PercolationGraph, lost) -> PercolationGraph:
    """Post-processing Z-cut remedy for losses tagged with their graph
    location.

    ``lost`` holds ("center", site) and ("arm", site, slot) records.  A
    lost center takes its bonded partner centers with it; a lost attached
    arm takes its own center; a lost detached-pair arm kills its partner
    (voiding any bridge through the pair).
    """
    out = g.copy()
    removed = out.removed.copy()
    arm_dead = out.arm_dead.copy()
    _, side_of_slot, partner_slot = _assignment_tables(g.assignment)
    dead_pairs: set[tuple[int, int]] = set()
    for rec in lost:
        if rec[0] == "center":
            s = rec[1]
            removed[s] = True
            for a, b, _prov in out.bonds:
                if a == s:
                    removed[b] = True
                elif b == s:
                    removed[a] = True
        elif rec[0] == "arm":
            _, s, slot = rec
            code = _SLOT_CODE[slot] if isinstance(slot, ArmSlot) else int(slot)
            st = int(out.arm_state[s, code])
            arm_dead[s, code] = True
            if st == ATTACHED:
                removed[s] = True
            elif st == PAIR:
                arm_dead[s, int(partner_slot[code])] = True
                dead_pairs.add((s, int(side_of_slot[code])))
        else:
            raise ValueError(f"unknown loss record {rec!r}")
    bonds = [
        (a, b, prov) for a, b, prov in out.bonds if not (removed[a] or removed[b])
    ]
    if dead_pairs:
        # bridges through a killed pair are void: rebuild from arm arrays
        tmp = PercolationGraph(
            out.dims, out.assignment, out.center_alive & ~removed, out.arm_state,
            arm_dead, out.bond_outcome, _recheck_kept(out, arm_dead, removed),
        )
        bonds = [
            (a, b, prov) for a, b, prov in _extract_site_bonds(tmp)
            if not (removed[a] or removed[b])
        ]
    out.removed = removed
    out.arm_dead = arm_dead
    out.bonds = bonds
    out.spans_cache = None
    return out


def _recheck_kept(g: PercolationGraph, arm_dead, removed) -> np.ndarray:
    d = g.dims
    _, bond_u, bond_su, bond_v, bond_sv = _geometry_tables(d.lx, d.ly, d.lz)
    _, _, partner_slot = _assignment_tables(g.assignment)
    center_ok = g.center_alive & ~removed
    kept = np.zeros_like(g.bond_kept)
    for b in np.flatnonzero(g.bond_outcome == OUT_SUCCESS):
        live = True
        for site, slot in ((int(bond_u[b]), int(bond_su[b])), (int(bond_v[b]), int(bond_sv[b]))):
            st = int(g.arm_state[site, slot])
            if st == ATTACHED:
                live = live and bool(center_ok[site]) and not arm_dead[site, slot]
            elif st == PAIR:
                live = live and not arm_dead[site, slot] and not arm_dead[site, int(partner_slot[slot])]
            else:
                live = False
        kept[b] = live
    return kept


_CLASS_LABELS = {0: "full_star", 1: "one_detached", 2: "two_detached"}


def site_class_label(g: PercolationGraph, s: int) -> str:
    if g.removed is not None and g.removed[s]:
        return "removed"
    if not g.center_alive[s]:
        return "dead"
    states = g.arm_state[s]
    n_pair_sides = len({int(_assignment_tables(g.assignment)[1][c]) for c in range(4) if states[c] == PAIR})
    if (states == ATTACHED).all():
        return "full_star"
    if (states == DEAD).any():
        return "degraded"
    return _CLASS_LABELS.get(n_pair_sides, "degraded")


def dump_instance(g: PercolationGraph) -> str:
    """Plain-text dump: header, one site record and one bond record per line."""
    d = g.dims
    lines = [f"dims {d.lx} {d.ly} {d.lz}"]
    for s in range(d.n_sites):
        x, y, z = d.coord(s)
        lines.append(f"site {x} {y} {z} {site_class_label(g, s)}")
    prov_name = {LATTICE_BOND: "lattice", DIAGONAL_BOND: "diagonal"}
    for a, b, prov in g.bonds:
        xa, ya, za = d.coord(a)
        xb, yb, zb = d.coord(b)
        lines.append(f"bond {xa} {ya} {za} {xb} {yb} {zb} {prov_name[prov]}")
    return "\n".join(lines) + "\n"
