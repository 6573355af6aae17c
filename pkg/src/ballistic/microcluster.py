"""Per-site microcluster construction.

Each lattice site is a five-qubit star built from three 3-GHZ states: a
central GHZ whose two leaves are fused (rotated gates) with the centers of
two side GHZs.  Success on both gates yields the star; a failed gate turns
that side's two arm photons into a detached Bell pair; a detected loss
triggers the Z-cut remedy on the lost photon's neighbors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .fusion import (
    FusionKind,
    FusionResult,
    GateParams,
    LossScope,
    sample_fusion,
)

__all__ = [
    "ArmSlot",
    "ArmAssignment",
    "SiteOutcome",
    "default_assignment",
    "all_assignments",
    "site_outcome_from_gates",
    "build_site",
    "outcome_distribution",
    "outcome_class",
]


class ArmSlot(str, Enum):
    MINUS_X = "-X"
    PLUS_X = "+X"
    T1 = "T1"
    T2 = "T2"


ALL_SLOTS = (ArmSlot.MINUS_X, ArmSlot.PLUS_X, ArmSlot.T1, ArmSlot.T2)


@dataclass(frozen=True)
class ArmAssignment:
    """Which two slots each side GHZ feeds; the two pairs partition the 4 slots."""

    side1_slots: tuple[ArmSlot, ArmSlot]
    side2_slots: tuple[ArmSlot, ArmSlot]

    def __post_init__(self):
        slots = (*self.side1_slots, *self.side2_slots)
        if sorted(s.value for s in slots) != sorted(s.value for s in ALL_SLOTS):
            raise ValueError(f"assignment must partition the 4 arm slots, got {slots}")

    def side_of(self, slot: ArmSlot) -> int:
        return 1 if slot in self.side1_slots else 2


def default_assignment() -> ArmAssignment:
    """One X arm and one transverse arm per side, so a single internal
    failure never removes both X arms."""
    return ArmAssignment((ArmSlot.MINUS_X, ArmSlot.T1), (ArmSlot.PLUS_X, ArmSlot.T2))


def all_assignments() -> list[ArmAssignment]:
    """The 3 distinct pairings of the 4 slots into two sides."""
    first = ArmSlot.MINUS_X
    rest = [s for s in ALL_SLOTS if s is not first]
    out = []
    for partner in rest:
        side1 = (first, partner)
        side2 = tuple(s for s in rest if s is not partner)
        out.append(ArmAssignment(side1, side2))
    return out


@dataclass(frozen=True)
class SiteOutcome:
    """Arm structure of one built site.

    ``attached_arms``, the slots of ``detached_pairs`` and ``dead_arms``
    partition the 4 slots.  A dead center cannot hold attached arms.
    """

    center_alive: bool
    attached_arms: frozenset[ArmSlot]
    detached_pairs: frozenset[frozenset[ArmSlot]]
    dead_arms: frozenset[ArmSlot]

    def __post_init__(self):
        pair_slots = set(itertools.chain.from_iterable(self.detached_pairs))
        claimed = set(self.attached_arms) | pair_slots | set(self.dead_arms)
        total = len(self.attached_arms) + len(pair_slots) + len(self.dead_arms)
        if claimed != set(ALL_SLOTS) or total != 4:
            raise ValueError("attached, paired and dead slots must partition the 4 slots")
        if not self.center_alive and self.attached_arms:
            raise ValueError("a dead center cannot have attached arms")

    @property
    def full_success(self) -> bool:
        return self.center_alive and len(self.attached_arms) == 4


def site_outcome_from_gates(
    r1: FusionResult, r2: FusionResult, assignment: ArmAssignment
) -> SiteOutcome:
    """Outcome mapping for the two internal rotated fusions.

    Gate i fuses a central-GHZ leaf (data1) with side-i's GHZ center
    (data2).  Losing data1 Z-cuts the center (site dead); losing data2 (or
    an ancilla, which aborts the gate the same way) Z-cuts side-i's arms.
    Failure measures Z on the central leaf and X on the side center,
    leaving side-i's arms as a detached Bell pair.
    """
    center_alive = not (
        (r1.kind is FusionKind.LOSS_DETECTED and "data1" in r1.lost_photons)
        or (r2.kind is FusionKind.LOSS_DETECTED and "data1" in r2.lost_photons)
    )
    attached: set[ArmSlot] = set()
    pairs: set[frozenset[ArmSlot]] = set()
    dead: set[ArmSlot] = set()
    for result, side_slots in ((r1, assignment.side1_slots), (r2, assignment.side2_slots)):
        if result.kind is FusionKind.SUCCESS:
            if center_alive:
                attached.update(side_slots)
            else:
                dead.update(side_slots)
        elif result.kind is FusionKind.FAILURE:
            pairs.add(frozenset(side_slots))
        else:
            dead.update(side_slots)
    return SiteOutcome(center_alive, frozenset(attached), frozenset(pairs), frozenset(dead))


def build_site(
    gate: GateParams,
    p_loss: float,
    assignment: ArmAssignment,
    rng: np.random.Generator,
    loss_scope: LossScope = LossScope.DATA_ONLY,
) -> SiteOutcome:
    """Sample the two internal fusions (side 1 first) and map the outcomes."""
    r1 = sample_fusion(gate, p_loss, loss_scope, rng)
    r2 = sample_fusion(gate, p_loss, loss_scope, rng)
    return site_outcome_from_gates(r1, r2, assignment)


FULL_STAR = "full_star"
ONE_DETACHED = "one_detached"
TWO_DETACHED = "two_detached"
DEGRADED = "degraded"


def outcome_class(outcome: SiteOutcome) -> str:
    """Loss-free class labels; anything touched by loss is 'degraded'."""
    if outcome.full_success:
        return FULL_STAR
    if not outcome.dead_arms and outcome.center_alive:
        return ONE_DETACHED if len(outcome.detached_pairs) == 1 else TWO_DETACHED
    return DEGRADED


def outcome_distribution(gate: GateParams, p_loss: float = 0.0) -> dict[str, float]:
    """Loss-free analytic class probabilities: p^2, 2p(1-p), (1-p)^2."""
    if p_loss != 0.0:
        raise ValueError("analytic enumeration is loss-free; use Monte Carlo for p_loss > 0")
    p = gate.p_success
    return {
        FULL_STAR: p * p,
        ONE_DETACHED: 2.0 * p * (1.0 - p),
        TWO_DETACHED: (1.0 - p) ** 2,
    }
