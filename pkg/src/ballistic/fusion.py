"""Stochastic model of a single boosted Type-II fusion gate.

Success / failure / loss-detected sampling with ancilla accounting.  The
boosted gate reaches 75% success using either a Bell-pair ancilla (2 extra
photons) or four single photons; every photon entering the gate is
measured, so any loss is detected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .graphstate import FusionBasis

__all__ = [
    "Scheme",
    "LossScope",
    "GateParams",
    "FusionKind",
    "FusionResult",
    "sample_fusion",
    "effective_success_prob",
    "DATA_ROLES",
]

DEFAULT_SUCCESS_PROB = 0.75

DATA_ROLES = ("data1", "data2")


class Scheme(str, Enum):
    BELL_ANCILLA = "bell_ancilla"
    FOUR_SINGLES = "four_singles"


class LossScope(str, Enum):
    DATA_ONLY = "data_only"
    DATA_AND_ANCILLA = "data_and_ancilla"


_ANCILLA_COUNT = {Scheme.BELL_ANCILLA: 2, Scheme.FOUR_SINGLES: 4}


@dataclass(frozen=True)
class GateParams:
    """Boosted fusion gate parameters.

    ``ancilla_photons`` is fixed by the scheme: 2 for the Bell-pair
    implementation, 4 for the single-photon one.
    """

    p_success: float = DEFAULT_SUCCESS_PROB
    scheme: Scheme = Scheme.BELL_ANCILLA
    failure_basis: FusionBasis = field(default_factory=FusionBasis.standard)

    def __post_init__(self):
        if not 0.0 <= self.p_success <= 1.0:
            raise ValueError(f"p_success must be in [0, 1], got {self.p_success}")

    @property
    def ancilla_photons(self) -> int:
        return _ANCILLA_COUNT[Scheme(self.scheme)]

    def photons_in_scope(self, loss_scope: LossScope) -> int:
        n = len(DATA_ROLES)
        if LossScope(loss_scope) is LossScope.DATA_AND_ANCILLA:
            n += self.ancilla_photons
        return n

    def roles_in_scope(self, loss_scope: LossScope) -> tuple[str, ...]:
        roles = list(DATA_ROLES)
        if LossScope(loss_scope) is LossScope.DATA_AND_ANCILLA:
            roles += [f"ancilla_{i}" for i in range(1, self.ancilla_photons + 1)]
        return tuple(roles)


class FusionKind(str, Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    LOSS_DETECTED = "loss_detected"


@dataclass(frozen=True)
class FusionResult:
    kind: FusionKind
    lost_photons: tuple[str, ...] = ()

    def __post_init__(self):
        if (self.kind is FusionKind.LOSS_DETECTED) != bool(self.lost_photons):
            raise ValueError("lost_photons must be nonempty iff kind is loss_detected")


def sample_fusion(
    params: GateParams,
    p_loss: float,
    loss_scope: LossScope,
    rng: np.random.Generator,
) -> FusionResult:
    """Sample one gate firing.

    Each in-scope photon is lost independently with ``p_loss``; any loss
    aborts the gate (all photons are measured, so losses are heralded).
    Otherwise the gate succeeds with ``p_success``.

    Consumes a fixed number of uniforms, one per in-scope photon plus one
    for the success draw, so sweeps over p or p_loss can couple on a
    common random stream.
    """
    if not 0.0 <= p_loss <= 1.0:
        raise ValueError(f"p_loss must be in [0, 1], got {p_loss}")
    roles = params.roles_in_scope(loss_scope)
    u = rng.random(len(roles) + 1)
    lost = tuple(r for r, x in zip(roles, u) if x < p_loss)
    if lost:
        return FusionResult(FusionKind.LOSS_DETECTED, lost)
    if u[-1] < params.p_success:
        return FusionResult(FusionKind.SUCCESS)
    return FusionResult(FusionKind.FAILURE)


def effective_success_prob(
    params: GateParams, p_loss: float, loss_scope: LossScope
) -> float:
    """Analytic companion to sample_fusion: p_success * (1-p_loss)^photons."""
    if not 0.0 <= p_loss <= 1.0:
        raise ValueError(f"p_loss must be in [0, 1], got {p_loss}")
    return params.p_success * (1.0 - p_loss) ** params.photons_in_scope(loss_scope)
