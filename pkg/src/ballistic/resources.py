"""Closed-form resource accounting and scheme comparison.

GHZ/fusion counts for a renormalized computation, multiplexed Bell-pair
costs of near-deterministic GHZ sources, the GHZ-generation success
probability, and the Bell-pair comparison against an externally digitized
competitor dataset.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

__all__ = [
    "ComputationShape",
    "SourceSpec",
    "LatticeResources",
    "lattice_resources",
    "multiplex_repeats",
    "bell_pairs_per_ghz",
    "ghz_success_prob",
    "scheme_comparison",
    "max_L_at_half",
    "ELEMENTS_PER_FUSION",
    "PAPER_COMPAT_REPEATS",
]

# optical elements per boosted fusion gate: (polarization rotators, PBS)
ELEMENTS_PER_FUSION = (15, 4)

# Published repeat counts for the multiplexed 3-GHZ / 4-GHZ sources.  The
# target-confidence formula gives 20 and 49; the published arithmetic uses
# 21 and 51, so both are kept and comparisons default to the published ones
# (keeping the headline 42 and 153 Bell-pair figures intact).
PAPER_COMPAT_REPEATS = {3: 21, 4: 51}


@dataclass(frozen=True)
class ComputationShape:
    """n logical qubits, depth k, renormalized-block linear size L (sites)."""

    n: int
    k: int
    L: int

    def __post_init__(self):
        if min(self.n, self.k, self.L) < 1:
            raise ValueError("n, k and L must all be >= 1")


@dataclass(frozen=True)
class LatticeResources:
    renormalized_qubits: int
    sites: int
    ghz_states: int
    fusions: int
    elements_per_fusion: tuple[int, int]


def lattice_resources(shape: ComputationShape) -> LatticeResources:
    """Exact counts: sites = n*k*L^3, three 3-GHZ states and four fusions
    per site."""
    nk = shape.n * shape.k
    sites = nk * shape.L**3
    return LatticeResources(
        renormalized_qubits=nk,
        sites=sites,
        ghz_states=3 * sites,
        fusions=4 * sites,
        elements_per_fusion=ELEMENTS_PER_FUSION,
    )


@dataclass(frozen=True)
class SourceSpec:
    """Multiplexed probabilistic GHZ source."""

    ghz_size: int = 3
    bell_pairs_per_attempt: int = 2
    p_attempt: float = 0.5
    target_confidence: float = 0.999999

    def __post_init__(self):
        if self.ghz_size not in (3, 4):
            raise ValueError("ghz_size must be 3 or 4")
        if not 0.0 < self.p_attempt <= 1.0:
            raise ValueError("p_attempt must be in (0, 1]")
        if not 0.0 < self.target_confidence < 1.0:
            raise ValueError("target_confidence must be in (0, 1)")

    @staticmethod
    def three_ghz() -> "SourceSpec":
        return SourceSpec(3, 2, 0.5)

    @staticmethod
    def four_ghz() -> "SourceSpec":
        return SourceSpec(4, 3, 0.25)


def multiplex_repeats(spec: SourceSpec, mode: str = "formula") -> int:
    """Attempts until 1 - (1-p)^t reaches the target confidence.

    ``paper_compat`` returns the published constants (21 / 51) used in the
    headline Bell-pair figures."""
    if mode == "paper_compat":
        return PAPER_COMPAT_REPEATS[spec.ghz_size]
    if mode != "formula":
        raise ValueError(f"mode must be 'formula' or 'paper_compat', got {mode!r}")
    if spec.p_attempt == 1.0:
        return 1
    miss = 1.0 - spec.target_confidence
    t = math.ceil(math.log(miss) / math.log(1.0 - spec.p_attempt))
    # guard against boundary rounding in the float log ratio
    while (1.0 - spec.p_attempt) ** t > miss:
        t += 1
    while t > 1 and (1.0 - spec.p_attempt) ** (t - 1) <= miss:
        t -= 1
    return t


def bell_pairs_per_ghz(spec: SourceSpec, mode: str = "formula") -> int:
    """Bell pairs consumed per near-deterministic GHZ state."""
    return spec.bell_pairs_per_attempt * multiplex_repeats(spec, mode)


def ghz_success_prob(n: int) -> Fraction:
    """Best known linear-optical n-GHZ build success from Bell pairs:
    (1/2)^floor((n-1)/2) * (3/4)^ceil((n-1)/2)."""
    if n < 2:
        raise ValueError("GHZ needs at least 2 photons")
    half = Fraction(1, 2) ** ((n - 1) // 2)
    three_quarters = Fraction(3, 4) ** (-(-(n - 1) // 2))
    return half * three_quarters


@dataclass(frozen=True)
class ComparisonRow:
    L: int
    k_ours: int
    bell_ours: int
    k_theirs: int
    bell_theirs: int
    ratio: float


def scheme_comparison(
    our_points: list[tuple[int, int]],
    external_csv: str | Path,
    mode: str = "paper_compat",
) -> list[ComparisonRow]:
    """Bell-pair comparison per renormalized lattice size L.

    ``our_points`` holds (L, k) rows for this scheme; the competitor's
    (L, k) rows come only from an externally digitized CSV, never from
    built-in numbers.  Totals assume an L x L renormalized lattice of k^3
    blocks: ours uses three 3-GHZ states per site, theirs one 4-GHZ.
    """
    path = Path(external_csv)
    if not path.exists():
        raise FileNotFoundError(f"competitor data file missing: {path}")
    theirs: dict[int, int] = {}
    with path.open(newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() in ("l", "#"):
                continue
            if len(row) < 2:
                raise ValueError(f"malformed competitor row: {row!r}")
            theirs[int(row[0])] = int(row[1])
    if not theirs:
        raise ValueError(f"competitor data file is empty: {path}")
    bell3 = bell_pairs_per_ghz(SourceSpec.three_ghz(), mode)
    bell4 = bell_pairs_per_ghz(SourceSpec.four_ghz(), mode)
    out = []
    for L, k_ours in our_points:
        if L not in theirs:
            continue
        k_theirs = theirs[L]
        ours_total = bell3 * 3 * (L * L * k_ours**3)
        theirs_total = bell4 * 1 * (L * L * k_theirs**3)
        out.append(
            ComparisonRow(
                L=L,
                k_ours=k_ours,
                bell_ours=ours_total,
                k_theirs=k_theirs,
                bell_theirs=theirs_total,
                ratio=theirs_total / ours_total,
            )
        )
    return out


def comparison_csv(rows: list[ComparisonRow]) -> str:
    lines = ["L,k_ours,bell_ours,k_theirs,bell_theirs,ratio"]
    for r in rows:
        lines.append(
            f"{r.L},{r.k_ours},{r.bell_ours},{r.k_theirs},{r.bell_theirs},{r.ratio:.6f}"
        )
    return "\n".join(lines) + "\n"


def max_L_at_half(
    k: int,
    base_cfg,
    n_runs: int,
    seed: int,
    L_cap: int = 32,
    workers: int = 1,
) -> int:
    """Largest renormalized lattice size L with spanning probability >= 1/2.

    Instances are (k*L, k*L, k) slabs of k^3 blocks spanning along x,
    searched by bisection over L (capped at ``L_cap``)."""
    from .lattice import Dims
    from .percolation import estimate_pi

    if k < 2:
        raise ValueError("block size must be at least 2")

    def pi_at(L: int) -> float:
        cfg = replace(base_cfg, dims=Dims(k * L, k * L, k))
        return estimate_pi(cfg, n_runs, seed, stream=L, workers=workers).pi_hat

    if pi_at(2) < 0.5:
        return 1
    lo, hi = 2, 4
    while hi <= L_cap and pi_at(hi) >= 0.5:
        lo, hi = hi, hi * 2
    if hi > L_cap:
        hi = L_cap + 1
        if lo >= L_cap:
            return L_cap
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pi_at(mid) >= 0.5:
            lo = mid
        else:
            hi = mid
    return lo
