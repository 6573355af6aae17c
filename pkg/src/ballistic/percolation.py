"""Spanning detection, Monte Carlo driver and estimators.

Includes the crossing-point threshold extraction, channel-depth exponential
fits, loss sweeps, the renormalized-channel driver, and a plain-cubic
i.i.d. bond-dilution calibration mode that validates the estimator against
the standard simple-cubic bond threshold.
"""

from __future__ import annotations

import functools
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from . import _kernels, lattice
from .fusion import GateParams
from .lattice import Dims, LossSpec, PercolationGraph
from .microcluster import ArmAssignment, default_assignment

__all__ = [
    "ModelConfig",
    "RunStats",
    "FitResult",
    "ThresholdEstimate",
    "UnionFind",
    "spans",
    "estimate_pi",
    "find_threshold",
    "channel_sweep",
    "loss_sweep",
    "renormalized_channel",
    "wilson_interval",
    "run_generator",
]

RUN_STREAM_BITS = 34  # run index space per stream; streams separate grid points


class UnionFind:
    """Disjoint sets with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def connected(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)


def spans(g: PercolationGraph) -> bool:
    """True iff some x=0 site connects to some x=lx-1 site over the bond
    list (virtual terminals merged with the faces).  lx=1 spans by
    convention."""
    d = g.dims
    if d.lx == 1:
        return True
    n = d.n_sites
    uf = UnionFind(n + 2)
    alive = g.alive_sites()
    for a, b, _prov in g.bonds:
        if alive[a] and alive[b]:
            uf.union(a, b)
    t0, t1 = n, n + 1
    plane = d.ly * d.lz
    for s in range(plane):
        if alive[s]:
            uf.union(t0, s)
    for s in range((d.lx - 1) * plane, n):
        if alive[s]:
            uf.union(t1, s)
    return uf.connected(t0, t1)


@dataclass(frozen=True)
class ModelConfig:
    """Everything one lattice instance depends on (plus the model flavour)."""

    dims: Dims
    gate: GateParams = field(default_factory=GateParams)
    loss: LossSpec = field(default_factory=LossSpec)
    assignment: ArmAssignment = field(default_factory=default_assignment)
    model: str = "brickwork"  # or "cubic": i.i.d. bond dilution, p = gate.p_success

    def fingerprint(self) -> str:
        blob = json.dumps(
            {
                "dims": [self.dims.lx, self.dims.ly, self.dims.lz],
                "p_success": self.gate.p_success,
                "scheme": str(self.gate.scheme.value),
                "failure_axes": list(self.gate.failure_basis.failure_axes),
                "p_loss": self.loss.p_loss,
                "scope": str(self.loss.scope.value),
                "mode": str(self.loss.mode.value),
                "remedy": str(self.loss.external_remedy.value),
                "side1": [s.value for s in self.assignment.side1_slots],
                "side2": [s.value for s in self.assignment.side2_slots],
                "model": self.model,
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class RunStats:
    n_runs: int
    n_spanning: int
    ci95: tuple[float, float]
    config_fingerprint: str
    p: float
    p_loss: float
    dims: tuple[int, int, int]
    mode: str
    seed: int

    @property
    def pi_hat(self) -> float:
        return self.n_spanning / self.n_runs


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return (0.0, 1.0)
    phat = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (phat + z2 / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def run_generator(seed: int, run_index: int, stream: int = 0) -> np.random.Generator:
    """Counter-based per-run stream: Philox keyed by (seed, stream|run).

    Each run's stream depends only on (seed, stream, run_index), so results
    are independent of execution order and worker count."""
    lo = (stream << RUN_STREAM_BITS) | run_index
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, lo & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# -- cubic calibration model -----------------------------------------------


@functools.lru_cache(maxsize=32)
def _cubic_bond_table(lx: int, ly: int, lz: int):
    d = Dims(lx, ly, lz)
    bu, bv = [], []
    for s in range(d.n_sites):
        x, y, z = d.coord(s)
        for dx, dy, dz in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
            tx, ty, tz = x + dx, y + dy, z + dz
            if d.in_range(tx, ty, tz):
                bu.append(s)
                bv.append(d.index(tx, ty, tz))
    return np.asarray(bu, dtype=np.int64), np.asarray(bv, dtype=np.int64)


def _count_spanning(cfg: ModelConfig, seed: int, stream: int, start: int, stop: int) -> int:
    d = cfg.dims
    count = 0
    if cfg.model == "cubic":
        bu, bv = _cubic_bond_table(d.lx, d.ly, d.lz)
        parent = np.zeros(d.n_sites + 2, dtype=np.int64)
        size = np.zeros(d.n_sites + 2, dtype=np.int64)
        p = cfg.gate.p_success
        for i in range(start, stop):
            rng = run_generator(seed, i, stream)
            u = rng.random(bu.shape[0])
            count += _kernels.cubic_span(d.lx, d.ly, d.lz, p, u, bu, bv, parent, size)
        return count
    work = lattice.allocate_workspace(d.n_sites, lattice.n_geometric_bonds(d))
    for i in range(start, stop):
        rng = run_generator(seed, i, stream)
        count += lattice.instance_spans(d, cfg.gate, cfg.loss, cfg.assignment, rng, work)
    return count


def estimate_pi(
    cfg: ModelConfig,
    n_runs: int,
    seed: int,
    stream: int = 0,
    workers: int = 1,
) -> RunStats:
    """Monte Carlo estimate of the spanning probability.

    Per-run seeds derive from (seed, stream, run index); the spanning count
    is order-independent, so results are bit-identical for any worker
    count."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    if workers <= 1 or n_runs < 2 * workers:
        n_span = _count_spanning(cfg, seed, stream, 0, n_runs)
    else:
        chunk = (n_runs + workers - 1) // workers
        ranges = [(i, min(i + chunk, n_runs)) for i in range(0, n_runs, chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_count_spanning, cfg, seed, stream, a, b) for a, b in ranges
            ]
            n_span = sum(f.result() for f in futures)
    d = cfg.dims
    return RunStats(
        n_runs=n_runs,
        n_spanning=n_span,
        ci95=wilson_interval(n_span, n_runs),
        config_fingerprint=cfg.fingerprint(),
        p=cfg.gate.p_success,
        p_loss=cfg.loss.p_loss,
        dims=(d.lx, d.ly, d.lz),
        mode=str(cfg.loss.mode.value),
        seed=seed,
    )


# -- threshold estimation ---------------------------------------------------


class FitError(RuntimeError):
    """A requested fit cannot be performed or did not converge."""


@dataclass(frozen=True)
class ThresholdEstimate:
    p_c: float
    pairwise_crossings: tuple[tuple[int, int, float], ...]
    spread: float
    p_c_linear: float
    curves: dict[int, tuple[tuple[float, ...], tuple[float, ...]]]  # L -> (p_grid, pi)

    def __post_init__(self):
        if not 0.0 <= self.p_c <= 1.0:
            raise ValueError("p_c out of [0, 1]")


def _logistic(p, p0, w):
    return 1.0 / (1.0 + np.exp(-(p - p0) / w))


def _fit_logistic(p_grid: np.ndarray, pi: np.ndarray, n_runs: int):
    if pi.max() < 0.5 or pi.min() > 0.5:
        raise FitError(
            f"grid does not straddle the crossing: pi in [{pi.min():.3f}, {pi.max():.3f}]"
        )
    p0_guess = float(np.interp(0.5, np.maximum.accumulate(pi), p_grid))
    w_guess = max((p_grid[-1] - p_grid[0]) / 8.0, 1e-4)
    sigma = np.sqrt(np.clip(pi * (1 - pi), 1e-4, None) / n_runs)
    try:
        popt, _ = optimize.curve_fit(
            _logistic, p_grid, pi, p0=(p0_guess, w_guess), sigma=sigma, maxfev=20000
        )
    except RuntimeError as exc:
        raise FitError(f"logistic fit did not converge: {exc}") from exc
    if popt[1] <= 0:
        raise FitError("logistic fit returned non-positive width")
    return popt


def _pair_crossing(f1, f2, lo: float, hi: float) -> float:
    diff = lambda p: f1(p) - f2(p)
    grid = np.linspace(lo, hi, 200)
    vals = np.array([diff(p) for p in grid])
    sign_change = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    if sign_change.size == 0:
        raise FitError("fitted curves do not cross inside the grid")
    i = int(sign_change[0])
    return float(optimize.brentq(diff, grid[i], grid[i + 1]))


def _linear_crossing(p_grid, pi_a, pi_b) -> float | None:
    diff = np.asarray(pi_a) - np.asarray(pi_b)
    idx = np.flatnonzero(np.sign(diff[:-1]) * np.sign(diff[1:]) < 0)
    if idx.size == 0:
        return None
    i = int(idx[0])
    t = diff[i] / (diff[i] - diff[i + 1])
    return float(p_grid[i] + t * (p_grid[i + 1] - p_grid[i]))


def find_threshold(
    L_list,
    p_grid,
    n_runs: int,
    seed: int,
    base_cfg: ModelConfig | None = None,
    workers: int = 1,
    progress=None,
) -> ThresholdEstimate:
    """Crossing-point threshold: fit a logistic to each L's spanning curve
    and average the pairwise intersections.  A raw linear-interpolation
    crossing is reported alongside as a fallback estimator."""
    L_list = list(L_list)
    p_grid = np.asarray(sorted(p_grid), dtype=float)
    if len(L_list) < 2 or len(set(L_list)) < 2:
        raise ValueError("need at least two distinct lattice sizes")
    if p_grid.size < 5:
        raise ValueError("need at least 5 grid points straddling the crossing")
    if base_cfg is None:
        base_cfg = ModelConfig(dims=Dims(2, 2, 2))
    curves: dict[int, tuple[tuple[float, ...], tuple[float, ...]]] = {}
    fits = {}
    for li, L in enumerate(L_list):
        pis = []
        for pi_idx, p in enumerate(p_grid):
            cfg = replace(
                base_cfg,
                dims=Dims(L, L, L),
                gate=replace(base_cfg.gate, p_success=float(p)),
            )
            stream = li * len(p_grid) + pi_idx + 1
            stats = estimate_pi(cfg, n_runs, seed, stream=stream, workers=workers)
            pis.append(stats.pi_hat)
            if progress is not None:
                progress(L, float(p), stats)
        pis = np.asarray(pis)
        curves[L] = (tuple(map(float, p_grid)), tuple(map(float, pis)))
        fits[L] = _fit_logistic(p_grid, pis, n_runs)
    crossings = []
    linear_crossings = []
    for i in range(len(L_list)):
        for j in range(i + 1, len(L_list)):
            Li, Lj = L_list[i], L_list[j]
            fi = lambda p, a=fits[Li]: _logistic(p, *a)
            fj = lambda p, a=fits[Lj]: _logistic(p, *a)
            crossings.append((Li, Lj, _pair_crossing(fi, fj, p_grid[0], p_grid[-1])))
            lin = _linear_crossing(p_grid, curves[Li][1], curves[Lj][1])
            if lin is not None:
                linear_crossings.append(lin)
    ps = [c for _, _, c in crossings]
    return ThresholdEstimate(
        p_c=float(np.mean(ps)),
        pairwise_crossings=tuple(crossings),
        spread=float(max(ps) - min(ps)),
        p_c_linear=float(np.mean(linear_crossings)) if linear_crossings else float("nan"),
        curves=curves,
    )


# -- channel fits ------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    decay_length: float
    residual: float
    n_points: int

    def length_at(self, target: float) -> float:
        """Extrapolated length where the fitted curve reaches ``target``."""
        if self.amplitude <= target:
            return 0.0
        return self.decay_length * math.log(self.amplitude / target)


def fit_exponential_decay(lengths, pis, tail_below: float = 0.99) -> FitResult:
    """Least-squares fit of pi = A * exp(-length / lam) over the decaying
    tail (pi < tail_below, pi > 0); refuses with fewer than 3 tail points."""
    lengths = np.asarray(lengths, dtype=float)
    pis = np.asarray(pis, dtype=float)
    mask = (pis < tail_below) & (pis > 0.0)
    if int(mask.sum()) < 3:
        raise FitError(
            f"need at least 3 tail points with 0 < pi < {tail_below}, got {int(mask.sum())}"
        )
    x = lengths[mask]
    y = np.log(pis[mask])
    slope, intercept = np.polyfit(x, y, 1)
    if slope >= 0:
        # no decay visible; report an effectively infinite decay length
        slope = -1e-12
    lam = -1.0 / slope
    amp = float(np.exp(intercept))
    pred = amp * np.exp(-lengths[mask] / lam)
    residual = float(np.sum((pis[mask] - pred) ** 2))
    return FitResult(amplitude=amp, decay_length=float(lam), residual=residual,
                     n_points=int(mask.sum()))


def channel_sweep(
    cross_section: int,
    length_list,
    base_cfg: ModelConfig,
    n_runs: int,
    seed: int,
    workers: int = 1,
    progress=None,
) -> tuple[list[RunStats], FitResult]:
    """Spanning probability of an (length x L x L) channel versus length,
    with an exponential-decay fit over the tail."""
    if cross_section < 2:
        raise ValueError("cross section must be at least 2 sites")
    stats_list = []
    pis = []
    for idx, length in enumerate(length_list):
        cfg = replace(base_cfg, dims=Dims(int(length), cross_section, cross_section))
        stats = estimate_pi(cfg, n_runs, seed, stream=idx + 1, workers=workers)
        stats_list.append(stats)
        pis.append(stats.pi_hat)
        if progress is not None:
            progress(int(length), stats)
    fit = fit_exponential_decay(np.asarray(length_list, dtype=float), np.asarray(pis))
    return stats_list, fit


# -- loss sweeps -------------------------------------------------------------


def loss_sweep(
    L: int,
    p: float,
    p_loss_grid,
    mode,
    base_cfg: ModelConfig | None = None,
    n_runs: int = 10_000,
    seed: int = 0,
    workers: int = 1,
    progress=None,
) -> tuple[list[RunStats], float]:
    """Spanning probability versus photon-loss rate at fixed (L, p);
    reports the largest loss rate with pi >= 0.9 by linear interpolation."""
    p_loss_grid = [float(x) for x in p_loss_grid]
    if p_loss_grid != sorted(p_loss_grid):
        raise ValueError("p_loss_grid must be sorted ascending")
    if base_cfg is None:
        base_cfg = ModelConfig(dims=Dims(L, L, L))
    stats_list = []
    for idx, pl in enumerate(p_loss_grid):
        cfg = replace(
            base_cfg,
            dims=Dims(L, L, L),
            gate=replace(base_cfg.gate, p_success=p),
            loss=replace(base_cfg.loss, p_loss=pl, mode=mode),
        )
        stats = estimate_pi(cfg, n_runs, seed, stream=idx + 1, workers=workers)
        stats_list.append(stats)
        if progress is not None:
            progress(pl, stats)
    tolerance = tolerance_point(p_loss_grid, [s.pi_hat for s in stats_list], 0.9)
    return stats_list, tolerance


def tolerance_point(grid, pis, target: float) -> float:
    """Largest grid value with pi >= target, linearly interpolating into the
    first interval that dips below."""
    grid = list(map(float, grid))
    pis = list(map(float, pis))
    if pis[0] < target:
        return 0.0
    for i in range(1, len(grid)):
        if pis[i] < target:
            t = (pis[i - 1] - target) / (pis[i - 1] - pis[i])
            return grid[i - 1] + t * (grid[i] - grid[i - 1])
    return grid[-1]


def renormalized_channel(
    block: int,
    n_blocks_list,
    base_cfg: ModelConfig,
    n_runs: int,
    seed: int,
    workers: int = 1,
    progress=None,
) -> list[RunStats]:
    """Channel of (block * n) x block x block sites: spanning probability
    against the number of renormalized blocks fused in line."""
    if block < 2:
        raise ValueError("renormalized block size must be at least 2")
    out = []
    for idx, nb in enumerate(n_blocks_list):
        cfg = replace(base_cfg, dims=Dims(block * int(nb), block, block))
        stats = estimate_pi(cfg, n_runs, seed, stream=idx + 1, workers=workers)
        out.append(stats)
        if progress is not None:
            progress(int(nb), stats)
    return out
