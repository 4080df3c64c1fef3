"""Disorder realizations and Monte Carlo transfer statistics.

Per-realization seeds come from a SplitMix64 mix of the base seed and
the realization index, and every realization draws from its own Philox
stream, so ensembles are reproducible regardless of how the work is
scheduled.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chain import ChainSpec, GaugeRamp, SitePotentials
from .dynamics import EvolutionProblem, delta_initial_state, evolve_gauge_frame, transfer_probability
from .errors import GaugeTransferError

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """SplitMix64 output function (Steele, Lea & Flood 2014)."""
    z = x & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def realization_seed(base_seed: int, index: int) -> int:
    """Seed of realization ``index``: splitmix64(base + (index + 1) * golden_gamma)."""
    return splitmix64((base_seed + (index + 1) * _GOLDEN_GAMMA) & _MASK64)


@dataclass(frozen=True)
class UniformSymmetric:
    """Uniform on the open interval (-width, width)."""

    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"width must be > 0, got {self.width!r}")

    @property
    def std(self) -> float:
        return self.width / np.sqrt(3.0)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # midpoints of a 2**53 grid keep both endpoints excluded
        u = (rng.integers(0, 1 << 53, size=size) + 0.5) / float(1 << 53)
        return self.width * (2.0 * u - 1.0)


@dataclass(frozen=True)
class Normal:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma!r}")

    @property
    def std(self) -> float:
        return self.sigma

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.normal(0.0, self.sigma, size=size)


DisorderKind = UniformSymmetric | Normal


@dataclass(frozen=True)
class DisorderRealization:
    """Bond perturbations ``delta_n`` (hopping kappa (1 + delta_n)) and site energies ``e_n``."""

    delta_n: np.ndarray
    e_n: np.ndarray
    kind: DisorderKind | None = None
    seed: int | None = None

    def __post_init__(self):
        for name in ("delta_n", "e_n"):
            a = np.array(getattr(self, name), dtype=float).ravel()
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.e_n.size != self.delta_n.size + 1:
            raise ValueError(
                f"e_n must have one more entry than delta_n, got {self.e_n.size} and {self.delta_n.size}"
            )

    @classmethod
    def none(cls, chain: ChainSpec) -> "DisorderRealization":
        return cls(np.zeros(chain.size - 1), np.zeros(chain.size))


def sample_disorder(
    chain: ChainSpec,
    kind: DisorderKind,
    seed: int,
    *,
    hopping: bool = True,
    site_energies: bool = False,
) -> DisorderRealization:
    """Draw one realization; bonds are drawn first, then site energies."""
    rng = np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))
    delta_n = kind.draw(rng, chain.size - 1) if hopping else np.zeros(chain.size - 1)
    e_n = kind.draw(rng, chain.size) if site_energies else np.zeros(chain.size)
    return DisorderRealization(delta_n, e_n, kind, int(seed))


def _pair(chain: ChainSpec, ramp: GaugeRamp, realization: DisorderRealization) -> tuple[float, float, float]:
    """(p_N gauge-assisted, p_N Hermitian, final norm gauge-assisted) for one realization."""
    gauge = EvolutionProblem(
        chain, ramp, SitePotentials.cancelling(chain, ramp), delta_initial_state(chain, ramp), realization, samples=2
    )
    traj = evolve_gauge_frame(gauge)
    herm_ramp = GaugeRamp(0.0, ramp.T)
    herm = EvolutionProblem(
        chain, herm_ramp, SitePotentials.zeros(chain), delta_initial_state(chain, herm_ramp), realization, samples=2
    )
    herm_traj = evolve_gauge_frame(herm)
    return transfer_probability(traj), transfer_probability(herm_traj), float(traj.norm_series[-1])


@dataclass(frozen=True)
class EnsembleResult:
    p_transfer: np.ndarray
    p_hermitian: np.ndarray
    seeds: np.ndarray
    final_norm: np.ndarray = field(repr=False, default=None)

    @property
    def failed(self) -> np.ndarray:
        return ~(np.isfinite(self.p_transfer) & np.isfinite(self.p_hermitian))

    @property
    def failure_count(self) -> int:
        return int(np.sum(self.failed))

    def histogram(self, which: str = "transfer", bins: int = 50) -> tuple[np.ndarray, np.ndarray]:
        values = {"transfer": self.p_transfer, "hermitian": self.p_hermitian}[which][~self.failed]
        return np.histogram(values, bins=bins, range=(0.0, 1.0))

    def summary(self, bins: int = 50) -> dict:
        ok = ~self.failed
        out = {"count": int(self.seeds.size), "failures": self.failure_count}
        for name, values in (("transfer", self.p_transfer[ok]), ("hermitian", self.p_hermitian[ok])):
            counts, _ = np.histogram(values, bins=bins, range=(0.0, 1.0))
            out[name] = {
                "mean": float(np.mean(values)) if values.size else float("nan"),
                "std": float(np.std(values)) if values.size else float("nan"),
                "histogram": counts.tolist(),
            }
        out["bins"] = bins
        return out


def ensemble_transfer(
    chain: ChainSpec,
    ramp: GaugeRamp,
    kind: DisorderKind,
    count: int,
    base_seed: int = 0,
    *,
    hopping: bool = True,
    site_energies: bool = False,
    threads: int = 1,
) -> EnsembleResult:
    """Paired gauge-assisted and Hermitian transfer over ``count`` realizations.

    Both runs of a realization share the same disorder and start on the
    left edge at t = -T. A realization whose evolution fails is stored as
    NaN and left out of the summary.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    seeds = np.array([realization_seed(base_seed, r) for r in range(count)], dtype=np.uint64)
    p_t = np.empty(count)
    p_h = np.empty(count)
    norms = np.empty(count)

    def work(r: int) -> None:
        real = sample_disorder(chain, kind, int(seeds[r]), hopping=hopping, site_energies=site_energies)
        try:
            p_t[r], p_h[r], norms[r] = _pair(chain, ramp, real)
        except (GaugeTransferError, np.linalg.LinAlgError):
            p_t[r] = p_h[r] = norms[r] = np.nan

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, range(count), chunksize=max(1, count // (4 * threads))))
    else:
        for r in range(count):
            work(r)
    for a in (p_t, p_h, norms):
        a.setflags(write=False)
    return EnsembleResult(p_t, p_h, seeds, norms)


@dataclass(frozen=True)
class SweepResult:
    kappa_T: np.ndarray
    p_transfer: np.ndarray
    p_hermitian: np.ndarray
    final_norm: np.ndarray


def disorder_sweep_T(
    chain: ChainSpec,
    ramp: GaugeRamp,
    realization: DisorderRealization | None,
    T_grid,
) -> SweepResult:
    """Transfer probability versus T for one fixed realization.

    ``ramp`` supplies h_max; at each T the slope alpha = h_max / T and the
    cancelling gradient are recomputed.
    """
    T_grid = np.asarray(T_grid, dtype=float)
    if realization is None:
        realization = DisorderRealization.none(chain)
    p_t, p_h, P = (np.empty(T_grid.size) for _ in range(3))
    for k, T in enumerate(T_grid):
        p_t[k], p_h[k], P[k] = _pair(chain, GaugeRamp(ramp.h_max, T, ramp.mismatch_delta), realization)
    return SweepResult(chain.kappa * T_grid, p_t, p_h, P)
