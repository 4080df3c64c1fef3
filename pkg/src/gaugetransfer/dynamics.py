"""Time evolution of the ramped chain in the gauge and lab frames.

The gauge frame turns the ramped problem into a time-independent one,
which is propagated exactly with a matrix exponential per output
interval. The lab frame integrates the explicitly time-dependent
equations with adaptive Runge–Kutta stepping and serves as the
independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import eigenstate_initial_amplitudes
from .chain import (
    EXPONENT_CAP,
    ChainSpec,
    Frame,
    GaugeRamp,
    LatticeState,
    SitePotentials,
    build_gauge_generator,
    check_exponent,
    gauge_map,
    site_basis_state,
)
from .errors import DimensionError, ExponentOverflowError, NormUnderflowError
from .integrate import dopri54
from .linalg import expm

DEFAULT_SAMPLES = 401
DEFAULT_RTOL = 1e-10

_LOG_MAX = np.log(np.finfo(float).max)


@dataclass(frozen=True)
class EvolutionProblem:
    chain: ChainSpec
    ramp: GaugeRamp
    pots: SitePotentials
    initial: LatticeState
    disorder: object | None = None
    samples: int = DEFAULT_SAMPLES

    def __post_init__(self):
        self.pots.check(self.chain)
        if self.initial.amplitudes.size != self.chain.size:
            raise DimensionError("initial.amplitudes", self.chain.size, self.initial.amplitudes.size)
        if not np.any(self.initial.amplitudes):
            raise ValueError("initial state must be nonzero")
        if self.samples < 2:
            raise ValueError(f"samples must be >= 2, got {self.samples}")
        if not np.isclose(self.initial.time, -self.ramp.T, rtol=0, atol=1e-12 * max(1.0, self.ramp.T)):
            raise ValueError(f"initial state must sit at t = -T = {-self.ramp.T}, got t = {self.initial.time}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(-self.ramp.T, self.ramp.T, self.samples)

    def initial_gauge_amplitudes(self) -> np.ndarray:
        """Initial gauge amplitudes without ever forming exp(h*n) in the lab frame."""
        if self.initial.frame is Frame.GAUGE:
            return np.array(self.initial.amplitudes)
        h0 = self.ramp.h(-self.ramp.T)
        return self.initial.amplitudes * np.exp(-h0 * self.chain.indices)

    def with_ramp(self, ramp: GaugeRamp, pots: SitePotentials | None = None) -> "EvolutionProblem":
        return EvolutionProblem(self.chain, ramp, self.pots if pots is None else pots,
                                LatticeState(self.initial.amplitudes, self.initial.frame, -ramp.T),
                                self.disorder, self.samples)


@dataclass(frozen=True)
class Trajectory:
    """Sampled evolution plus lab-frame observables.

    ``amplitudes`` holds one row per time in ``frame``. ``norm_series`` is
    the lab-frame norm P(t) and ``pn_series`` the normalized lab-frame
    distribution p_n(t), both computed with a log shift so that gauge
    factors never overflow.
    """

    times: np.ndarray
    amplitudes: np.ndarray
    frame: Frame
    chain: ChainSpec
    ramp: GaugeRamp
    log_norm_series: np.ndarray
    pn_series: np.ndarray
    steps: int = 0

    @property
    def norm_series(self) -> np.ndarray:
        if np.any(self.log_norm_series > _LOG_MAX):
            worst = float(np.max(self.log_norm_series)) / 2
            raise ExponentOverflowError(worst, _LOG_MAX / 2)
        return np.exp(self.log_norm_series)

    @property
    def states(self) -> list[LatticeState]:
        return [LatticeState(a, self.frame, t) for t, a in zip(self.times, self.amplitudes)]

    def lab_state(self, k: int = -1, cap: float = EXPONENT_CAP) -> LatticeState:
        """Lab-frame state at sample ``k`` (subject to the exponent cap)."""
        state = LatticeState(self.amplitudes[k], self.frame, self.times[k])
        return gauge_map(state, Frame.LAB, self.ramp.h(self.times[k]), self.chain, cap)

    @property
    def final_distribution(self) -> np.ndarray:
        return self.pn_series[-1]


def _lab_observables(times, amps, frame, chain, ramp):
    with np.errstate(divide="ignore"):
        log_sq = np.log(np.abs(amps) ** 2)
    if frame is Frame.GAUGE:
        log_sq = log_sq + 2 * np.outer(ramp.h(times), chain.indices)
    shift = np.max(log_sq, axis=1)
    bad = ~np.isfinite(shift)
    if np.any(bad):
        raise NormUnderflowError(float(times[np.argmax(bad)]))
    rel = np.exp(log_sq - shift[:, None])
    total = rel.sum(axis=1)
    return shift + np.log(total), rel / total[:, None]


def evolve_gauge_frame(problem: EvolutionProblem) -> Trajectory:
    """Exact propagation of the gauge-frame amplitudes a_n."""
    chain, ramp = problem.chain, problem.ramp
    G = build_gauge_generator(chain, ramp.alpha, problem.pots, problem.disorder)
    times = problem.times
    dt = times[1] - times[0]
    step = expm(-1j * G * dt)
    amps = np.empty((times.size, chain.size), dtype=complex)
    amps[0] = problem.initial_gauge_amplitudes()
    for k in range(1, times.size):
        amps[k] = step @ amps[k - 1]
    log_norm, pn = _lab_observables(times, amps, Frame.GAUGE, chain, ramp)
    return Trajectory(times, amps, Frame.GAUGE, chain, ramp, log_norm, pn)


def evolve_lab_frame(problem: EvolutionProblem, rtol: float = DEFAULT_RTOL, cap: float = EXPONENT_CAP) -> Trajectory:
    """Adaptive integration of the lab-frame amplitudes c_n(t).

    The step error is weighted by exp(-h(t) n), i.e. measured as it would
    appear in the gauge frame, so that exponentially small amplitudes
    that later dominate are resolved.
    """
    chain, ramp = problem.chain, problem.ramp
    check_exponent(ramp.h_max, chain, cap)
    n = chain.indices.astype(float)
    bonds = np.full(chain.size - 1, chain.kappa)
    diag = problem.pots.real_energy - 1j * problem.pots.gamma
    if problem.disorder is not None:
        bonds = bonds * (1.0 + np.asarray(problem.disorder.delta_n, dtype=float))
        diag = diag + np.asarray(problem.disorder.e_n, dtype=float)
    alpha = ramp.alpha

    def rhs(t, c):
        h = alpha * t
        out = diag * c
        out[:-1] += bonds * np.exp(-h) * c[1:]
        out[1:] += bonds * np.exp(h) * c[:-1]
        return -1j * out

    def weight(t):
        return np.exp(-alpha * t * n)

    c0 = problem.initial.amplitudes
    if problem.initial.frame is Frame.GAUGE:
        c0 = gauge_map(problem.initial, Frame.LAB, ramp.h(-ramp.T), chain, cap).amplitudes
    times = problem.times
    amps, steps = dopri54(rhs, c0, times, rtol=rtol, weight=weight)
    log_norm, pn = _lab_observables(times, amps, Frame.LAB, chain, ramp)
    return Trajectory(times, amps, Frame.LAB, chain, ramp, log_norm, pn, steps)


def transfer_probability(traj: Trajectory) -> float:
    """Normalized excitation on the right-edge site at the final time."""
    if traj.times.size == 0:
        raise ValueError("empty trajectory")
    return float(traj.pn_series[-1, -1])


def delta_initial_state(chain: ChainSpec, ramp: GaugeRamp) -> LatticeState:
    """Lab-frame excitation of the left-edge site at t = -T."""
    return site_basis_state(chain, int(chain.indices[0]), time=-ramp.T)


def eigenstate_initial_state(chain: ChainSpec, ramp: GaugeRamp, l: int, normalize: bool = True) -> LatticeState:
    """Instantaneous eigenstate l at t = -T, scaled to unit norm unless ``normalize`` is off.

    Without normalisation the amplitudes match the closed-form final
    state of :func:`~gaugetransfer.analytic.exact_final_state_from_eigenstate`.
    """
    amps = eigenstate_initial_amplitudes(chain, ramp, l)
    if normalize:
        amps = amps / np.linalg.norm(amps)
    return LatticeState(amps, Frame.LAB, -ramp.T)


def make_problem(
    chain: ChainSpec,
    ramp: GaugeRamp,
    *,
    initial: str | int | LatticeState = "delta",
    cancel: bool = True,
    disorder=None,
    samples: int = DEFAULT_SAMPLES,
) -> EvolutionProblem:
    """Assemble the common problem setups.

    ``initial`` is ``"delta"`` (left edge), a mode index ``l`` for the
    instantaneous eigenstate, or an explicit state. ``cancel`` selects the
    loss/gain gradient -(1 + delta) alpha n versus no imaginary potential.
    """
    if isinstance(initial, LatticeState):
        state = initial
    elif isinstance(initial, str):
        if initial != "delta":
            raise ValueError(f"unknown initial condition {initial!r}")
        state = delta_initial_state(chain, ramp)
    else:
        state = eigenstate_initial_state(chain, ramp, initial)
    pots = SitePotentials.cancelling(chain, ramp) if cancel else SitePotentials.zeros(chain)
    return EvolutionProblem(chain, ramp, pots, state, disorder, samples)
