"""Lattice geometry, gauge ramp, and Hamiltonian construction.

The chain is an open tight-binding lattice with sites labelled by a
contiguous integer window, by default ``-N ... N``. An imaginary gauge
field ``h`` multiplies the rightward hopping by ``exp(-h)`` and the
leftward one by ``exp(+h)``; the similarity ``c_n = a_n exp(h n)`` maps
between the lab frame (amplitudes ``c_n``) and the gauge frame
(amplitudes ``a_n``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ExponentOverflowError

#: Largest |h*n| for which lab-frame factors exp(h*n) are materialised.
EXPONENT_CAP = 60.0


@dataclass(frozen=True)
class ChainSpec:
    """Open chain of ``2*n_half + 1`` sites with uniform hopping ``kappa``.

    ``site_count`` overrides the centred odd layout; sites then run from
    ``-n_half`` to ``-n_half + site_count - 1``, which is how even chains
    are expressed.
    """

    n_half: int
    kappa: float = 1.0
    site_count: int | None = None

    def __post_init__(self):
        if int(self.n_half) != self.n_half or self.n_half < 0:
            raise ValueError(f"n_half must be a non-negative integer, got {self.n_half!r}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa!r}")
        if self.site_count is not None and (int(self.site_count) != self.site_count or self.site_count < 1):
            raise ValueError(f"site_count must be a positive integer, got {self.site_count!r}")

    @property
    def size(self) -> int:
        if self.site_count is not None:
            return int(self.site_count)
        return 2 * self.n_half + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.n_half, -self.n_half + self.size)

    @property
    def is_centered(self) -> bool:
        return self.size == 2 * self.n_half + 1

    @property
    def parity(self) -> str:
        return "odd" if self.size % 2 else "even"

    @property
    def max_abs_index(self) -> int:
        return int(np.max(np.abs(self.indices)))


@dataclass(frozen=True)
class GaugeRamp:
    """Linear protocol h(t) = alpha*t on [-T, T] with alpha = h_max / T.

    A negative ``h_max`` describes the reversed ramp (field decreasing in
    time). ``mismatch_delta`` scales the compensating site-potential
    gradient to ``-(1 + delta) * alpha * n``.
    """

    h_max: float
    T: float
    mismatch_delta: float = 0.0

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"T must be > 0, got {self.T!r}")
        if not np.isfinite(self.h_max):
            raise ValueError(f"h_max must be finite, got {self.h_max!r}")

    @property
    def alpha(self) -> float:
        return self.h_max / self.T

    def h(self, t):
        return self.alpha * np.asarray(t) if np.ndim(t) else self.alpha * t

    @property
    def t_initial(self) -> float:
        return -self.T

    @property
    def t_final(self) -> float:
        return self.T


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SitePotentials:
    """Imaginary (``gamma``) and real (``real_energy``) on-site terms.

    The diagonal of the lab Hamiltonian is ``real_energy - 1j * gamma``.
    """

    gamma: np.ndarray
    real_energy: np.ndarray | None = None

    def __post_init__(self):
        gamma = np.array(self.gamma, dtype=float).ravel()
        if self.real_energy is None:
            energy = np.zeros_like(gamma)
        else:
            energy = np.array(self.real_energy, dtype=float).ravel()
        if energy.shape != gamma.shape:
            raise DimensionError("real_energy", gamma.size, energy.size)
        object.__setattr__(self, "gamma", _frozen(gamma))
        object.__setattr__(self, "real_energy", _frozen(energy))

    @classmethod
    def zeros(cls, chain: ChainSpec) -> "SitePotentials":
        return cls(np.zeros(chain.size))

    @classmethod
    def cancelling(cls, chain: ChainSpec, ramp: GaugeRamp) -> "SitePotentials":
        """Loss/gain gradient gamma_n = -(1 + delta) * alpha * n.

        With ``delta = 0`` this removes the nonadiabatic term from the
        gauge-frame equations exactly.
        """
        return cls(-(1.0 + ramp.mismatch_delta) * ramp.alpha * chain.indices.astype(float))

    def check(self, chain: ChainSpec) -> None:
        if self.gamma.size != chain.size:
            raise DimensionError("gamma", chain.size, self.gamma.size)


class Frame(enum.Enum):
    LAB = "lab"
    GAUGE = "gauge"


@dataclass(frozen=True)
class LatticeState:
    amplitudes: np.ndarray
    frame: Frame = Frame.LAB
    time: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "frame", Frame(self.frame))

    @property
    def norm(self) -> float:
        """Sum of squared magnitudes of the stored amplitudes."""
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def distribution(self) -> np.ndarray:
        P = self.norm
        if P == 0.0:
            from .errors import NormUnderflowError

            raise NormUnderflowError(self.time)
        return np.abs(self.amplitudes) ** 2 / P


def site_basis_state(chain: ChainSpec, n: int, time: float = 0.0, frame: Frame = Frame.LAB) -> LatticeState:
    """State with unit amplitude on site ``n`` and zero elsewhere."""
    idx = chain.indices
    if n not in idx:
        raise ValueError(f"site {n} is outside the chain {idx[0]}..{idx[-1]}")
    amps = np.zeros(chain.size, dtype=complex)
    amps[n - idx[0]] = 1.0
    return LatticeState(amps, frame, time)


def check_exponent(h: float, chain: ChainSpec, cap: float = EXPONENT_CAP) -> None:
    worst = abs(h) * chain.max_abs_index
    if worst > cap:
        raise ExponentOverflowError(worst, cap)


def _hopping(chain: ChainSpec, disorder) -> np.ndarray:
    bonds = np.full(chain.size - 1, chain.kappa, dtype=float)
    if disorder is not None:
        delta_n = np.asarray(disorder.delta_n, dtype=float)
        if delta_n.size != chain.size - 1:
            raise DimensionError("disorder.delta_n", chain.size - 1, delta_n.size)
        bonds = bonds * (1.0 + delta_n)
    return bonds


def _onsite(chain: ChainSpec, pots: SitePotentials | None, disorder) -> np.ndarray:
    diag = np.zeros(chain.size, dtype=complex)
    if pots is not None:
        pots.check(chain)
        diag += pots.real_energy - 1j * pots.gamma
    if disorder is not None:
        e_n = np.asarray(disorder.e_n, dtype=float)
        if e_n.size != chain.size:
            raise DimensionError("disorder.e_n", chain.size, e_n.size)
        diag += e_n
    return diag


def build_lab_hamiltonian(chain: ChainSpec, h: float, pots: SitePotentials | None = None, disorder=None) -> np.ndarray:
    """Dense lab-frame Hamiltonian at gauge field ``h``.

    Upper diagonal ``kappa (1 + delta_n) exp(-h)``, lower diagonal
    ``kappa (1 + delta_n) exp(+h)``, diagonal ``E_n - 1j * gamma_n``.
    ``disorder`` is any object with ``delta_n`` (length size-1) and
    ``e_n`` (length size) arrays.
    """
    bonds = _hopping(chain, disorder)
    H = np.diag(_onsite(chain, pots, disorder))
    k = np.arange(chain.size - 1)
    H[k, k + 1] = bonds * np.exp(-h)
    H[k + 1, k] = bonds * np.exp(h)
    return H


def build_gauge_generator(chain: ChainSpec, alpha: float, pots: SitePotentials | None = None, disorder=None) -> np.ndarray:
    """Time-independent gauge-frame generator for the ramp h(t) = alpha*t.

    Symmetric hopping ``kappa (1 + delta_n)`` and diagonal
    ``E_n - 1j * gamma_n - 1j * n * alpha``; the last term is the
    nonadiabatic contribution left over by the gauge transformation.
    """
    bonds = _hopping(chain, disorder)
    diag = _onsite(chain, pots, disorder) - 1j * alpha * chain.indices
    return np.diag(diag) + np.diag(bonds.astype(complex), 1) + np.diag(bonds.astype(complex), -1)


def gauge_map(
    state: LatticeState,
    target_frame: Frame,
    h_now: float,
    chain: ChainSpec | None = None,
    cap: float = EXPONENT_CAP,
) -> LatticeState:
    """Convert between lab (``c_n``) and gauge (``a_n``) amplitudes.

    ``c_n = a_n exp(h n)``; the time label is carried over unchanged.
    Without ``chain`` the amplitudes are taken to sit on the centred
    window ``-N ... N``, so their count must be odd.
    """
    target_frame = Frame(target_frame)
    if target_frame is state.frame:
        return state
    size = state.amplitudes.size
    if chain is None:
        if size % 2 == 0:
            raise ValueError("even-length state needs an explicit chain to fix site labels")
        n = np.arange(size) - (size - 1) // 2
    else:
        if chain.size != size:
            raise DimensionError("state.amplitudes", chain.size, size)
        n = chain.indices
    worst = float(np.max(np.abs(h_now * n)))
    if worst > cap:
        raise ExponentOverflowError(worst, cap)
    factor = np.exp(h_now * n)
    if target_frame is Frame.GAUGE:
        amps = state.amplitudes / factor
    else:
        amps = state.amplitudes * factor
    return LatticeState(amps, target_frame, state.time)
