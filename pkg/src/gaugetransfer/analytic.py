"""Closed-form spectrum, eigenstates, propagator and final-state formulas
for the uniform chain with a linearly ramped imaginary gauge field.

Everything here assumes the centred odd layout ``-N ... N`` and exact
cancellation of the nonadiabatic term, and serves as the reference that
the numerical evolutions are checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import EXPONENT_CAP, ChainSpec, GaugeRamp, check_exponent
from .errors import ExponentOverflowError, UnsupportedConfigurationError


def _require_centered(chain: ChainSpec) -> None:
    if not chain.is_centered:
        raise UnsupportedConfigurationError(
            "closed forms are only available for the centred odd chain -N..N"
        )


def _require_cancellation(ramp: GaugeRamp) -> None:
    if ramp.mismatch_delta != 0:
        raise UnsupportedConfigurationError(
            f"closed form needs exact cancellation, got mismatch_delta={ramp.mismatch_delta}"
        )


def _check_mode(chain: ChainSpec, l: int) -> int:
    if int(l) != l or not 1 <= l <= chain.size:
        raise ValueError(f"mode index l must be in 1..{chain.size}, got {l!r}")
    return int(l)


def _mode_profile(chain: ChainSpec, l) -> np.ndarray:
    """sin[pi l (n + N + 1) / (2 (N + 1))] over the sites (broadcasts over l)."""
    N = chain.n_half
    k = chain.indices + N + 1
    return np.sin(np.pi * np.multiply.outer(l, k) / (2 * (N + 1)))


def hermitian_spectrum(chain: ChainSpec) -> np.ndarray:
    """E_l = 2 kappa cos(pi l / (2 (N + 1))) for l = 1 .. 2N+1 (descending)."""
    _require_centered(chain)
    N = chain.n_half
    l = np.arange(1, chain.size + 1)
    return 2 * chain.kappa * np.cos(np.pi * l / (2 * (N + 1)))


def hermitian_modes(chain: ChainSpec) -> np.ndarray:
    """Real orthonormal eigenvectors of the uniform chain, one per row (row l-1)."""
    _require_centered(chain)
    N = chain.n_half
    return _mode_profile(chain, np.arange(1, chain.size + 1)) / np.sqrt(N + 1)


def gauge_eigenstate(chain: ChainSpec, h: float, l: int, cap: float = EXPONENT_CAP) -> np.ndarray:
    """Eigenvector of the constant-h Hatano–Nelson chain with energy E_l.

    Component n is exp(h n) sin[pi l (n+N+1) / (2(N+1))] / sqrt(N+1).
    """
    _require_centered(chain)
    l = _check_mode(chain, l)
    check_exponent(h, chain, cap)
    N = chain.n_half
    return (np.exp(h * chain.indices) * _mode_profile(chain, l) / np.sqrt(N + 1)).astype(complex)


def eigenstate_initial_amplitudes(chain: ChainSpec, ramp: GaugeRamp, l: int) -> np.ndarray:
    """Instantaneous eigenstate at t = -T, left-edge normalised.

    c_n = exp(-h_max (n + N)) sin[pi l (n+N+1) / (2(N+1))].
    """
    _require_centered(chain)
    l = _check_mode(chain, l)
    N = chain.n_half
    expo = -ramp.h_max * (chain.indices + N)
    if np.max(np.abs(expo)) > 2 * EXPONENT_CAP:
        raise ExponentOverflowError(float(np.max(np.abs(expo))), 2 * EXPONENT_CAP)
    return (np.exp(expo) * _mode_profile(chain, l)).astype(complex)


@dataclass(frozen=True)
class PropagatorMatrix:
    """Hermitian-chain propagator over the full interaction time 2T.

    ``entries[i, j]`` couples site ``indices[j]`` at t = -T to site
    ``indices[i]`` at t = +T.
    """

    entries: np.ndarray
    T: float
    kappa: float

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def column(self, n: int) -> np.ndarray:
        N = (self.entries.shape[0] - 1) // 2
        return self.entries[:, n + N]


def hermitian_propagator(chain: ChainSpec, T: float) -> PropagatorMatrix:
    """U_{n,l} = (1/(N+1)) sum_s sin(.. s (l+N+1) ..) sin(.. s (n+N+1) ..) exp(-2i T E_s)."""
    if T < 0:
        raise ValueError(f"T must be >= 0, got {T!r}")
    modes = hermitian_modes(chain)
    energies = hermitian_spectrum(chain)
    entries = (modes.T * np.exp(-2j * T * energies)) @ modes
    entries.setflags(write=False)
    return PropagatorMatrix(entries, float(T), chain.kappa)


def theta_vector(chain: ChainSpec, T: float) -> np.ndarray:
    """Final distribution of the Hermitian chain started on the left edge."""
    return np.array(hermitian_propagator(chain, T).column(-chain.n_half))


def exact_final_state_from_eigenstate(chain: ChainSpec, ramp: GaugeRamp, l: int) -> np.ndarray:
    """Lab amplitudes at t = +T for the eigenstate initial condition.

    c_n(T) = exp(h_max (n - N)) sin[pi l (n+N+1) / (2(N+1))] exp(-2i E_l T).
    """
    _require_cancellation(ramp)
    _require_centered(chain)
    l = _check_mode(chain, l)
    N = chain.n_half
    E_l = hermitian_spectrum(chain)[l - 1]
    envelope = np.exp(ramp.h_max * (chain.indices - N))
    return envelope * _mode_profile(chain, l) * np.exp(-2j * E_l * ramp.T)


def exact_final_state_from_delta(chain: ChainSpec, ramp: GaugeRamp) -> np.ndarray:
    """Lab amplitudes at t = +T after starting on site -N: exp(h_max (n - N)) theta_n."""
    _require_cancellation(ramp)
    theta = theta_vector(chain, ramp.T)
    return np.exp(ramp.h_max * (chain.indices - chain.n_half)) * theta


def w_matrix(chain: ChainSpec, ramp: GaugeRamp, cap: float = EXPONENT_CAP) -> np.ndarray:
    """Gram-like matrix giving the final norm for any initial state.

    W[l, s] = sum_n U[n, l] conj(U[n, s]) exp(h_max (2n + l + s)), rows and
    columns indexed by site (offset by N).
    """
    _require_cancellation(ramp)
    _require_centered(chain)
    worst = abs(2 * ramp.h_max * chain.n_half)
    if worst > cap:
        raise ExponentOverflowError(worst, cap)
    U = hermitian_propagator(chain, ramp.T).entries
    n = chain.indices
    left = U * np.exp(ramp.h_max * (n[:, None] + n[None, :]))
    # W = left^T conj(left) with the exp(h_max n) split between both factors
    return left.T @ left.conj()


def final_norm_from_w(W: np.ndarray, initial: np.ndarray) -> float:
    """P(T) = sum_{l,s} W[l, s] c_l(-T) conj(c_s(-T))."""
    c = np.asarray(initial)
    return float(np.real(c @ W @ c.conj()))


def final_norm_delta(chain: ChainSpec, ramp: GaugeRamp) -> float:
    """P(T) = sum_n |theta_n|^2 exp(2 h_max (n - N)) for the left-edge start."""
    _require_cancellation(ramp)
    theta = theta_vector(chain, ramp.T)
    weights = np.exp(2 * ramp.h_max * (chain.indices - chain.n_half))
    return float(np.sum(np.abs(theta) ** 2 * weights))
