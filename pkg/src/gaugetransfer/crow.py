"""Coupled-resonator (CROW) realization of the ramped imaginary gauge field.

A chain of single-mode cavities with a modulated complex frequency
gradient ``n * (1j*alpha + Gamma*cos(Omega*t + 1j*phi))`` reduces, after
averaging over the modulation period, to the Hatano–Nelson chain with
hopping ``rho * J0(Gamma/Omega)`` and gauge field
``(Gamma/Omega) * sinh(phi)``. This module simulates the unaveraged
equations and provides the pieces needed to compare them with the
effective model.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from typing import Callable

import numpy as np
from scipy import integrate as _sp_integrate

from .chain import ChainSpec
from .linalg import expm
from .errors import DimensionError
from .integrate import dopri54

#: Below this |x| the power series is summed in extended precision.
_SERIES_LIMIT = 25.0
_SERIES_DIGITS = 50


def _j0_series(x: float) -> float:
    with localcontext() as ctx:
        ctx.prec = _SERIES_DIGITS
        q = Decimal(x) * Decimal(x) / 4
        term = Decimal(1)
        total = Decimal(1)
        tiny = Decimal(10) ** -(_SERIES_DIGITS - 5)
        k = 0
        while True:
            k += 1
            term = -term * q / (k * k)
            total += term
            if abs(term) < tiny and k > q:
                break
        return float(total)


def _j0_asymptotic(x: float) -> float:
    # Hankel expansion, truncated once the terms stop shrinking
    x = abs(x)
    p = q = 0.0
    a_k = 1.0
    prev = math.inf
    for k in range(64):
        term = a_k / x**k
        if abs(term) >= prev:
            break
        prev = abs(term)
        if k % 2 == 0:
            p += (-1) ** (k // 2) * term
        else:
            q += (-1) ** ((k - 1) // 2) * term
        a_k *= -((2 * k + 1) ** 2) / (8.0 * (k + 1))
    chi = x - math.pi / 4
    return math.sqrt(2 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def bessel_j0(x):
    """Bessel function of the first kind, order zero.

    Accepts scalars or arrays. The power series is used for
    |x| <= 25, summed with 50 significant digits to absorb its
    cancellation; the Hankel asymptotic expansion is used beyond.
    """
    if np.ndim(x):
        return np.vectorize(bessel_j0, otypes=[float])(x)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"bessel_j0 needs a finite argument, got {x!r}")
    if abs(x) <= _SERIES_LIMIT:
        return _j0_series(x)
    return _j0_asymptotic(x)


@dataclass(frozen=True)
class CrowSpec:
    """Modulated cavity chain parameters (all rates in inverse time).

    ``phi`` is either a constant modulation phase or a function of time.
    """

    rho: float
    Omega: float
    Gamma: float
    phi: float | Callable[[float], float] = 0.0
    omega0: float = 0.0
    alpha: float = 0.0
    rwa_min_ratio: float = 20.0

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError(f"rho must be > 0, got {self.rho!r}")
        if not self.Omega > 0:
            raise ValueError(f"Omega must be > 0, got {self.Omega!r}")
        if self.Gamma < 0:
            raise ValueError(f"Gamma must be >= 0, got {self.Gamma!r}")

    @property
    def constant_phase(self) -> bool:
        return not callable(self.phi)

    def phi_at(self, t: float) -> float:
        return self.phi(t) if callable(self.phi) else self.phi

    @property
    def period(self) -> float:
        return 2 * math.pi / self.Omega

    @property
    def rwa_regime(self) -> bool:
        return self.Omega / self.rho >= self.rwa_min_ratio

    def frequency_gradient(self, t: float) -> complex:
        """delta_omega0(t) = 1j*alpha + Gamma*cos(Omega*t + 1j*phi(t))."""
        return 1j * self.alpha + self.Gamma * cmath.cos(self.Omega * t + 1j * self.phi_at(t))


@dataclass(frozen=True)
class EffectiveParams:
    kappa_eff: float
    h_eff: float


def effective_params(spec: CrowSpec, phi: float | None = None) -> EffectiveParams:
    """Averaged hopping rho*J0(Gamma/Omega) and gauge field (Gamma/Omega)*sinh(phi)."""
    if phi is None:
        if not spec.constant_phase:
            raise ValueError("time-dependent phase: pass phi explicitly")
        phi = spec.phi
    z = spec.Gamma / spec.Omega
    return EffectiveParams(spec.rho * bessel_j0(z), z * math.sinh(phi))


def ramp_phase_schedule(Gamma: float, Omega: float, alpha: float) -> Callable[[float], float]:
    """phi(t) = asinh(Omega*alpha*t / Gamma), giving an effective h(t) = alpha*t."""
    if Gamma <= 0:
        raise ValueError("a ramped gauge field needs Gamma > 0")
    return lambda t: math.asinh(Omega * alpha * t / Gamma)


def ramped_crow_spec(
    rho: float,
    Omega: float,
    depth: float,
    h_max: float,
    T: float,
    *,
    dc_gradient: bool = False,
) -> CrowSpec:
    """CROW drive whose averaged dynamics is the ramp h(t) = (h_max/T) t.

    ``depth`` is Gamma/Omega. Sweeping phi(t) already adds an averaged
    gain/loss gradient of 1j*alpha*n (the period average of the
    d(phi)/dt correction to the carrier phase), which by itself cancels
    the nonadiabatic term. With ``dc_gradient=True`` the explicit
    1j*alpha term is kept on top of it, and the averaged model carries
    the gradient twice, i.e. gamma_n = -2*alpha*n.
    """
    alpha = h_max / T
    Gamma = depth * Omega
    return CrowSpec(
        rho=rho,
        Omega=Omega,
        Gamma=Gamma,
        phi=ramp_phase_schedule(Gamma, Omega, alpha),
        alpha=alpha if dc_gradient else 0.0,
    )


def _phase_quadrature(spec: CrowSpec, t0: float, t1: float) -> complex:
    """Gamma * integral_{t0}^{t1} cos(Omega*xi + 1j*phi(xi)) dxi, one period per panel."""
    if t1 == t0:
        return 0.0j
    edges = np.arange(t0, t1, spec.period * np.sign(t1 - t0))
    edges = np.append(edges, t1) if edges[-1] != t1 else edges

    def re(xi):
        return math.cos(spec.Omega * xi) * math.cosh(spec.phi_at(xi))

    def im(xi):
        return -math.sin(spec.Omega * xi) * math.sinh(spec.phi_at(xi))

    parts_re, parts_im = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        parts_re.append(_sp_integrate.quad(re, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)[0])
        parts_im.append(_sp_integrate.quad(im, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)[0])
    return spec.Gamma * complex(math.fsum(parts_re), math.fsum(parts_im))


def accumulated_phase(spec: CrowSpec, t: float, quadrature: bool | None = None) -> complex:
    """Phi(t) = Gamma * integral_0^t cos(Omega*xi + 1j*phi(xi)) dxi.

    Constant phase uses the closed form
    (Gamma/Omega) * (sin(Omega*t + 1j*phi) - 1j*sinh(phi)); a scheduled
    phase (or ``quadrature=True``) integrates numerically.
    """
    if quadrature is None:
        quadrature = not spec.constant_phase
    if not quadrature:
        phi = spec.phi_at(t)
        return spec.Gamma / spec.Omega * (cmath.sin(spec.Omega * t + 1j * phi) - 1j * math.sinh(phi))
    return _phase_quadrature(spec, 0.0, t)


def _phases_at(spec: CrowSpec, times: np.ndarray, carrier: str) -> np.ndarray:
    if carrier not in ("closed_form", "integral"):
        raise ValueError(f"carrier must be 'closed_form' or 'integral', got {carrier!r}")
    if spec.constant_phase or carrier == "closed_form":
        return np.array([accumulated_phase(spec, t, quadrature=False) for t in times])
    out = np.empty(times.size, dtype=complex)
    out[0] = accumulated_phase(spec, times[0])
    for k in range(1, times.size):
        out[k] = out[k - 1] + _phase_quadrature(spec, times[k - 1], times[k])
    return out


def stroboscopic_times(spec: CrowSpec, t0: float, t1: float) -> np.ndarray:
    """Multiples of 2*pi/Omega inside [t0, t1], preceded by t0 if it is not one."""
    P = spec.period
    k0 = math.ceil(t0 / P - 1e-9)
    k1 = math.floor(t1 / P + 1e-9)
    times = np.arange(k0, k1 + 1) * P
    if times.size == 0 or abs(times[0] - t0) > 1e-9 * max(1.0, abs(t0)):
        times = np.insert(times, 0, t0)
    else:
        times[0] = t0
    return times


@dataclass(frozen=True)
class CrowTrajectory:
    """Cavity amplitudes ``b`` and carrier-removed amplitudes ``c`` (one row per time)."""

    times: np.ndarray
    b: np.ndarray
    c: np.ndarray
    phase: np.ndarray
    steps: int

    @property
    def pn_series(self) -> np.ndarray:
        w = np.abs(self.c) ** 2
        return w / w.sum(axis=1, keepdims=True)

    @property
    def norm_series(self) -> np.ndarray:
        return np.sum(np.abs(self.c) ** 2, axis=1)


def carrier_factor(spec: CrowSpec, chain: ChainSpec, t: float, phase: complex) -> np.ndarray:
    """exp(1j*omega0*t + 1j*Phi*n), the factor turning b_n into c_n."""
    return np.exp(1j * spec.omega0 * t + 1j * phase * chain.indices)


def evolve_crow(
    spec: CrowSpec,
    chain: ChainSpec,
    initial,
    t_span: tuple[float, float],
    times=None,
    rtol: float = 1e-10,
    carrier: str = "closed_form",
) -> CrowTrajectory:
    """Integrate the modulated coupled-mode equations for the cavity amplitudes.

    ``initial`` holds b_n at ``t_span[0]``. Output defaults to the
    stroboscopic times in ``t_span``.

    ``carrier`` selects the phase used to strip the modulation from
    ``b``. ``"closed_form"`` evaluates
    (Gamma/Omega) * (sin(Omega*t + 1j*phi(t)) - 1j*sinh(phi(t))) at the
    instantaneous phase, which yields the lab-frame amplitudes of the
    effective model. ``"integral"`` uses the exact running integral of
    the drive; for a scheduled phase that drops the slow -1j*sinh(phi)
    offset and yields gauge-frame amplitudes instead. Both agree for
    constant phi.
    """
    b0 = np.asarray(initial, dtype=complex)
    if b0.size != chain.size:
        raise DimensionError("initial", chain.size, b0.size)
    t0, t1 = map(float, t_span)
    times = stroboscopic_times(spec, t0, t1) if times is None else np.asarray(times, dtype=float)
    if abs(times[0] - t0) > 1e-12 * max(1.0, abs(t0)):
        raise ValueError("output times must start at t_span[0]")
    n = chain.indices.astype(float)
    rho, omega0 = spec.rho, spec.omega0
    z = spec.Gamma / spec.Omega
    h_origin = z * math.sinh(spec.phi_at(0.0))

    def rhs(t, b):
        out = (omega0 + n * spec.frequency_gradient(t)) * b
        out[:-1] += rho * b[1:]
        out[1:] += rho * b[:-1]
        return -1j * out

    def weight(t):
        # |b_n| -> gauge-frame magnitude, up to the slow drift of Im(Phi)
        h = z * math.sinh(spec.phi_at(t))
        return np.exp(-n * (h * math.cos(spec.Omega * t) - h_origin + h))

    b, steps = dopri54(rhs, b0, times, rtol=rtol, weight=weight)
    phases = _phases_at(spec, times, carrier)
    c = np.array([b[k] * carrier_factor(spec, chain, t, phases[k]) for k, t in enumerate(times)])
    return CrowTrajectory(times, b, c, phases, steps)


def initial_cavity_amplitudes(
    spec: CrowSpec, chain: ChainSpec, c0, t0: float = 0.0, carrier: str = "closed_form"
) -> np.ndarray:
    """Invert the carrier removal at t0: b_n = c_n exp(-1j*omega0*t0 - 1j*Phi(t0)*n)."""
    phase = _phases_at(spec, np.array([t0]), carrier)[0]
    return np.asarray(c0, dtype=complex) / carrier_factor(spec, chain, t0, phase)


def effective_hamiltonian(spec: CrowSpec, chain: ChainSpec, phi: float | None = None) -> np.ndarray:
    """Averaged Hamiltonian for a constant phase: hopping kappa_eff exp(-/+h), diagonal 1j*alpha*n."""
    eff = effective_params(spec, phi)
    H = np.diag(1j * spec.alpha * chain.indices.astype(complex))
    k = np.arange(chain.size - 1)
    H[k, k + 1] = eff.kappa_eff * math.exp(-eff.h_eff)
    H[k + 1, k] = eff.kappa_eff * math.exp(eff.h_eff)
    return H


def rwa_discrepancy(
    spec: CrowSpec,
    chain: ChainSpec,
    kappa_t_max: float = 3.0,
    initial=None,
    rtol: float = 1e-10,
) -> float:
    """Largest stroboscopic |p_n(cavity) - p_n(effective)| over 0 <= kappa_eff * t <= kappa_t_max.

    Constant phase only. The default initial state excites the left edge.
    """
    if not spec.constant_phase:
        raise ValueError("rwa_discrepancy needs a constant modulation phase")
    eff = effective_params(spec)
    if eff.kappa_eff == 0:
        raise ValueError("effective hopping vanishes; no time scale to compare over")
    if initial is None:
        initial = np.zeros(chain.size, dtype=complex)
        initial[0] = 1.0
    c0 = np.asarray(initial, dtype=complex)
    t_max = kappa_t_max / abs(eff.kappa_eff)
    traj = evolve_crow(spec, chain, initial_cavity_amplitudes(spec, chain, c0), (0.0, t_max), rtol=rtol)
    H = effective_hamiltonian(spec, chain)
    worst = 0.0
    for t, p_cavity in zip(traj.times, traj.pn_series):
        c = expm(-1j * H * t) @ c0
        p_eff = np.abs(c) ** 2 / np.sum(np.abs(c) ** 2)
        worst = max(worst, float(np.max(np.abs(p_cavity - p_eff))))
    return worst
