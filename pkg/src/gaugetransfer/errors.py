"""Exception types raised across the package."""

from __future__ import annotations


class GaugeTransferError(Exception):
    """Base class for all package errors."""


class DimensionError(GaugeTransferError, ValueError):
    """A vector does not match the chain it is used with."""

    def __init__(self, name: str, expected: int, got: int):
        self.name = name
        self.expected = expected
        self.got = got
        super().__init__(f"{name}: expected length {expected}, got {got}")


class ExponentOverflowError(GaugeTransferError, OverflowError):
    """A lab-frame gauge factor exp(h*n) would exceed the exponent cap.

    Observables for such configurations are still available from the
    gauge frame, where the log-shifted evaluation never materialises
    the raw factor.
    """

    def __init__(self, exponent: float, cap: float):
        self.exponent = exponent
        self.cap = cap
        super().__init__(
            f"|h*n| = {exponent:.6g} exceeds the exponent cap {cap:g}; "
            "use gauge-frame observables instead of lab-frame amplitudes"
        )


class UnsupportedConfigurationError(GaugeTransferError, ValueError):
    """A closed form was requested outside the regime where it holds."""


class IntegrationError(GaugeTransferError, RuntimeError):
    """The adaptive integrator could not advance."""

    def __init__(self, message: str, t_reached: float):
        self.t_reached = t_reached
        super().__init__(f"{message} (reached t = {t_reached:.12g})")


class NormUnderflowError(GaugeTransferError, FloatingPointError):
    """The state norm vanished, so the normalized distribution is undefined."""

    def __init__(self, time: float):
        self.time = time
        super().__init__(f"state norm underflowed to zero at t = {time:.12g}")
