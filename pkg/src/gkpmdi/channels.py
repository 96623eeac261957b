"""Channel transmittance models and compensated-channel noise variances.

Noise variances returned here are per quadrature in the hbar = 1 convention
(vacuum variance 1/2), matching the additive-noise bookkeeping of the
error-correction layer.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ProtocolParams:
    """Protocol-level parameters; defaults follow the reference configuration.

    Variances are dimensionless (shot-noise units), lengths in km,
    attenuation in dB/km.  ``wavelength_nm`` is metadata only.
    """

    sigma2_a: float = 20.0
    sigma2_b: float = 20.0
    l_a_km: float = 1.0
    l_b_km: float = 10.0
    n_bar: float = 0.0
    beta0: float = 1.0
    alpha0_db_per_km: float = 0.2
    wavelength_nm: float = 1550.0

    def __post_init__(self):
        if self.sigma2_a < 0 or self.sigma2_b < 0:
            raise ValueError("modulation variances must be >= 0")
        if not 0.0 < self.beta0 <= 1.0:
            raise ValueError("reconciliation efficiency must be in (0, 1]")
        if self.n_bar < 0:
            raise ValueError("thermal photon mean must be >= 0")
        if self.l_a_km < 0 or self.l_b_km < 0:
            raise ValueError("link lengths must be >= 0")

    @property
    def tau_a(self) -> float:
        return fiber_transmittance(self.l_a_km, self.alpha0_db_per_km)

    @property
    def tau_b(self) -> float:
        return fiber_transmittance(self.l_b_km, self.alpha0_db_per_km)


def fiber_transmittance(length_km: float, alpha0_db_per_km: float = 0.2) -> float:
    """Fiber transmittance 10^(-alpha0 * L / 10)."""
    if length_km < 0:
        raise ValueError("length must be >= 0")
    return 10.0 ** (-alpha0_db_per_km * length_km / 10.0)


def awgn_variance_preamp(tau_a: float, n_bar: float = 0.0) -> float:
    """Additive-noise variance of the loss channel compensated by a
    pre-amplifier of gain 1/tau_a: n_bar + 1 - tau_a."""
    if not 0.0 < tau_a <= 1.0:
        raise ValueError("transmittance must be in (0, 1]")
    return n_bar + 1.0 - tau_a


def awgn_variance_qt(tau_a: float, s0_db: float) -> float:
    """Additive-noise variance when the loss is compensated by
    continuous-variable teleportation with a TMSV resource of s0_db dB:
    sqrt(tau_a) * 10^(-s0/10) + 1 - sqrt(tau_a)."""
    if not 0.0 < tau_a <= 1.0:
        raise ValueError("transmittance must be in (0, 1]")
    if s0_db < 0:
        raise ValueError("resource squeezing must be >= 0 dB")
    root = np.sqrt(tau_a)
    return root * 10.0 ** (-s0_db / 10.0) + 1.0 - root


def plob_bound(tau: float) -> float:
    """Repeaterless secret-key capacity ceiling -log2(1 - tau), bits per use."""
    if not 0.0 <= tau < 1.0:
        raise ValueError("transmittance must be in [0, 1)")
    return -np.log2(1.0 - tau)
