"""Free-space horizontal link: transmittance statistics and averaged rates.

The instantaneous transmittance of the beam-wandering link is a random
variable on (0, tau0] with a Weibull-like density in log-transmittance.
The conditioned covariance matrix of the protocol then depends on the
fading only through one scalar integral (``xi_integral``), because a
dynamic code re-optimized per transmittance keeps the state Gaussian when
averaged over outcomes.

The distribution parameters (tau0, gamma0, r0, sigma_bw^2) are inputs; the
shipped reference configurations carry values fitted to reproduce the
reference mean residual variances and are labeled as such.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from .channels import ProtocolParams
from .gaussian import symplectic_eigenvalues
from .gkp import GkpAncilla, optimize_squeezing, residual_variance
from .security import ConditionedState, _rate_pieces
from .finite_size import FiniteSizeParams, composable_rate_from_pe, pe_rate_from_scalars

Z2 = np.diag([1.0, -1.0])

_MEMO_NODES = 512
_XI_PANELS = 64
_XI_ORDER = 16


def pointing_wander_variance(l_km: float, pointing_urad: float = 1.0) -> float:
    """Beam-wandering variance (m^2) from a transmitter pointing jitter."""
    if l_km < 0 or pointing_urad < 0:
        raise ValueError("inputs must be >= 0")
    return (pointing_urad * 1e-6 * (l_km * 1e3)) ** 2


@dataclass(frozen=True)
class FadingConfig:
    """Log-transmittance Weibull fading channel.

    ``tau0`` is the perfectly aligned transmittance (extinction already
    folded in multiplicatively); ``gamma0``/``r0_m`` are the shape and scale
    of the deflection-to-transmittance map; ``sigma_bw2_m2`` the centroid
    wander variance.  Aperture, spot size, wavelength and pointing error are
    carried as metadata.
    """

    tau0: float
    gamma0: float
    r0_m: float
    sigma_bw2_m2: float
    a_r_m: float = 0.1
    w0_m: float = 0.05
    l_a_km: float = 1.0
    pointing_urad: float = 1.0
    wavelength_nm: float = 800.0

    def __post_init__(self):
        if not 0.0 < self.tau0 <= 1.0:
            raise ValueError("tau0 must be in (0, 1]")
        if self.gamma0 <= 0 or self.r0_m <= 0 or self.sigma_bw2_m2 <= 0:
            raise ValueError("gamma0, r0 and sigma_bw2 must be > 0")


@dataclass(frozen=True)
class CodePolicy:
    """Error-correction policy along the fading link.

    ``fixed_r`` pins the code squeezing; ``None`` re-optimizes it for every
    transmittance value (dynamic code).
    """

    ancilla: GkpAncilla
    fixed_r: float | None = None

    @property
    def dynamic(self) -> bool:
        return self.fixed_r is None


def fading_pdf(tau_a, cfg: FadingConfig):
    """Probability density of the instantaneous transmittance; 0 off-support."""
    tau_a = np.asarray(tau_a, dtype=float)
    out = np.zeros_like(tau_a)
    inside = (tau_a > 0.0) & (tau_a <= cfg.tau0)
    t = tau_a[inside]
    lg = np.log(cfg.tau0 / t)
    g = cfg.gamma0
    scale = cfg.r0_m**2 / (g * cfg.sigma_bw2_m2)
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = (scale / t) * lg ** (2.0 / g - 1.0) * np.exp(
            -(cfg.r0_m**2 / (2.0 * cfg.sigma_bw2_m2)) * lg ** (2.0 / g))
    if out.ndim == 0:
        return float(out)
    return out


def fading_cdf(tau_a, cfg: FadingConfig):
    """Closed-form CDF: exp(-(r0^2/2 sigma_bw^2) ln(tau0/tau)^(2/gamma0))."""
    tau_a = np.asarray(tau_a, dtype=float)
    out = np.zeros_like(tau_a)
    inside = tau_a > 0.0
    t = np.minimum(tau_a[inside], cfg.tau0)
    lg = np.log(cfg.tau0 / t)
    out[inside] = np.exp(-(cfg.r0_m**2 / (2.0 * cfg.sigma_bw2_m2))
                         * lg ** (2.0 / cfg.gamma0))
    if out.ndim == 0:
        return float(out)
    return out


def fading_quantile(u, cfg: FadingConfig):
    """Inverse CDF; u in (0, 1)."""
    u = np.asarray(u, dtype=float)
    arg = (2.0 * cfg.sigma_bw2_m2 / cfg.r0_m**2) * (-np.log(u))
    out = cfg.tau0 * np.exp(-(arg ** (cfg.gamma0 / 2.0)))
    if out.ndim == 0:
        return float(out)
    return out


def sample_transmittance(cfg: FadingConfig, n: int, gen: np.random.Generator):
    return fading_quantile(gen.uniform(size=n), cfg)


@lru_cache(maxsize=32)
def _residual_interpolant(cfg: FadingConfig, policy: CodePolicy, n_nodes: int = _MEMO_NODES):
    """Monotone cubic interpolant of sigma_r^2 over the transmittance support.

    Per-node optimization of the code squeezing is the cost hotspot, so the
    table is built once per (config, policy) and shared.
    """
    tau_lo = fading_quantile(1e-12, cfg)
    tau_lo = max(tau_lo, 1e-6)
    # keep a nondegenerate grid even for a point-mass-like law
    tau_lo = min(tau_lo, cfg.tau0 * (1.0 - 1e-9))
    taus = np.linspace(tau_lo, cfg.tau0, n_nodes)
    vals = np.empty(n_nodes)
    for i, t in enumerate(taus):
        s2 = 1.0 - t
        if s2 <= 0.0:
            vals[i] = 0.0
        elif policy.dynamic:
            vals[i] = optimize_squeezing(s2, policy.ancilla)[1]
        else:
            vals[i] = residual_variance(policy.fixed_r, s2, policy.ancilla)
    interp = PchipInterpolator(taus, vals, extrapolate=False)

    def sigma_r2_of(tau):
        tau = np.clip(np.asarray(tau, dtype=float), tau_lo, cfg.tau0)
        return interp(tau)

    return sigma_r2_of


def sigma_r2_of_tau(cfg: FadingConfig, policy: CodePolicy, tau):
    """Residual variance of the (possibly re-optimized) code at transmittance tau."""
    return _residual_interpolant(cfg, policy)(tau)


def _quantile_nodes(n_panels: int, order: int):
    """Gauss-Legendre nodes/weights on (0, 1), composite over equal panels."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, n_panels + 1)
    mids = (edges[1:] + edges[:-1]) / 2.0
    halfs = (edges[1:] - edges[:-1]) / 2.0
    u = (mids[:, None] + halfs[:, None] * x[None, :]).ravel()
    uw = (halfs[:, None] * w[None, :]).ravel()
    return u, uw


def _expect(cfg: FadingConfig, fn, n_panels: int = _XI_PANELS, order: int = _XI_ORDER):
    """E[fn(tau)] under the fading law, integrated in the quantile variable.

    Substituting u = CDF(tau) makes the measure uniform, which concentrates
    nodes wherever the density does (near tau0 for weak fading).
    """
    u, uw = _quantile_nodes(n_panels, order)
    tau = fading_quantile(u, cfg)
    return float(np.sum(uw * fn(tau)))


def xi_integral(cfg: FadingConfig, params: ProtocolParams, policy: CodePolicy,
                n_panels: int = _XI_PANELS) -> float:
    """The fading-averaged conditioning scalar
    E[ 1 / (sigma_a^2 + 2 sigma_r^2(tau) + tau_b sigma_b^2 + 2) ]."""
    table = _residual_interpolant(cfg, policy)
    denom_const = params.sigma2_a + params.tau_b * params.sigma2_b + 2.0

    def integrand(tau):
        return 1.0 / (denom_const + 2.0 * table(tau))

    return _expect(cfg, integrand, n_panels=n_panels)


def fading_cm(cfg: FadingConfig, params: ProtocolParams, policy: CodePolicy) -> ConditionedState:
    """Conditioned two-mode covariance matrix averaged over the fading law.

    Entries are the closed forms driven by the single scalar xi; with a
    point-mass transmittance they coincide with the fiber-path conditioning.
    """
    xi = xi_integral(cfg, params, policy)
    sc = _scalars_from_xi(xi, params)
    cm = np.zeros((4, 4))
    cm[0:2, 0:2] = sc[0] * np.eye(2)
    cm[2:4, 2:4] = sc[2] * np.eye(2)
    cm[0:2, 2:4] = cm[2:4, 0:2] = sc[1] * Z2
    symplectic_eigenvalues(cm)  # raises if the averaged state is unphysical
    return ConditionedState(cm=cm, theta=1.0 / (2.0 * xi))


def _scalars_from_xi(xi: float, params: ProtocolParams) -> tuple[float, float, float]:
    sa2, sb2, tau_b = params.sigma2_a, params.sigma2_b, params.tau_b
    ca2 = sa2 * (sa2 + 2.0)
    cb2 = tau_b * sb2 * (sb2 + 2.0)
    phi_a = sa2 + 1.0 - ca2 * xi
    phi_b = sb2 + 1.0 - cb2 * xi
    psi = np.sqrt(ca2 * cb2) * xi
    return float(phi_a), float(psi), float(phi_b)


def mean_transmittance(cfg: FadingConfig) -> float:
    return _expect(cfg, lambda tau: tau)


def mean_residual_variance(cfg: FadingConfig, policy: CodePolicy) -> float:
    """Fading-averaged residual variance of the (dynamic) code."""
    table = _residual_interpolant(cfg, policy)
    return _expect(cfg, table)


def average_composable_rate(cfg: FadingConfig, params: ProtocolParams,
                            fs: FiniteSizeParams, policy: CodePolicy) -> float:
    """Composable rate of the fading-averaged state (worst-case shifted)."""
    xi = xi_integral(cfg, params, policy)
    phi_a, psi, phi_b = _scalars_from_xi(xi, params)
    r_pe = pe_rate_from_scalars(phi_a, psi, phi_b, params.beta0, fs)
    return composable_rate_from_pe(r_pe, fs)


def average_asymptotic_rate(cfg: FadingConfig, params: ProtocolParams,
                            policy: CodePolicy) -> float:
    xi = xi_integral(cfg, params, policy)
    phi_a, psi, phi_b = _scalars_from_xi(xi, params)
    return _rate_pieces(phi_a, psi, phi_b, params.beta0).rate
