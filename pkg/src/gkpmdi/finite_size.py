"""Composable finite-size layer: tail-bound parameter estimation and key rate."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ProtocolParams
from .gaussian import symplectic_eigenvalues
from .security import ConditionedState, _rate_pieces, conditioned_scalars


@dataclass(frozen=True)
class FiniteSizeParams:
    """Block-size and epsilon-security parameters (reference defaults)."""

    n_total: float = 1e8
    m_pe: float | None = None  # default 0.1 * n_total
    d: int = 32
    p_ec: float = 0.9
    eps_cor: float = 1e-10
    eps_s: float = 1e-10
    eps_h: float = 1e-10
    eps_pe: float = 1e-10

    def __post_init__(self):
        if self.n_total <= 0:
            raise ValueError("total pulse count must be > 0")
        m = self.pe_signals
        if not 0 < m < self.n_total:
            raise ValueError("PE signal count must satisfy 0 < m_pe < N")
        if self.d < 2 or (self.d & (self.d - 1)) != 0:
            raise ValueError("digitalization must be a power of two >= 2")
        if not 0 < self.p_ec <= 1:
            raise ValueError("EC success probability must be in (0, 1]")
        for name in ("eps_cor", "eps_s", "eps_h", "eps_pe"):
            e = getattr(self, name)
            if not 0 < e < 1:
                raise ValueError(f"{name} must be in (0, 1)")

    @property
    def pe_signals(self) -> float:
        return 0.1 * self.n_total if self.m_pe is None else self.m_pe

    @property
    def key_signals(self) -> float:
        return self.n_total - self.pe_signals


@dataclass(frozen=True)
class WorstCaseCM:
    v_wc: np.ndarray
    kappa: float
    physical: bool


def kappa_from_eps(eps_pe: float) -> float:
    """Tail-bound exponent solving 4 exp(-kappa) = eps_pe.

    Accepts any argument giving a positive exponent; the stricter
    probability range is enforced by :class:`FiniteSizeParams`.
    """
    if not 0 < eps_pe < 4:
        raise ValueError("eps_pe must be in (0, 4) for a positive exponent")
    return float(np.log(4.0 / eps_pe))


def correlation_shift(v_qa: float, v_qb: float, kappa: float, m_pe: float) -> float:
    """Pessimistic shift applied to each cross correlation:
    sqrt(kappa/m_pe) * (<qa^2> + <qb^2>)."""
    return np.sqrt(kappa / m_pe) * (v_qa + v_qb)


def worst_case_cm(v: np.ndarray, fs: FiniteSizeParams) -> WorstCaseCM:
    """Replace the cross correlations of a conditioned CM by their worst case.

    The q correlation is decreased and the p correlation increased by the
    chi-squared tail-bound shift; diagonals are local quantities and stay.
    An unphysical result is flagged, never clamped.
    """
    v = np.asarray(v, dtype=float)
    kappa = kappa_from_eps(fs.eps_pe)
    m = fs.pe_signals
    out = v.copy()
    shift_q = correlation_shift(v[0, 0], v[2, 2], kappa, m)
    shift_p = correlation_shift(v[1, 1], v[3, 3], kappa, m)
    out[0, 2] = out[2, 0] = v[0, 2] - shift_q
    out[1, 3] = out[3, 1] = v[1, 3] + shift_p
    try:
        symplectic_eigenvalues(out)
        physical = True
    except ValueError:
        physical = False
    return WorstCaseCM(v_wc=out, kappa=kappa, physical=physical)


def aep_delta(d: int, eps_s: float) -> float:
    """Asymptotic-equipartition penalty 4 log2(sqrt(d)+2) sqrt(log2(2/eps_s^2))."""
    return float(4.0 * np.log2(np.sqrt(d) + 2.0) * np.sqrt(np.log2(2.0 / eps_s**2)))


def epsilon_total(fs: FiniteSizeParams) -> float:
    """Overall security parameter eps_cor + eps_s + eps_h + p_ec * eps_pe."""
    return fs.eps_cor + fs.eps_s + fs.eps_h + fs.p_ec * fs.eps_pe


def pe_rate_from_scalars(phi_a: float, psi: float, phi_b: float,
                         beta0: float, fs: FiniteSizeParams) -> float:
    """Asymptotic rate functional evaluated on the worst-case correlations."""
    shift = correlation_shift(phi_a, phi_b, kappa_from_eps(fs.eps_pe), fs.pe_signals)
    return _rate_pieces(phi_a, psi - shift, phi_b, beta0).rate


def composable_rate(params: ProtocolParams, sigma_r2: float, fs: FiniteSizeParams,
                    mode: str = "gkp") -> float:
    """Composable finite-size key rate, bits per protocol use.

    p_ec * [l * R_pe - sqrt(l) * Delta_aep + log2(eps_h^2 eps_cor)] / N with
    l = N - m_pe and R_pe the worst-case asymptotic rate.
    """
    sc = conditioned_scalars(params, sigma_r2, mode)
    r_pe = pe_rate_from_scalars(sc.phi_a, sc.psi, sc.phi_b, params.beta0, fs)
    return composable_rate_from_pe(r_pe, fs)


def composable_rate_from_pe(r_pe: float, fs: FiniteSizeParams) -> float:
    ell = fs.key_signals
    bracket = ell * r_pe - np.sqrt(ell) * aep_delta(fs.d, fs.eps_s) \
        + np.log2(fs.eps_h**2 * fs.eps_cor)
    return float(fs.p_ec * bracket / fs.n_total)


def composable_rate_from_state(state: ConditionedState, beta0: float,
                               fs: FiniteSizeParams) -> float:
    """Composable rate evaluated from an explicit conditioned CM."""
    a, c, b = state.scalars()
    r_pe = pe_rate_from_scalars(a, c, b, beta0, fs)
    return composable_rate_from_pe(r_pe, fs)
