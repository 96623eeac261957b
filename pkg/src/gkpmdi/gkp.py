"""GKP-TMS oscillator-to-oscillator code: syndrome statistics and residual error.

The code entangles a data mode with a square-lattice GKP ancilla through a
two-mode squeezer, sends both through an additive-Gaussian channel of
per-quadrature variance sigma^2 (vacuum-1/2 units), undoes the squeezer, and
reads the ancilla modulo the lattice pitch ell = sqrt(2*pi).  A linear
function of the wrapped syndrome is then subtracted from the data.

Because the lattice is square, the q and p quadratures decouple and carry
identical statistics, so every quantity here is per quadrature.  The scalar
model is: data noise a and pre-wrap syndrome w are jointly Gaussian with

    Var(a) = sigma^2 cosh(2r),   Cov(a, w) = sigma^2 sinh(2r),
    Var(w) = sigma^2 cosh(2r) + delta_syn^2,

where delta_syn^2 is the syndrome broadening of a finitely squeezed ancilla
(zero for an ideal one).  The corrected output is a - phi * wrap(w), and its
variance follows from the wrapped-Gaussian moments E[wrap(w)^2], E[w wrap(w)].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import symplectic_form

ELL = np.sqrt(2.0 * np.pi)  # square-lattice pitch

# Neglected Gaussian tail mass below 1e-12 -> integrate out to 7.5 sigma.
_TAIL_SIGMA = 7.5
_MAX_CELLS = 20000
_GL_ORDER = 24
_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


@dataclass(frozen=True)
class GkpAncilla:
    """Ancilla quality: ideal, or finitely squeezed at ``squeezing_db``.

    ``delta2`` is the per-quadrature peak variance 10^(-s/10)/2 implied by
    the squeezing definition s = -10 log10(2 delta^2).  The syndrome read
    from a finitely squeezed ancilla is broadened by twice that amount
    (preparation and modular readout each contribute one peak width).
    """

    squeezing_db: float | None = None  # None means ideal

    def __post_init__(self):
        if self.squeezing_db is not None and self.squeezing_db <= 0:
            raise ValueError("finite ancilla squeezing must be > 0 dB")

    @property
    def ideal(self) -> bool:
        return self.squeezing_db is None

    @property
    def delta2(self) -> float:
        if self.ideal:
            return 0.0
        return 10.0 ** (-self.squeezing_db / 10.0) / 2.0

    @property
    def syndrome_noise_variance(self) -> float:
        return 2.0 * self.delta2

    @classmethod
    def parse(cls, spec: str | float | None) -> "GkpAncilla":
        if spec is None or (isinstance(spec, str) and spec.lower() == "ideal"):
            return cls(None)
        return cls(float(spec))


IDEAL = GkpAncilla(None)


@dataclass(frozen=True)
class GkpCodeConfig:
    """Two-mode-squeezing code configuration on the square lattice."""

    r: float = 0.0
    ancilla: GkpAncilla = IDEAL
    layers: int = 1

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("squeezing parameter must be >= 0")
        if self.layers < 1:
            raise ValueError("layer count must be >= 1")


@dataclass(frozen=True)
class NoiseBlocks:
    """Covariance blocks of the (data noise, rotated ancilla noise) pair.

    ``v_d_given_a`` is the Schur complement v_a - v_da^T v_d^{-1} v_da.
    """

    v_d: np.ndarray
    v_da: np.ndarray
    v_a: np.ndarray
    v_d_given_a: np.ndarray


def reshaped_noise_cm(r: float, sigma2: float) -> np.ndarray:
    """Covariance of the decoded channel noise on (q_d, p_d, q_a, p_a).

    Diagonal sigma^2 cosh(2r); data-ancilla cross terms -sigma^2 sinh(2r)
    on matching quadratures.
    """
    if r < 0 or sigma2 < 0:
        raise ValueError("r and sigma2 must be >= 0")
    c2 = np.cosh(2.0 * r)
    s2 = np.sinh(2.0 * r)
    v = sigma2 * np.diag([c2, c2, c2, c2])
    for i in range(2):
        v[i, i + 2] = v[i + 2, i] = -sigma2 * s2
    return v


def conditioning_blocks(v_z: np.ndarray) -> NoiseBlocks:
    """Blocks of (I2 (+) Omega) V_z (I2 (+) Omega^T): the joint covariance of
    the data noise and the symplectically rotated ancilla noise whose modular
    reduction is the syndrome."""
    v_z = np.asarray(v_z, dtype=float)
    rot = np.zeros((4, 4))
    rot[:2, :2] = np.eye(2)
    rot[2:, 2:] = symplectic_form(1)
    joint = rot @ v_z @ rot.T
    if abs(np.linalg.det(joint)) < 1e-300:
        raise ValueError("singular noise covariance")
    v_d = joint[:2, :2]
    v_da = joint[:2, 2:]
    v_a = joint[2:, 2:]
    v_dga = v_a - v_da.T @ np.linalg.solve(v_d, v_da)
    return NoiseBlocks(v_d=v_d, v_da=v_da, v_a=v_a, v_d_given_a=v_dga)


def mu_tilde(r: float) -> float:
    """Estimator gain 2 cosh(r) sinh(r) / (cosh^2(r) + sinh^2(r)) = tanh(2r)."""
    return np.tanh(2.0 * r)


def linear_estimator(r: float) -> np.ndarray:
    """Syndrome-to-displacement matrix: the regression of the data noise on
    the rotated ancilla noise, v_da @ v_a^{-1} of :func:`conditioning_blocks`.

    For a noiseless ancilla this reduces to mu_tilde(r) times the single-mode
    symplectic form: each data quadrature couples with gain tanh(2r) to the
    syndrome component that carries it, with the sign that subtracts noise.
    """
    return mu_tilde(r) * symplectic_form(1)


def effective_estimator_gain(r: float, sigma2: float, ancilla: GkpAncilla = IDEAL) -> float:
    """Per-quadrature regression gain of data noise on the pre-wrap syndrome.

    Equals mu_tilde(r) for an ideal ancilla and is reduced by the syndrome
    broadening of a finitely squeezed one.
    """
    var_w = sigma2 * np.cosh(2.0 * r) + ancilla.syndrome_noise_variance
    if var_w <= 0.0:
        return 0.0
    return sigma2 * np.sinh(2.0 * r) / var_w


def syndrome_reduce(x):
    """Reduce mod sqrt(2*pi) into [-sqrt(pi/2), sqrt(pi/2)], componentwise.

    Ties at exact half-lattice points round away from zero, for determinism.
    """
    x = np.asarray(x, dtype=float)
    n = np.sign(x) * np.floor(np.abs(x) / ELL + 0.5)
    out = x - n * ELL
    if out.ndim == 0:
        return float(out)
    return out


def wrapped_moments(var_w: float, n_cells_boost: int = 0, gl_order: int = _GL_ORDER):
    """(E[wrap(w)^2], E[w wrap(w)]) for w ~ N(0, var_w), wrap = mod-ell.

    Lattice cells [n*ell - ell/2, n*ell + ell/2] are summed out to where the
    neglected Gaussian mass is below 1e-12, and each cell is integrated by
    composite Gauss-Legendre panels no wider than one standard deviation, so
    narrow densities are resolved exactly.  ``n_cells_boost`` widens the
    truncation (used by the truncation-stability check).
    """
    if var_w < 0:
        raise ValueError("variance must be >= 0")
    if var_w == 0.0:
        return 0.0, 0.0
    sd = np.sqrt(var_w)
    w_max = _TAIL_SIGMA * sd
    n_cells = int(np.ceil(w_max / ELL + 0.5)) + n_cells_boost
    if n_cells > _MAX_CELLS:
        raise ValueError("lattice sum does not converge: variance too large")
    x_gl, w_gl = _gauss_legendre(gl_order)

    # Panel edges: cell boundaries over [0, upper] (integrands are even in w),
    # each cell subdivided so no panel is wider than one standard deviation.
    upper = min((n_cells + 0.5) * ELL, w_max)
    bounds = np.minimum(np.arange(n_cells + 2) * ELL - ELL / 2.0, upper)
    bounds[0] = 0.0
    pieces = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi <= lo:
            continue
        k = max(1, int(np.ceil((hi - lo) / sd)))
        pieces.append(np.linspace(lo, hi, k + 1)[1:] if pieces else np.linspace(lo, hi, k + 1))
    edges = np.concatenate(pieces)

    mids = (edges[1:] + edges[:-1]) / 2.0
    halfs = (edges[1:] - edges[:-1]) / 2.0
    w = mids[:, None] + halfs[:, None] * x_gl[None, :]
    pdf = np.exp(-0.5 * w * w / var_w) / (sd * np.sqrt(2.0 * np.pi))
    idx = np.sign(w) * np.floor(np.abs(w) / ELL + 0.5)
    rw = w - idx * ELL
    weights = halfs[:, None] * w_gl[None, :]
    m2 = 2.0 * float(np.sum(weights * rw * rw * pdf))
    m11 = 2.0 * float(np.sum(weights * w * rw * pdf))
    return m2, m11


def residual_variance(r: float, sigma2: float, ancilla: GkpAncilla = IDEAL,
                      n_cells_boost: int = 0) -> float:
    """Per-quadrature variance of the data noise after the corrective shift.

    Exact second-moment decomposition of a - phi*wrap(w):

        Var(a) - 2 phi Cov(a, w)/Var(w) E[w wrap(w)] + phi^2 E[wrap(w)^2]

    with phi the regression gain of the data noise on the pre-wrap syndrome.
    At r = 0 the gain vanishes and the channel noise is returned unchanged.
    """
    if r < 0 or sigma2 < 0:
        raise ValueError("r and sigma2 must be >= 0")
    if sigma2 == 0.0:
        return 0.0
    c2 = np.cosh(2.0 * r)
    var_d = sigma2 * c2
    var_w = var_d + ancilla.syndrome_noise_variance
    cov = sigma2 * np.sinh(2.0 * r)
    if cov == 0.0:
        return float(var_d)
    m2, m11 = wrapped_moments(var_w, n_cells_boost=n_cells_boost)
    phi = cov / var_w
    return float(var_d - 2.0 * phi * (cov / var_w) * m11 + phi * phi * m2)


_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def optimize_squeezing(sigma2: float, ancilla: GkpAncilla = IDEAL,
                       r_max: float = 3.0, coarse_points: int = 200) -> tuple[float, float]:
    """Minimize residual_variance over r in [0, r_max].

    Coarse grid scan followed by golden-section refinement around the best
    grid cell.  Returns (r_opt, minimum variance).
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    rs = np.linspace(0.0, r_max, coarse_points)
    vals = np.array([residual_variance(r, sigma2, ancilla) for r in rs])
    i = int(np.argmin(vals))
    a = rs[max(0, i - 1)]
    b = rs[min(len(rs) - 1, i + 1)]
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = residual_variance(c, sigma2, ancilla)
    fd = residual_variance(d, sigma2, ancilla)
    while b - a > 1e-10:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = residual_variance(c, sigma2, ancilla)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = residual_variance(d, sigma2, ancilla)
    r_opt = (a + b) / 2.0
    v_opt = residual_variance(r_opt, sigma2, ancilla)
    # never worse than no coding
    if v_opt > sigma2:
        return 0.0, float(sigma2)
    return float(r_opt), float(v_opt)


def lower_bound_variance(sigma2: float) -> float:
    """Capacity-based floor for single-layer correction: s^4 / (e (1-s^2)^2)."""
    if not 0.0 <= sigma2 < 1.0:
        raise ValueError("sigma2 must be in [0, 1)")
    return sigma2 ** 2 / (np.e * (1.0 - sigma2) ** 2)


def break_even(sigma2: float) -> float:
    """The no-coding reference level: the channel noise itself."""
    return float(sigma2)


def concat_variance(sigma_r2_single: float, layers: int) -> float:
    """Accumulated residual of ``layers`` identical one-by-one layers."""
    if layers < 1 or layers != int(layers):
        raise ValueError("layer count must be a positive integer")
    return float(layers) * float(sigma_r2_single)


def segment_noise(l_a_km: float, layers: int, alpha0_db_per_km: float = 0.2) -> float:
    """Compensated-channel noise of one of ``layers`` equal fiber segments."""
    from .channels import awgn_variance_preamp, fiber_transmittance

    l_seg = l_a_km / layers
    return awgn_variance_preamp(fiber_transmittance(l_seg, alpha0_db_per_km))


def concat_residual_variance(l_a_km: float, layers: int, ancilla: GkpAncilla = IDEAL,
                             alpha0_db_per_km: float = 0.2) -> tuple[float, float, float]:
    """Optimized concatenated residual for a link split into equal segments.

    Each segment is compensated and corrected independently; displacement
    noise accumulates linearly across segments.  Returns
    (total residual, per-segment residual, per-segment r_opt).
    """
    s2 = segment_noise(l_a_km, layers, alpha0_db_per_km)
    r_opt, v_seg = optimize_squeezing(s2, ancilla)
    return concat_variance(v_seg, layers), v_seg, r_opt
