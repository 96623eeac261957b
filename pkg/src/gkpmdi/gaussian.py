"""Symplectic and covariance-matrix primitives.

Conventions used throughout this module:

* Quadrature ordering is (q1, p1, q2, p2, ...).
* Covariance matrices here are in shot-noise units with vacuum variance 1,
  so a physical state satisfies V + i*Omega >= 0 and every symplectic
  eigenvalue is >= 1.  (Channel and code noise variances elsewhere in the
  package use the hbar = 1 convention with vacuum variance 1/2; conversion
  happens once, where those variances enter a covariance matrix.)
"""
from __future__ import annotations

import numpy as np

SYMPLECTIC_TOL = 1e-12
PHYSICALITY_TOL = 1e-9


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form, one (0, 1; -1, 0) block per mode."""
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    omega1 = np.array([[0.0, 1.0], [-1.0, 0.0]])
    out = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = omega1
    return out


def is_symplectic(s: np.ndarray, tol: float = SYMPLECTIC_TOL) -> bool:
    """Check S Omega S^T = Omega to within ``tol`` (max-norm)."""
    n = s.shape[0] // 2
    omega = symplectic_form(n)
    return bool(np.max(np.abs(s @ omega @ s.T - omega)) < tol)


def beamsplitter_symplectic(transmittance: float = 0.5) -> np.ndarray:
    """Two-mode beamsplitter on quadratures (q1, p1, q2, p2)."""
    t = np.sqrt(transmittance)
    r = np.sqrt(1.0 - transmittance)
    i2 = np.eye(2)
    return np.block([[t * i2, r * i2], [-r * i2, t * i2]])


def squeezer_symplectic(r: float) -> np.ndarray:
    """One-mode squeezer diag(e^-r, e^r)."""
    return np.diag([np.exp(-r), np.exp(r)])


def tms_symplectic(r: float) -> np.ndarray:
    """Two-mode squeezing built from a balanced beamsplitter sandwich.

    Composes B(1/2) . (S(r) (+) S(-r)) . B(1/2)^T, which squeezes the
    sum/difference quadratures of the pair.
    """
    b = beamsplitter_symplectic(0.5)
    mid = np.zeros((4, 4))
    mid[:2, :2] = squeezer_symplectic(r)
    mid[2:, 2:] = squeezer_symplectic(-r)
    return b @ mid @ b.T


def symplectic_eigenvalues(v: np.ndarray) -> tuple[float, ...]:
    """Symplectic spectrum of a covariance matrix, sorted descending.

    Uses the real route: with V = L L^T, the singular values of L^T Omega L
    are the symplectic eigenvalues, each appearing twice.  Values below
    1 - PHYSICALITY_TOL indicate an unphysical input and raise.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[0] % 2 or v.shape != v.T.shape:
        raise ValueError("covariance matrix must be square with even dimension")
    try:
        chol = np.linalg.cholesky(v)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance matrix must be positive-definite") from exc
    n = v.shape[0] // 2
    a = chol.T @ symplectic_form(n) @ chol
    sv = np.linalg.svd(a, compute_uv=False)
    nus = np.sort(sv)[::-1][::2]  # pairs of identical singular values
    if np.any(nus < 1.0 - PHYSICALITY_TOL):
        raise ValueError(f"unphysical state: symplectic eigenvalue {nus.min():.12g} < 1")
    return tuple(float(x) for x in nus)


def two_mode_symplectic_pair(a: float, b: float, c: float) -> tuple[float, float]:
    """Symplectic eigenvalues of [[a I2, c Z2], [c Z2, b I2]] in closed form.

    Returns (v_plus, v_minus) with v_plus >= v_minus.
    """
    disc = np.sqrt((a + b) ** 2 - 4.0 * c * c)
    return (disc + abs(b - a)) / 2.0, (disc - abs(b - a)) / 2.0


def h_function(v: float) -> float:
    """Bosonic entropy of a thermal mode with symplectic eigenvalue v, in bits.

    h(1) = 0 with the 0*log(0) = 0 convention.  Values in [1 - 1e-9, 1]
    are clamped to 1; smaller values raise.
    """
    if v < 1.0 - PHYSICALITY_TOL:
        raise ValueError(f"symplectic eigenvalue {v} < 1")
    if v <= 1.0:
        return 0.0
    up = (v + 1.0) / 2.0
    dn = (v - 1.0) / 2.0
    return up * np.log2(up) - dn * np.log2(dn)


def h_function_1p(e: float) -> float:
    """h(1 + e) for small e >= 0, evaluated without cancellation."""
    if e <= 0.0:
        return 0.0
    half = e / 2.0
    return (1.0 + half) * np.log1p(half) / np.log(2.0) - half * np.log2(half)


def schur_condition(block_a: np.ndarray, block_b: np.ndarray, cross: np.ndarray) -> np.ndarray:
    """Covariance of mode b after a heterodyne measurement of mode a.

    Computes B - C^T (A + I)^{-1} C for conformable blocks, where C is the
    a-to-b cross block (rows indexing mode a).  The result is symmetrized.
    """
    a = np.atleast_2d(np.asarray(block_a, dtype=float))
    b = np.atleast_2d(np.asarray(block_b, dtype=float))
    c = np.atleast_2d(np.asarray(cross, dtype=float))
    m = a + np.eye(a.shape[0])
    try:
        sol = np.linalg.solve(m, c)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular conditioning block") from exc
    out = b - c.T @ sol
    return (out + out.T) / 2.0
