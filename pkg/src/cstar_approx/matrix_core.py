"""Dense complex matrix kernel: SVD, Schatten norms, polar decomposition,
and the two proximal/projection operators used by the distance solver.

All routines accept anything ``np.asarray`` turns into a 2-D array and
promote to complex128. They are pure functions; nothing here keeps state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NonFinite

# Relative SVD tolerance; numerical ranks and certificate clusters derive
# from this (see rank_tolerance).
TOL_SVD = 1e-11

SCHATTEN_KINDS = ("operator", "trace")


def as_matrix(a) -> np.ndarray:
    """Validate and normalize a matrix input to a 2-D complex128 array.

    Raises
    ------
    NonFinite
        If any entry is NaN or Inf.
    ValueError
        If the input is not 2-D.
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise NonFinite("matrix contains NaN or Inf entries")
    return m


def _check_kind(kind: str) -> str:
    if kind not in SCHATTEN_KINDS:
        raise ValueError(f"kind must be one of {SCHATTEN_KINDS}, got {kind!r}")
    return kind


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``A = U @ diag(S) @ V.conj().T`` with S nonincreasing."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray  # columns are right singular vectors


@dataclass(frozen=True)
class PolarResult:
    """Polar decomposition ``A = v @ absx`` with v a partial isometry and
    absx Hermitian positive semidefinite."""

    v: np.ndarray
    absx: np.ndarray


def svd(a) -> SvdResult:
    """Singular value decomposition of a dense complex matrix.

    Parameters
    ----------
    a : array_like
        Matrix to factor; must be finite.

    Returns
    -------
    SvdResult
        ``u, s, v`` with orthonormal columns in ``u`` and ``v`` and
        ``s`` sorted nonincreasing.

    Raises
    ------
    NonFinite
        If the input contains NaN/Inf.
    NoConvergence
        If the underlying iteration fails to converge.
    """
    m = as_matrix(a)
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(f"SVD did not converge: {exc}") from exc
    return SvdResult(u=u, s=s, v=vh.conj().T)


def singular_values(a) -> np.ndarray:
    """Singular values only (nonincreasing); cheaper than a full svd()."""
    m = as_matrix(a)
    try:
        return np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NoConvergence(f"SVD did not converge: {exc}") from exc


def rank_tolerance(shape, top_singular_value: float) -> float:
    """Numerical rank threshold ``max(rows, cols) * TOL_SVD * s_max``."""
    return max(shape) * TOL_SVD * float(top_singular_value)


def schatten_norm(a, kind: str) -> float:
    """Schatten norm of a matrix.

    ``operator`` is the largest singular value, ``trace`` the sum of
    singular values.
    """
    _check_kind(kind)
    s = singular_values(a)
    if s.size == 0:
        return 0.0
    return float(s[0]) if kind == "operator" else float(s.sum())


def polar_decompose(a) -> PolarResult:
    """Polar decomposition ``A = v @ absx``.

    ``v = U_r @ V_r^H`` is built from the singular subspace of numerical
    rank r (threshold ``rank_tolerance``), so rank(v) equals the numerical
    rank of A; ``absx = V @ diag(S) @ V^H``. The zero matrix maps to
    ``v = 0`` (rank-0 partial isometry).

    Satisfies ``trace(v^H A) == schatten_norm(A, "trace")`` up to the rank
    cutoff.
    """
    res = svd(a)
    u, s, v = res.u, res.s, res.v
    if s.size == 0 or s[0] == 0.0:
        return PolarResult(v=np.zeros_like(as_matrix(a)), absx=v @ np.diag(s) @ v.conj().T)
    tol = rank_tolerance(np.asarray(a).shape, s[0])
    r = int(np.count_nonzero(s > tol))
    partial = u[:, :r] @ v[:, :r].conj().T
    absx = (v * s) @ v.conj().T
    return PolarResult(v=partial, absx=absx)


def _project_l1_simplex(s: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection of a nonnegative vector onto
    ``{t : t >= 0, sum(t) <= radius}``."""
    if s.sum() <= radius:
        return s.copy()
    u = np.sort(s)[::-1]
    cum = np.cumsum(u) - radius
    j = np.arange(1, u.size + 1)
    rho = j[u - cum / j > 0][-1]
    theta = cum[rho - 1] / rho
    return np.maximum(s - theta, 0.0)


def project_nuclear_ball(a, radius: float) -> np.ndarray:
    """Frobenius-nearest matrix with trace norm at most ``radius``.

    Realized by an SVD and Euclidean projection of the singular value
    vector onto the l1 ball of the given radius.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    res = svd(a)
    s_proj = _project_l1_simplex(res.s, radius)
    return (res.u * s_proj) @ res.v.conj().T


def prox_schatten(a, kind: str, step: float) -> np.ndarray:
    """Proximal map of ``step * schatten_norm(., kind)`` at ``a``.

    trace: singular value soft-thresholding by ``step``.
    operator: Moreau decomposition
    ``a - step * project_nuclear_ball(a / step, 1)``.
    """
    _check_kind(kind)
    if step <= 0:
        raise ValueError("step must be positive")
    m = as_matrix(a)
    if kind == "trace":
        res = svd(m)
        s_new = np.maximum(res.s - step, 0.0)
        return (res.u * s_new) @ res.v.conj().T
    return m - step * project_nuclear_ball(m / step, 1.0)
