"""Singer-form certificates (convex combinations of unitaries), trace-norm
smoothness diagnostics, and Birkhoff-James orthogonality checks.

A trace-norm dual witness is an operator-norm contraction; in a full
matrix block the extreme points of the unit ball are exactly the unitary
matrices, so every witness splits as a convex combination of unitaries.
The two-unitary averaging identity gives a minimal such split.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, SubspaceBasis, check_signature, norm, pairing
from .errors import NotAContraction, NotSmooth, ZeroElement
from .matrix_core import polar_decompose, rank_tolerance
from .solver import SolveOptions, solve_distance

UNITARY_TOL = 1e-10
SINGER_CHECK_TOL = 1e-8


@dataclass
class SingerCertificate:
    """Convex weights and blockwise-unitary elements whose weighted sum is
    a trace-norm dual witness; at most ``2 * dim(V) + 1`` terms are ever
    needed, and the averaging construction uses at most two."""

    weights: tuple
    unitaries: tuple  # of AlgebraElement

    def __post_init__(self):
        if len(self.weights) != len(self.unitaries):
            raise ValueError("weights and unitaries must have equal length")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be convex (nonnegative, sum 1)")

    @property
    def count(self) -> int:
        return len(self.weights)

    def combination(self) -> AlgebraElement:
        acc = self.unitaries[0] * self.weights[0]
        for lam, u in zip(self.weights[1:], self.unitaries[1:]):
            acc = acc + u * lam
        return acc


@dataclass
class SingerCheck:
    value: float
    feasible: bool


def _is_unitary(block, tol=UNITARY_TOL) -> bool:
    n = block.shape[0]
    return np.linalg.norm(block.conj().T @ block - np.eye(n)) <= tol


def singer_decompose(a: AlgebraElement) -> SingerCertificate:
    """Split an operator-norm contraction into an average of unitaries.

    Any contraction is the average of two unitaries: with a block SVD
    ``a = P diag(s) Q^H`` and ``D = diag(exp(i arccos(s)))``,
    ``a = (P D Q^H + P conj(D) Q^H) / 2``. Returns a single term when
    ``a`` is already blockwise unitary.

    Raises
    ------
    NotAContraction
        If ``norm(a, "operator") > 1 + 1e-10``.
    """
    if norm(a, "operator") > 1.0 + UNITARY_TOL:
        raise NotAContraction("operator norm exceeds one")
    if all(_is_unitary(b) for b in a.blocks):
        return SingerCertificate(weights=(1.0,), unitaries=(a,))
    u_plus, u_minus = [], []
    for b in a.blocks:
        p, s, qh = np.linalg.svd(b, full_matrices=True)
        d = np.exp(1j * np.arccos(np.clip(s, 0.0, 1.0)))
        u_plus.append((p * d) @ qh)
        u_minus.append((p * d.conjugate()) @ qh)
    sig = a.signature
    return SingerCertificate(
        weights=(0.5, 0.5),
        unitaries=(AlgebraElement(sig, u_plus), AlgebraElement(sig, u_minus)),
    )


def verify_singer(
    x: AlgebraElement,
    V: SubspaceBasis,
    v0: AlgebraElement,
    cert: SingerCertificate,
) -> SingerCheck:
    """Check a Singer certificate against a trace-norm distance problem.

    Feasibility requires (a) the weighted pairing with the residual
    ``x - v0`` to be real within 1e-8 and (b) the weighted pairing with
    every generator to vanish within 1e-8. The reported value is
    ``Re sum_i w_i pairing(u_i, x)``; on a feasible certificate it is a
    valid lower bound for the trace-norm distance, with equality at an
    optimal witness.
    """
    check_signature(x, v0)
    for u in cert.unitaries:
        check_signature(x, u)
        for b, n in zip(u.blocks, u.signature.block_dims):
            if not _is_unitary(b):
                raise ValueError("certificate contains a non-unitary block")
    comb = cert.combination()
    resid_pair = pairing(comb, x - v0)
    ok_real = abs(resid_pair.imag) <= SINGER_CHECK_TOL
    ok_ann = all(abs(pairing(comb, y)) <= SINGER_CHECK_TOL for y in V.basis)
    value = pairing(comb, x).real
    return SingerCheck(value=float(value), feasible=bool(ok_real and ok_ann))


def is_smooth_trace(x: AlgebraElement) -> bool:
    """Whether ``x`` is a smooth point of the trace norm.

    In a block matrix algebra this happens exactly when every block has
    full numerical rank, making the norming functional unique (the polar
    adjoint). Borderline ranks emit a warning rather than guessing.
    """
    if all(np.all(b == 0) for b in x.blocks):
        raise ZeroElement("smoothness is undefined at zero")
    smooth = True
    for b in x.blocks:
        s = np.linalg.svd(b, compute_uv=False)
        if s.size == 0 or s[0] == 0.0:
            return False
        tol = rank_tolerance(b.shape, s[0])
        if s[-1] <= tol:
            smooth = False
        elif s[-1] <= 10.0 * tol:
            warnings.warn(
                "smallest singular value within 10x of the rank threshold; "
                "smoothness call is borderline",
                stacklevel=2,
            )
    return smooth


def polar_adjoint(x: AlgebraElement) -> AlgebraElement:
    """Blockwise ``v^H`` of the polar decomposition ``x = v |x|``; for a
    full-rank element this is its unique trace-norm witness."""
    return AlgebraElement(
        x.signature, [polar_decompose(b).v.conj().T for b in x.blocks]
    )


def check_zero_best_approx(x: AlgebraElement, V: SubspaceBasis) -> bool:
    """For smooth ``x``: is zero a trace-norm best approximant from V?

    True exactly when the polar adjoint pairs to ~0 against every
    generator; in that case ``dist_1(x, V) = norm(x, "trace")``.

    Raises
    ------
    NotSmooth
        If ``x`` is not a smooth point (criterion only applies there).
    """
    if not is_smooth_trace(x):
        raise NotSmooth("criterion requires a trace-norm smooth point")
    vstar = polar_adjoint(x)
    return max(abs(pairing(vstar, y)) for y in V.basis) <= SINGER_CHECK_TOL


def bj_orthogonal(
    x: AlgebraElement, V: SubspaceBasis, kind: str,
    opts: SolveOptions | None = None,
) -> bool:
    """Birkhoff-James orthogonality of ``x`` to the subspace: true when no
    element of V improves on the zero approximant, i.e. the distance equals
    ``norm(x, kind)`` up to the solve tolerance."""
    opts = opts or SolveOptions()
    report = solve_distance(x, V, kind, opts)
    return report.primal_value >= norm(x, kind) - opts.tol
