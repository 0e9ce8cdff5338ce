"""Distance from a point to a subspace of a block matrix algebra, under the
operator norm or the trace norm.

The primal problem is ``min_c norm(x - sum_j c_j y_j, kind)`` over complex
coefficients. It is solved by ADMM on variables ``(c, Z)`` with the
consensus constraint ``Z = x - sum_j c_j y_j``: the Z-update is the
blockwise Schatten proximal map (exact for the direct sum because the
singular values of a block-diagonal element are the union of the block
singular values), and the c-update is a linear least-squares solve.

Every reported distance comes with a dual certificate: an element ``a`` of
the annihilator of the subspace with unit dual norm, whose pairing against
``x`` lower-bounds the distance. The certificate is what terminates the
iteration: the solve is accepted only when the primal/dual gap is within
tolerance, so a converged report is self-validating.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    AlgebraElement,
    AnnihilatorBasis,
    SubspaceBasis,
    annihilator_basis,
    check_signature,
    norm,
    pairing,
)
from .errors import CertificateNotFound, TooManyDimensions
from .matrix_core import TOL_SVD, _project_l1_simplex, _check_kind

# Feasibility and dual-norm slack for an accepted certificate.
FEAS_TOL = 1e-8
DUAL_NORM_TOL = 1e-8

# Certificate attempt cadence inside the ADMM loop.
CERT_EVERY = 200

# Iteration cap for the Dykstra face search.
DYKSTRA_ITERS = 400


@dataclass
class SolveOptions:
    """Knobs for :func:`solve_distance`.

    tol is the duality-gap target; the solver stops once an independently
    checkable certificate brings the gap below it.
    """

    tol: float = 1e-6
    max_iter: int = 20000
    penalty: float = 1.0
    seed: int = 0
    restarts: int = 3

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.penalty <= 0:
            raise ValueError("penalty must be positive")
        if self.restarts < 0:
            raise ValueError("restarts must be nonnegative")


@dataclass
class DualCertificate:
    """Feasible dual witness for a distance problem.

    For an operator-norm problem the witness has unit trace norm; for a
    trace-norm problem it has unit operator norm. ``value`` is
    ``|pairing(witness, x)|`` and lower-bounds the distance whenever the
    witness is feasible (pairs to ~0 against every subspace generator).
    """

    witness: AlgebraElement
    kind: str
    feasibility_residual: float
    dual_norm: float
    value: float


@dataclass
class DistanceReport:
    primal_value: float
    best_coeffs: np.ndarray
    best_approx: AlgebraElement
    certificate: DualCertificate | None
    gap: float
    iterations: int
    converged: bool


@dataclass
class VerificationRecord:
    """Outcome of an independent certificate check (no solver state)."""

    lower_bound: float
    feasible: bool
    dual_norm: float
    feasibility_residual: float
    value: float


@dataclass(frozen=True)
class GridSpec:
    """Resolution spec for the grid oracle.

    ``step`` is the final grid spacing per real axis. The returned value
    exceeds the true distance by at most
    ``step * sqrt(2k)/2 * sqrt(sum_j norm(y_j)^2)``.
    """

    step: float = 1e-3
    initial: int = 9
    max_cells: int = 500_000


def _dual_kind(kind: str) -> str:
    return "trace" if kind == "operator" else "operator"


# ---------------------------------------------------------------------------
# Block layout helpers (vec <-> block lists)


class _Layout:
    def __init__(self, signature):
        self.dims = signature.block_dims
        self.offsets = []
        pos = 0
        for n in self.dims:
            self.offsets.append((pos, n))
            pos += n * n
        self.total = pos
        # indices of blocks grouped by dimension, for batched SVD calls
        groups = {}
        for i, n in enumerate(self.dims):
            groups.setdefault(n, []).append(i)
        self.groups = list(groups.items())

    def unpack(self, v):
        return [v[o : o + n * n].reshape(n, n) for o, n in self.offsets]

    def pack(self, blocks):
        return np.concatenate([b.ravel() for b in blocks])

    def transpose_vec(self, v):
        """vec of the blockwise transpose; pairing(a, x) = vec(a) . tvec(x)."""
        return self.pack([b.T for b in self.unpack(v)])

    def svd_blocks(self, blocks, full_matrices=False):
        """SVD of every block, batching blocks of equal dimension."""
        out = [None] * len(blocks)
        for n, idxs in self.groups:
            if len(idxs) == 1:
                i = idxs[0]
                u, s, vh = np.linalg.svd(blocks[i], full_matrices=full_matrices)
                out[i] = (u, s, vh)
            else:
                stack = np.stack([blocks[i] for i in idxs])
                u, s, vh = np.linalg.svd(stack, full_matrices=full_matrices)
                for j, i in enumerate(idxs):
                    out[i] = (u[j], s[j], vh[j])
        return out

    def singvals(self, blocks):
        out = [None] * len(blocks)
        for n, idxs in self.groups:
            if len(idxs) == 1:
                out[idxs[0]] = np.linalg.svd(blocks[idxs[0]], compute_uv=False)
            else:
                stack = np.stack([blocks[i] for i in idxs])
                s = np.linalg.svd(stack, compute_uv=False)
                for j, i in enumerate(idxs):
                    out[i] = s[j]
        return out


def _norm_from_singvals(svals, kind: str) -> float:
    if kind == "operator":
        return float(max((s[0] if s.size else 0.0) for s in svals))
    return float(sum(s.sum() for s in svals))


def _element_prox(layout, blocks, kind, step):
    """Prox of ``step * norm(., kind)`` on a block element.

    trace: per-block singular value soft-thresholding.
    operator: Moreau decomposition with the joint (union over blocks)
    singular value vector projected onto the trace-norm unit ball.
    """
    svds = layout.svd_blocks(blocks)
    if kind == "trace":
        return [(u * np.maximum(s - step, 0.0)) @ vh for u, s, vh in svds]
    joint = np.concatenate([s for _, s, _ in svds])
    shrunk = joint - step * _project_l1_simplex(joint / step, 1.0)
    out, pos = [], 0
    for u, s, vh in svds:
        out.append((u * shrunk[pos : pos + s.size]) @ vh)
        pos += s.size
    return out


# ---------------------------------------------------------------------------
# Shared solver/certificate context


class _Context:
    """Precomputed linear data for one (x, V, kind) problem."""

    def __init__(self, x: AlgebraElement, V: SubspaceBasis, kind: str):
        check_signature(x, V.basis[0])
        self.kind = _check_kind(kind)
        self.dual_kind = _dual_kind(kind)
        self.x = x
        self.V = V
        self.layout = _Layout(x.signature)
        self.B = np.column_stack([y.vec() for y in V.basis])  # A(c) = B @ c
        self.pinvB = np.linalg.pinv(self.B)
        # row j of C implements a -> pairing(a, y_j) on vec(a)
        self.C = np.vstack([self.layout.transpose_vec(y.vec()) for y in V.basis])
        self.ann: AnnihilatorBasis = annihilator_basis(V)
        if len(self.ann.basis):
            self.Nmat = np.column_stack([b.vec() for b in self.ann.basis])
        else:
            self.Nmat = np.zeros((self.layout.total, 0))
        self.xv = x.vec()
        self.xTv = self.layout.transpose_vec(self.xv)

    def dual_norm_of(self, blocks) -> float:
        return _norm_from_singvals(self.layout.singvals(blocks), self.dual_kind)


@dataclass
class _Candidate:
    vec: np.ndarray
    value: float
    feasibility: float
    dual_norm: float


def _polish(ctx: _Context, a_vec: np.ndarray, resid_tvec: np.ndarray):
    """Project a raw witness onto the annihilator, normalize its dual norm
    to one, and rotate its phase so it pairs real-nonnegative with the
    residual. Returns None when the projection collapses."""
    if ctx.Nmat.shape[1] == 0:
        return None
    av = ctx.Nmat @ (ctx.Nmat.conj().T @ a_vec)
    dn = ctx.dual_norm_of(ctx.layout.unpack(av))
    if dn < 1e-12:
        return None
    av = av / dn
    z = np.dot(av, resid_tvec)
    if abs(z) > 0:
        av = av * (z.conjugate() / abs(z))
    value = abs(np.dot(av, ctx.xTv))
    feas = float(np.abs(ctx.C @ av).max())
    dn_final = ctx.dual_norm_of(ctx.layout.unpack(av))
    return _Candidate(vec=av, value=value, feasibility=feas, dual_norm=dn_final)


def _better(a: _Candidate | None, b: _Candidate | None):
    if a is None:
        return b
    if b is None:
        return a
    return b if b.value > a.value else a


# ---------------------------------------------------------------------------
# Face search: find a norming witness of the residual inside the annihilator


def _hvec_dim(c):
    return c * c


def _hvec(Z):
    """Isometric real coordinates of a Hermitian matrix."""
    c = Z.shape[0]
    iu = np.triu_indices(c, k=1)
    return np.concatenate(
        [Z.diagonal().real,
         np.sqrt(2.0) * Z[iu].real,
         np.sqrt(2.0) * Z[iu].imag]
    )


def _unhvec(z, c):
    Z = np.zeros((c, c), dtype=np.complex128)
    Z[np.diag_indices(c)] = z[:c]
    iu = np.triu_indices(c, k=1)
    m = iu[0].size
    off = (z[c : c + m] + 1j * z[c + m : c + 2 * m]) / np.sqrt(2.0)
    Z[iu] = off
    Z[(iu[1], iu[0])] = off.conjugate()
    return Z


def _face_thresholds(dims):
    base = max(dims) * TOL_SVD
    ladder = [base, 1e-8, 1e-6, 1e-4, 1e-2]
    return sorted(set(ladder))


def _face_candidates_operator(ctx: _Context, svds, resid_tvec):
    """Witnesses from the norming face of the residual's operator norm.

    The face is parametrized by Hermitian PSD blocks Z_b on the top
    singular cluster of each block (joint trace one); feasibility against
    the subspace is imposed by Dykstra alternating projections between the
    PSD cone and the affine constraint set.
    """
    sigma_max = max((s[0] if s.size else 0.0) for _, s, _ in svds)
    if sigma_max <= 0:
        return
    k = len(ctx.V.basis)
    seen = set()
    for tau in _face_thresholds(ctx.layout.dims):
        cutoff = sigma_max * (1.0 - tau)
        cluster = [
            (i, int(np.count_nonzero(s >= cutoff))) for i, (_, s, _) in enumerate(svds)
        ]
        cluster = [(i, c) for i, c in cluster if c > 0]
        key = tuple(cluster)
        if key in seen:
            continue
        seen.add(key)
        # face basis: a_b = Vc_b @ Z_b @ Uc_b^H on participating blocks
        Ucs, Vcs, blocks_idx, csizes = [], [], [], []
        for i, c in cluster:
            u, _, vh = svds[i]
            Ucs.append(u[:, :c])
            Vcs.append(vh.conj().T[:, :c])
            blocks_idx.append(i)
            csizes.append(c)
        total_c2 = sum(_hvec_dim(c) for c in csizes)

        def assemble(z):
            blocks = [np.zeros((n, n), dtype=np.complex128) for n in ctx.layout.dims]
            pos = 0
            for Uc, Vc, bi, c in zip(Ucs, Vcs, blocks_idx, csizes):
                Z = _unhvec(z[pos : pos + _hvec_dim(c)], c)
                blocks[bi] = Vc @ Z @ Uc.conj().T
                pos += _hvec_dim(c)
            return blocks

        if total_c2 == 1:
            # singleton face: Z = 1, nothing to search
            cand = _polish(ctx, ctx.layout.pack(assemble(np.ones(1))), resid_tvec)
            if cand is not None:
                yield cand
            continue

        # real-linear constraint rows: joint trace = 1, pairing(a, y_j) = 0
        ncols = total_c2
        Acon = np.zeros((1 + 2 * k, ncols))
        bcon = np.zeros(1 + 2 * k)
        bcon[0] = 1.0
        pos = 0
        for Uc, Vc, bi, c in zip(Ucs, Vcs, blocks_idx, csizes):
            Ms = [Uc.conj().T @ y.blocks[bi] @ Vc for y in ctx.V.basis]
            for local in range(_hvec_dim(c)):
                e = np.zeros(_hvec_dim(c))
                e[local] = 1.0
                Z = _unhvec(e, c)
                col = pos + local
                Acon[0, col] = Z.diagonal().real.sum()
                for j, M in enumerate(Ms):
                    val = np.einsum("ij,ji->", Z, M)
                    Acon[1 + 2 * j, col] = val.real
                    Acon[2 + 2 * j, col] = val.imag
            pos += _hvec_dim(c)
        pinvA = np.linalg.pinv(Acon)

        def proj_affine(z):
            return z - pinvA @ (Acon @ z - bcon)

        def proj_psd(z):
            out = np.empty_like(z)
            pos = 0
            for c in csizes:
                Z = _unhvec(z[pos : pos + _hvec_dim(c)], c)
                w, Q = np.linalg.eigh(Z)
                Zp = (Q * np.maximum(w, 0.0)) @ Q.conj().T
                out[pos : pos + _hvec_dim(c)] = _hvec(Zp)
                pos += _hvec_dim(c)
            return out

        z = np.zeros(ncols)
        pos = 0
        for c in csizes:  # uniform start
            Z0 = np.eye(c) / sum(csizes)
            z[pos : pos + _hvec_dim(c)] = _hvec(Z0)
            pos += _hvec_dim(c)
        p = np.zeros(ncols)
        q = np.zeros(ncols)
        for _ in range(DYKSTRA_ITERS):
            y1 = proj_psd(z + p)
            p = z + p - y1
            z_new = proj_affine(y1 + q)
            q = y1 + q - z_new
            if np.linalg.norm(z_new - z) < 1e-14:
                z = z_new
                break
            z = z_new
        z = proj_psd(z)  # final point in the cone; affine slack fixed by polish
        cand = _polish(ctx, ctx.layout.pack(assemble(z)), resid_tvec)
        if cand is not None:
            yield cand


def _face_candidates_trace(ctx: _Context, svds_full, resid_tvec):
    """Witnesses from the norming face of the residual's trace norm.

    On each block the witness is ``V_r U_r^H`` on the singular support plus
    a free contraction on the orthogonal complement; Dykstra alternates
    between the affine feasibility set and the operator-norm unit ball.
    """
    sigma_max = max((s[0] if s.size else 0.0) for _, s, _ in svds_full)
    if sigma_max <= 0:
        return
    k = len(ctx.V.basis)
    seen = set()
    for tau in _face_thresholds(ctx.layout.dims):
        cutoff = sigma_max * tau
        ranks = [int(np.count_nonzero(s > cutoff)) for _, s, _ in svds_full]
        key = tuple(ranks)
        if key in seen:
            continue
        seen.add(key)
        fixed, QUs, QVs, wsizes = [], [], [], []
        for (u, s, vh), r, n in zip(svds_full, ranks, ctx.layout.dims):
            v = vh.conj().T
            fixed.append(v[:, :r] @ u[:, :r].conj().T)
            QUs.append(u[:, r:])
            QVs.append(v[:, r:])
            wsizes.append(n - r)
        total_w = sum(m * m for m in wsizes)
        fixed_vec = ctx.layout.pack(fixed)
        if total_w == 0:
            cand = _polish(ctx, fixed_vec, resid_tvec)
            if cand is not None:
                yield cand
            continue

        # complex-affine constraints: sum_b Tr(W_b N_jb) = -pairing(fixed, y_j)
        Aw = np.zeros((k, total_w), dtype=np.complex128)
        bw = np.empty(k, dtype=np.complex128)
        for j, y in enumerate(ctx.V.basis):
            pos = 0
            for QU, QV, bi in zip(QUs, QVs, range(len(wsizes))):
                m = wsizes[bi]
                if m:
                    N = QU.conj().T @ y.blocks[bi] @ QV
                    Aw[j, pos : pos + m * m] = N.T.ravel()
                pos += m * m
            bw[j] = -np.dot(fixed_vec, ctx.layout.transpose_vec(y.vec()))
        pinvAw = np.linalg.pinv(Aw)

        def proj_affine(w):
            return w - pinvAw @ (Aw @ w - bw)

        def proj_ball(w):
            out = np.empty_like(w)
            pos = 0
            for m in wsizes:
                if m:
                    W = w[pos : pos + m * m].reshape(m, m)
                    u, s, vh = np.linalg.svd(W, full_matrices=False)
                    out[pos : pos + m * m] = ((u * np.minimum(s, 1.0)) @ vh).ravel()
                pos += m * m
            return out

        def assemble(w):
            blocks = []
            pos = 0
            for F, QU, QV, m in zip(fixed, QUs, QVs, wsizes):
                if m:
                    W = w[pos : pos + m * m].reshape(m, m)
                    blocks.append(F + QV @ W @ QU.conj().T)
                else:
                    blocks.append(F)
                pos += m * m
            return blocks

        w = np.zeros(total_w, dtype=np.complex128)
        p = np.zeros_like(w)
        q = np.zeros_like(w)
        for _ in range(DYKSTRA_ITERS):
            y1 = proj_ball(w + p)
            p = w + p - y1
            w_new = proj_affine(y1 + q)
            q = y1 + q - w_new
            if np.linalg.norm(w_new - w) < 1e-14:
                w = w_new
                break
            w = w_new
        w = proj_ball(w)
        cand = _polish(ctx, ctx.layout.pack(assemble(w)), resid_tvec)
        if cand is not None:
            yield cand


def _face_search(ctx: _Context, resid_blocks):
    resid_tvec = ctx.layout.pack([b.T for b in resid_blocks])
    best = None
    if ctx.kind == "operator":
        svds = ctx.layout.svd_blocks(resid_blocks)
        for cand in _face_candidates_operator(ctx, svds, resid_tvec):
            best = _better(best, cand)
    else:
        svds_full = ctx.layout.svd_blocks(resid_blocks, full_matrices=True)
        for cand in _face_candidates_trace(ctx, svds_full, resid_tvec):
            best = _better(best, cand)
    return best


# ---------------------------------------------------------------------------
# ADMM core


@dataclass
class _RunResult:
    c: np.ndarray
    primal: float
    cert: _Candidate | None
    gap: float
    iterations: int
    converged: bool


def _admm_run(ctx: _Context, c0, tol, max_iter, rho):
    layout = ctx.layout
    xv = ctx.xv
    B, pinvB = ctx.B, ctx.pinvB
    step = 1.0 / rho
    res_target = tol / 10.0

    c = np.asarray(c0, dtype=np.complex128)
    Zv = xv - B @ c
    Uv = np.zeros_like(xv)

    best_primal = _norm_from_singvals(layout.singvals(layout.unpack(Zv)), ctx.kind)
    best_c = c.copy()
    best_cert = None
    gap = best_primal
    converged = False
    close_since = None

    def attempt(c_now, Uv_now, with_face=False):
        nonlocal best_primal, best_c, best_cert, gap
        resid_v = xv - B @ c_now
        resid_blocks = layout.unpack(resid_v)
        primal = _norm_from_singvals(layout.singvals(resid_blocks), ctx.kind)
        if primal < best_primal:
            best_primal = primal
            best_c = c_now.copy()
        # dual-variable witness: -rho * U^H satisfies the subgradient
        # optimality of the prox step exactly
        a0 = layout.pack([b.conj().T for b in layout.unpack(-rho * Uv_now)])
        cand = _polish(ctx, a0, layout.pack([b.T for b in resid_blocks]))
        if cand is not None and cand.feasibility <= FEAS_TOL:
            best_cert = _better(best_cert, cand)
        gap = best_primal - (best_cert.value if best_cert else 0.0)
        if with_face and gap > tol and best_primal > tol:
            # norming-face search of the current residual; decisive when the
            # dual variable is still split across near-tied blocks
            face = _face_search(ctx, resid_blocks)
            if face is not None and face.feasibility <= FEAS_TOL:
                best_cert = _better(best_cert, face)
            gap = best_primal - (best_cert.value if best_cert else 0.0)
        return gap <= tol or best_primal <= tol

    for it in range(1, max_iter + 1):
        c = pinvB @ (xv - Zv - Uv)
        Acv = B @ c
        Zv_new_blocks = _element_prox(layout, layout.unpack(xv - Acv - Uv), ctx.kind, step)
        Zv_new = layout.pack(Zv_new_blocks)
        r = Acv + Zv_new - xv
        Uv = Uv + r
        s_dual = rho * np.linalg.norm(B.conj().T @ (Zv_new - Zv))
        Zv = Zv_new
        prim_res = np.linalg.norm(r)

        # small residuals only schedule certificate attempts; convergence
        # itself is decided by the certified gap, which is sound on its own
        res_ok = max(prim_res, s_dual) <= res_target
        if res_ok and close_since is None:
            close_since = it
        checkpoint = it % CERT_EVERY == 0 or it == max_iter
        due = checkpoint or (
            res_ok and (close_since == it or (it - close_since) % 50 == 0)
        )
        if due and attempt(c, Uv, with_face=checkpoint):
            converged = True
            break

    if not converged:
        # one last polish on the best coefficients found
        attempt(best_c, Uv, with_face=True)
        converged = gap <= tol or best_primal <= tol
        it = max_iter

    return _RunResult(
        c=best_c, primal=best_primal, cert=best_cert, gap=gap,
        iterations=it, converged=converged,
    )


def solve_distance(
    x: AlgebraElement, V: SubspaceBasis, kind: str, opts: SolveOptions | None = None
) -> DistanceReport:
    """Distance from ``x`` to ``span(V)`` in the chosen norm, with a best
    approximant and a dual certificate.

    The report's ``gap`` is ``primal_value - certificate.value``; when
    ``gap <= opts.tol`` the reported distance is certified within the
    tolerance by weak duality alone. On iteration-cap exhaustion the best
    report so far is returned with ``converged=False`` (never a wrong
    certified value).
    """
    opts = opts or SolveOptions()
    _check_kind(kind)
    check_signature(x, V.basis[0])
    scale = x.frobenius_norm()
    k = len(V.basis)

    if scale == 0.0:
        zero = AlgebraElement.zeros(x.signature)
        return DistanceReport(
            primal_value=0.0, best_coeffs=np.zeros(k, dtype=np.complex128),
            best_approx=zero, certificate=None, gap=0.0, iterations=0,
            converged=True,
        )

    xn = x / scale
    ctx_n = _Context(xn, V, kind)
    tol_n = opts.tol / scale

    rng = np.random.default_rng(opts.seed)
    starts = [np.zeros(k, dtype=np.complex128)]
    base = np.linalg.norm(ctx_n.pinvB @ ctx_n.xv)
    for _ in range(opts.restarts):
        starts.append(
            (rng.standard_normal(k) + 1j * rng.standard_normal(k))
            * max(base, 1.0)
        )

    total_iters = 0
    best_run = None
    for c0 in starts:
        run = _admm_run(ctx_n, c0, tol_n, opts.max_iter, opts.penalty)
        total_iters += run.iterations
        if best_run is None:
            best_run = run
        else:
            # prefer converged runs, then smaller primal, then smaller |c|
            cand_key = (not run.converged, run.primal)
            best_key = (not best_run.converged, best_run.primal)
            if cand_key < best_key or (
                run.converged == best_run.converged
                and abs(run.primal - best_run.primal) <= tol_n
                and np.linalg.norm(run.c) < np.linalg.norm(best_run.c)
            ):
                best_run = run
        if best_run.converged:
            break

    cert_cand = best_run.cert
    if not best_run.converged or cert_cand is None:
        # face-of-the-residual search as a fallback certificate source
        resid_blocks = ctx_n.layout.unpack(ctx_n.xv - ctx_n.B @ best_run.c)
        face = _face_search(ctx_n, resid_blocks)
        if face is not None and face.feasibility <= FEAS_TOL:
            cert_cand = _better(cert_cand, face)

    primal = best_run.primal * scale
    coeffs = best_run.c * scale
    approx = AlgebraElement.from_vec(x.signature, ctx_n.B @ coeffs)

    certificate = None
    gap = primal
    if cert_cand is not None:
        witness = AlgebraElement.from_vec(x.signature, cert_cand.vec)
        value = float(cert_cand.value * scale)
        certificate = DualCertificate(
            witness=witness, kind=kind,
            feasibility_residual=float(cert_cand.feasibility),
            dual_norm=float(cert_cand.dual_norm), value=value,
        )
        gap = primal - value
    converged = bool(best_run.converged and (gap <= opts.tol or primal <= opts.tol))

    return DistanceReport(
        primal_value=float(primal), best_coeffs=coeffs, best_approx=approx,
        certificate=certificate, gap=float(gap), iterations=int(total_iters),
        converged=converged,
    )


def extract_certificate(
    x: AlgebraElement, report: DistanceReport, V: SubspaceBasis, kind: str
) -> DualCertificate:
    """Recover a dual certificate from a report's residual alone.

    Searches the norming face of ``x - best_approx`` (top singular cluster
    for the operator norm, singular support plus free complement for the
    trace norm) intersected with the annihilator of V. Raises
    :class:`CertificateNotFound` if no candidate reaches the feasibility
    tolerance.
    """
    if report.primal_value <= 0:
        raise ValueError("certificate extraction requires a positive distance")
    ctx = _Context(x, V, kind)
    resid = x - report.best_approx
    best = _face_search(ctx, list(resid.blocks))
    if best is None or best.feasibility > FEAS_TOL:
        achieved = None if best is None else best.feasibility
        gap = None if best is None else report.primal_value - best.value
        raise CertificateNotFound(
            f"face search failed (feasibility residual {achieved}, gap {gap})",
            residual=achieved, gap=gap,
        )
    return DualCertificate(
        witness=AlgebraElement.from_vec(x.signature, best.vec), kind=kind,
        feasibility_residual=best.feasibility, dual_norm=best.dual_norm,
        value=best.value,
    )


def verify_certificate(
    x: AlgebraElement, V: SubspaceBasis, cert: DualCertificate
) -> VerificationRecord:
    """Independently recheck a certificate from its raw data.

    Recomputes the dual norm, the feasibility residual against every
    generator, and the pairing value; trusts nothing from the solver.
    ``lower_bound = value / max(dual_norm, 1)`` is a valid lower bound on
    the distance whenever ``feasible`` is True.
    """
    a = cert.witness
    check_signature(x, a)
    feas = max(abs(pairing(a, y)) for y in V.basis)
    dn = norm(a, _dual_kind(cert.kind))
    value = abs(pairing(a, x))
    feasible = feas <= FEAS_TOL and dn <= 1.0 + DUAL_NORM_TOL
    lower = value / max(dn, 1.0)
    return VerificationRecord(
        lower_bound=lower, feasible=feasible, dual_norm=dn,
        feasibility_residual=feas, value=value,
    )


# ---------------------------------------------------------------------------
# Grid oracle


def brute_force_distance(
    x: AlgebraElement, V: SubspaceBasis, kind: str, grid: GridSpec | None = None
) -> float:
    """Grid evaluation of ``min_c norm(x - sum c_j y_j)`` for k <= 2.

    Exhaustive grid over the complex coefficient box of radius
    ``2 * norm(x) / min_j norm(y_j)`` (which must contain every minimizer),
    refined by sound Lipschitz branch-and-bound: a cell is discarded only
    when its center value minus the Lipschitz slack provably exceeds the
    best value seen. The result always upper-bounds the true distance and
    exceeds it by at most ``step * sqrt(2k)/2 * sqrt(sum_j norm(y_j)^2)``.
    """
    grid = grid or GridSpec()
    _check_kind(kind)
    check_signature(x, V.basis[0])
    k = len(V.basis)
    if k > 2:
        raise TooManyDimensions(f"grid oracle supports k <= 2, got {k}")

    layout = _Layout(x.signature)
    norms_y = [norm(y, kind) for y in V.basis]
    norm_x = norm(x, kind)
    if norm_x == 0.0:
        return 0.0
    radius = 2.0 * norm_x / min(norms_y)
    dims = 2 * k
    lip = float(np.sqrt(sum(n * n for n in norms_y)))

    Y = [
        np.stack([y.blocks[i] for y in V.basis])
        for i in range(x.signature.num_blocks)
    ]
    xb = x.blocks

    def evaluate(centers):
        # centers: (M, 2k) real -> objective values (M,)
        Cc = centers[:, :k] + 1j * centers[:, k:]
        vals = None
        for i, n in enumerate(layout.dims):
            resid = xb[i][None, :, :] - np.einsum("mk,kij->mij", Cc, Y[i])
            s = np.linalg.svd(resid, compute_uv=False)
            contrib = s[:, 0] if kind == "operator" else s.sum(axis=1)
            if vals is None:
                vals = contrib.copy()
            else:
                vals = np.maximum(vals, contrib) if kind == "operator" else vals + contrib
        return vals

    n0 = max(2, grid.initial)
    h = radius / n0
    axis = np.linspace(-radius + h, radius - h, n0)
    centers = np.stack(
        np.meshgrid(*([axis] * dims), indexing="ij"), axis=-1
    ).reshape(-1, dims)

    best = np.inf
    while True:
        vals = np.empty(centers.shape[0])
        for lo in range(0, centers.shape[0], 65536):
            vals[lo : lo + 65536] = evaluate(centers[lo : lo + 65536])
        best = min(best, float(vals.min()))
        if 2 * h <= grid.step:
            break
        slack = lip * h * np.sqrt(dims)
        keep = centers[vals - slack <= best + 1e-12]
        if keep.shape[0] * (2**dims) > grid.max_cells:
            # keep the most promising cells within budget
            order = np.argsort(vals[vals - slack <= best + 1e-12])
            keep = keep[order[: grid.max_cells // (2**dims)]]
        h /= 2.0
        shifts = np.stack(
            np.meshgrid(*([np.array([-h, h])] * dims), indexing="ij"), axis=-1
        ).reshape(-1, dims)
        centers = (keep[:, None, :] + shifts[None, :, :]).reshape(-1, dims)
    return best
