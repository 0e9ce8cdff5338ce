"""Finite-dimensional C*-algebra structure: block elements of
``M_{n_1}(C) (+) ... (+) M_{n_p}(C)``, the two norms, the trace pairing,
and annihilator computation.

The algebra norm is the max of block operator norms; its predual norm is
the sum of block trace norms. The pairing ``(a, x) -> sum_i Tr(a_i x_i)``
is bilinear (no conjugation) and implements the duality between them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DependentBasis, SignatureMismatch
from .matrix_core import as_matrix, schatten_norm, singular_values

# Relative independence threshold for subspace bases (smallest stacked
# singular value vs. largest).
BASIS_INDEPENDENCE_RTOL = 1e-8

# Annihilator elements must pair to zero against every generator within this.
ANNIHILATOR_TOL = 1e-10


@dataclass(frozen=True)
class AlgebraSignature:
    """Block dimensions ``(n_1, ..., n_p)`` of the algebra."""

    block_dims: tuple

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        if len(dims) < 1 or any(n < 1 for n in dims):
            raise ValueError("signature needs at least one block, all dims >= 1")
        object.__setattr__(self, "block_dims", dims)

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def total_dim(self) -> int:
        """Complex dimension ``sum(n_i^2)`` of the algebra."""
        return int(sum(n * n for n in self.block_dims))


class AlgebraElement:
    """A point ``x = (x_1, ..., x_p)`` of the block algebra.

    Blocks are stored as immutable complex128 arrays of the sizes the
    signature dictates.
    """

    __slots__ = ("signature", "blocks")

    def __init__(self, signature: AlgebraSignature, blocks):
        # copy so freezing never touches a caller-owned array
        blocks = tuple(as_matrix(b).copy() for b in blocks)
        if len(blocks) != signature.num_blocks:
            raise ValueError(
                f"expected {signature.num_blocks} blocks, got {len(blocks)}"
            )
        for b, n in zip(blocks, signature.block_dims):
            if b.shape != (n, n):
                raise ValueError(f"block of shape {b.shape} does not match dim {n}")
            b.setflags(write=False)
        self.signature = signature
        self.blocks = blocks

    @classmethod
    def zeros(cls, signature: AlgebraSignature) -> "AlgebraElement":
        return cls(signature, [np.zeros((n, n)) for n in signature.block_dims])

    @classmethod
    def from_vec(cls, signature: AlgebraSignature, vec) -> "AlgebraElement":
        """Inverse of :meth:`vec`: unpack a length ``sum(n_i^2)`` vector."""
        vec = np.asarray(vec, dtype=np.complex128).ravel()
        if vec.size != signature.total_dim:
            raise ValueError("vector length does not match signature")
        blocks, pos = [], 0
        for n in signature.block_dims:
            blocks.append(vec[pos : pos + n * n].reshape(n, n))
            pos += n * n
        return cls(signature, blocks)

    def vec(self) -> np.ndarray:
        """Row-major flattening of all blocks, concatenated."""
        return np.concatenate([b.ravel() for b in self.blocks])

    def conj_transpose(self) -> "AlgebraElement":
        return AlgebraElement(self.signature, [b.conj().T for b in self.blocks])

    def frobenius_norm(self) -> float:
        return float(np.sqrt(sum(np.vdot(b, b).real for b in self.blocks)))

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        check_signature(self, other)
        return AlgebraElement(
            self.signature, [a + b for a, b in zip(self.blocks, other.blocks)]
        )

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        check_signature(self, other)
        return AlgebraElement(
            self.signature, [a - b for a, b in zip(self.blocks, other.blocks)]
        )

    def __mul__(self, scalar) -> "AlgebraElement":
        return AlgebraElement(self.signature, [scalar * b for b in self.blocks])

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "AlgebraElement":
        return AlgebraElement(self.signature, [b / scalar for b in self.blocks])

    def __neg__(self) -> "AlgebraElement":
        return self * (-1.0)

    def __repr__(self):
        return f"AlgebraElement(dims={self.signature.block_dims})"


def check_signature(a: AlgebraElement, b: AlgebraElement):
    if a.signature.block_dims != b.signature.block_dims:
        raise SignatureMismatch(
            f"{a.signature.block_dims} vs {b.signature.block_dims}"
        )


def norm(x: AlgebraElement, kind: str) -> float:
    """Algebra norm of an element: ``operator`` is the max of block operator
    norms, ``trace`` the sum of block trace norms."""
    vals = [schatten_norm(b, kind) for b in x.blocks]
    return float(max(vals)) if kind == "operator" else float(sum(vals))


def pairing(a: AlgebraElement, x: AlgebraElement) -> complex:
    """Trace pairing ``sum_i Tr(a_i x_i)``; bilinear in both arguments."""
    check_signature(a, x)
    return complex(
        sum(np.einsum("ij,ji->", ab, xb) for ab, xb in zip(a.blocks, x.blocks))
    )


class SubspaceBasis:
    """Linearly independent elements ``y_1, ..., y_k`` spanning a subspace.

    Independence is checked at construction: the smallest singular value of
    the stacked vectorizations must exceed ``BASIS_INDEPENDENCE_RTOL`` times
    the largest, else :class:`DependentBasis` is raised.
    """

    __slots__ = ("signature", "basis")

    def __init__(self, signature: AlgebraSignature, basis):
        basis = tuple(basis)
        if len(basis) < 1:
            raise ValueError("basis must contain at least one element")
        for y in basis:
            if y.signature.block_dims != signature.block_dims:
                raise SignatureMismatch("basis element signature differs")
        stacked = np.column_stack([y.vec() for y in basis])
        s = singular_values(stacked)
        if s[0] == 0.0 or s[-1] <= BASIS_INDEPENDENCE_RTOL * s[0]:
            raise DependentBasis(
                f"smallest/largest stacked singular value ratio "
                f"{0.0 if s[0] == 0 else s[-1] / s[0]:.3e}"
            )
        self.signature = signature
        self.basis = basis

    def __len__(self):
        return len(self.basis)


@dataclass(frozen=True)
class AnnihilatorBasis:
    """Frobenius-orthonormal basis of ``{a : pairing(a, y_j) = 0 for all j}``."""

    signature: AlgebraSignature
    basis: tuple  # of AlgebraElement

    def __len__(self):
        return len(self.basis)


def _constraint_matrix(V: SubspaceBasis) -> np.ndarray:
    """Rows implement ``a -> pairing(a, y_j)`` on vectorized elements.

    ``Tr(a_i y_i) = vec(a_i) . vec(y_i^T)``, so row j is the concatenation
    of ``vec(y_{j,i}^T)`` over blocks.
    """
    rows = [
        np.concatenate([b.T.ravel() for b in y.blocks]) for y in V.basis
    ]
    return np.vstack(rows)


def annihilator_basis(V: SubspaceBasis) -> AnnihilatorBasis:
    """Orthonormal basis of the annihilator of ``span(V)``.

    Computed as the null space (via SVD) of the ``k x sum(n_i^2)``
    constraint matrix. Raises :class:`DependentBasis` when the constraint
    rows are rank-deficient.
    """
    C = _constraint_matrix(V)
    k, D = C.shape
    u, s, vh = np.linalg.svd(C, full_matrices=True)
    tol = max(C.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.count_nonzero(s > tol))
    if rank < k:
        raise DependentBasis("pairing constraint matrix is rank deficient")
    null_vecs = vh[rank:].conj()  # rows span the null space, orthonormal
    elements = tuple(
        AlgebraElement.from_vec(V.signature, row) for row in null_vecs
    )
    return AnnihilatorBasis(signature=V.signature, basis=elements)


def project_to_annihilator(a: AlgebraElement, N: AnnihilatorBasis) -> AlgebraElement:
    """Frobenius-orthogonal projection of ``a`` onto ``span(N)``."""
    if a.signature.block_dims != N.signature.block_dims:
        raise SignatureMismatch("element and annihilator signatures differ")
    v = a.vec()
    B = np.column_stack([b.vec() for b in N.basis]) if len(N.basis) else None
    if B is None:
        return AlgebraElement.zeros(a.signature)
    coeffs = B.conj().T @ v
    return AlgebraElement.from_vec(a.signature, B @ coeffs)
