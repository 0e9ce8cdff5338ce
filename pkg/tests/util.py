"""Shared helpers for the test suite."""

import numpy as np

import cstar_approx as ca


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_element(rng, sig):
    return ca.AlgebraElement(sig, [crandn(rng, n, n) for n in sig.block_dims])


def random_basis(rng, sig, k):
    return ca.SubspaceBasis(sig, [random_element(rng, sig) for _ in range(k)])


def random_signature(rng, max_blocks=3, max_dim=5):
    p = int(rng.integers(1, max_blocks + 1))
    return ca.AlgebraSignature(tuple(int(rng.integers(2, max_dim + 1)) for _ in range(p)))


def well_conditioned_block(rng, n, smin=0.5, smax=2.0):
    """Random matrix with singular values bounded away from zero."""
    q1, _ = np.linalg.qr(crandn(rng, n, n))
    q2, _ = np.linalg.qr(crandn(rng, n, n))
    return q1 @ np.diag(rng.uniform(smin, smax, n)) @ q2.conj().T


def unit(n, i, j, value=1.0):
    m = np.zeros((n, n), dtype=np.complex128)
    m[i, j] = value
    return m


def diagonal_subspace(sig):
    """Basis of the blockwise-diagonal subspace of M_2(C)^p."""
    p = sig.num_blocks
    basis = []
    for i in range(p):
        for j in range(2):
            blocks = [np.zeros((2, 2), dtype=np.complex128) for _ in range(p)]
            blocks[i][j, j] = 1.0
            basis.append(ca.AlgebraElement(sig, blocks))
    return ca.SubspaceBasis(sig, basis)
