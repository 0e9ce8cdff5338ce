"""Desk-scale handling of operators on l2(N) of the form
``finite head block (+) weighted unilateral shift``, with finitely many
extra coupling entries.

This class is just wide enough to carry the classic examples: an isometry
glued to a scaled identity head, and a banded trace-class operator with two
finite-rank companions. Each tail operator declares its own limit data
(the limsup of the shift weights) and an exact bound on the trace norm
outside any N x N corner, which is what makes truncated solves rigorous:
the trace-norm distance moves by at most the discarded tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, AlgebraSignature, SubspaceBasis
from .errors import NoFiniteN, TooSmall, UnsupportedForm
from .matrix_core import as_matrix
from .solver import DistanceReport, SolveOptions, solve_distance

TRUNCATION_CAP = 4096


@dataclass(frozen=True)
class ConstantWeights:
    """w_n = value for all n; summable only when value is zero."""

    value: complex

    def __call__(self, n: int) -> complex:
        return self.value

    @property
    def limsup(self) -> float:
        return abs(self.value)

    @property
    def is_finitely_supported(self) -> bool:
        return self.value == 0

    def tail_sum(self, n0: int) -> float:
        return 0.0 if self.value == 0 else math.inf


@dataclass(frozen=True)
class GeometricWeights:
    """w_n = first * ratio**n with |ratio| < 1."""

    first: complex
    ratio: float

    def __post_init__(self):
        if not abs(self.ratio) < 1:
            raise ValueError("geometric rule needs |ratio| < 1")

    def __call__(self, n: int) -> complex:
        return self.first * self.ratio**n

    @property
    def limsup(self) -> float:
        return 0.0

    @property
    def is_finitely_supported(self) -> bool:
        return self.first == 0

    def tail_sum(self, n0: int) -> float:
        return abs(self.first) * abs(self.ratio) ** n0 / (1.0 - abs(self.ratio))


@dataclass(frozen=True)
class ExplicitWeights:
    """Explicit prefix followed by a constant tail value."""

    values: tuple
    tail_value: complex = 0.0

    def __call__(self, n: int) -> complex:
        return self.values[n] if n < len(self.values) else self.tail_value

    @property
    def limsup(self) -> float:
        return abs(self.tail_value)

    @property
    def is_finitely_supported(self) -> bool:
        return self.tail_value == 0

    def tail_sum(self, n0: int) -> float:
        head = sum(abs(v) for v in self.values[n0:]) if n0 < len(self.values) else 0.0
        return head + (0.0 if self.tail_value == 0 else math.inf)


@dataclass(frozen=True, eq=False)
class TailOperator:
    """``head (+) weighted shift`` on l2(N), plus finitely many couplings.

    The head acts on the first ``d`` coordinates; the shift sends basis
    vector ``d+n`` to ``w_n`` times basis vector ``d+n+1``. Coupling
    entries ``(row, col, value)`` may sit anywhere outside those two
    patterns (banded operators need one to bridge head and tail).
    """

    head: np.ndarray
    weights: object  # one of the weight rules above
    coupling: tuple = ()

    def __post_init__(self):
        h = as_matrix(self.head).copy()
        if h.shape[0] != h.shape[1]:
            raise ValueError("head must be square")
        h.setflags(write=False)
        object.__setattr__(self, "head", h)
        object.__setattr__(
            self,
            "coupling",
            tuple((int(r), int(c), complex(v)) for r, c, v in self.coupling),
        )

    @property
    def head_dim(self) -> int:
        return self.head.shape[0]

    @property
    def limsup_value(self) -> float:
        """Declared limsup of |w_n|: the largest limit of ||x zeta_n|| over
        weakly null unit sequences in this class."""
        try:
            return float(self.weights.limsup)
        except AttributeError:
            raise UnsupportedForm("weight rule does not declare its limsup")

    def weight(self, n: int) -> complex:
        return complex(self.weights(n))

    def matrix(self, N: int) -> np.ndarray:
        """Top-left N x N corner ``P_N x P_N``."""
        d = self.head_dim
        if N < d:
            raise TooSmall(f"truncation {N} smaller than head dimension {d}")
        m = np.zeros((N, N), dtype=np.complex128)
        m[:d, :d] = self.head
        for n in range(N - d - 1):
            m[d + n + 1, d + n] = self.weight(n)
        for r, c, v in self.coupling:
            if r < N and c < N:
                m[r, c] += v
        return m

    def trace_tail_bound(self, N: int) -> float:
        """Bound on the trace norm of ``x - P_N x P_N``.

        Sum of |entries| outside the corner: shift weights from index
        ``N - d - 1`` on, plus any couplings with a row or column >= N.
        Nonincreasing in N; finite iff the declared tail is summable.
        """
        d = self.head_dim
        if N < d:
            raise TooSmall(f"truncation {N} smaller than head dimension {d}")
        try:
            total = self.weights.tail_sum(max(0, N - d - 1))
        except AttributeError:
            raise UnsupportedForm("weight rule does not declare a tail bound")
        total += sum(abs(v) for r, c, v in self.coupling if r >= N or c >= N)
        return float(total)


@dataclass(frozen=True, eq=False)
class Truncation:
    n: int
    element: np.ndarray
    error_bound: float


@dataclass
class TailDistanceInterval:
    """Two-sided enclosure of a trace-norm distance computed through a
    truncation: ``[lo, hi]`` contains the infinite-dimensional value."""

    lo: float
    hi: float
    n_used: int
    report: DistanceReport


def delta_ess(x: TailOperator) -> float:
    """Largest limit of ``||x zeta_n||`` over weakly null unit sequences.

    For head (+) weighted shift (+) finite coupling this equals the
    declared limsup of the shift weights: tail basis vectors realize it,
    and any weakly null sequence loses its head component in norm. Equals
    the operator-norm distance from ``x`` to the compact operators.
    """
    return x.limsup_value


def truncate(x: TailOperator, N: int) -> Truncation:
    """N x N corner together with its declared trace-norm error bound."""
    return Truncation(n=N, element=x.matrix(N), error_bound=x.trace_tail_bound(N))


def _finite_support_size(op: TailOperator) -> int:
    """Smallest N with trace_tail_bound(N) == 0; UnsupportedForm if none.

    The weight rule must declare finite support structurally; a numerically
    underflowed geometric bound does not count.
    """
    if not getattr(op.weights, "is_finitely_supported", False):
        raise UnsupportedForm("generator weights are not finitely supported")
    n = op.head_dim
    while n <= TRUNCATION_CAP:
        if op.trace_tail_bound(n) == 0.0:
            return n
        n += 1
    raise UnsupportedForm("generator does not have finite support")


def truncated_problem(x: TailOperator, V, N: int):
    """Assemble the single-block algebra problem for the N x N corners."""
    sig = AlgebraSignature((N,))
    x_el = AlgebraElement(sig, [x.matrix(N)])
    basis = SubspaceBasis(sig, [AlgebraElement(sig, [g.matrix(N)]) for g in V])
    return x_el, basis


def dist1_tail(
    x: TailOperator, V, tol: float, opts: SolveOptions | None = None
) -> TailDistanceInterval:
    """Trace-norm distance from ``x`` to the span of finite-support
    generators, as a rigorous interval of width at most ``2 * tol``.

    Picks N with ``trace_tail_bound(N) <= tol / 2``, solves the truncated
    problem to gap ``tol / 2``, and widens by both errors: the distance is
    1-Lipschitz in the point, so truncation moves it by at most the tail
    bound.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    supports = [_finite_support_size(g) for g in V]
    n = max([x.head_dim, *supports])
    while x.trace_tail_bound(n) > tol / 2.0:
        if n >= TRUNCATION_CAP:
            raise NoFiniteN(
                f"tail bound did not reach {tol / 2.0:g} by N={TRUNCATION_CAP}"
            )
        n = min(2 * n, TRUNCATION_CAP)
    bound = x.trace_tail_bound(n)

    solve_opts = opts or SolveOptions()
    solve_opts = SolveOptions(
        tol=tol / 2.0, max_iter=solve_opts.max_iter, penalty=solve_opts.penalty,
        seed=solve_opts.seed, restarts=solve_opts.restarts,
    )
    x_el, basis = truncated_problem(x, V, n)
    report = solve_distance(x_el, basis, "trace", solve_opts)
    lo = report.primal_value - bound - tol / 2.0
    hi = report.primal_value + bound + tol / 2.0
    return TailDistanceInterval(lo=lo, hi=hi, n_used=n, report=report)


# ---------------------------------------------------------------------------
# Shipped example data


def isometry_tail_example():
    """Scaled-identity head glued to a unit-weight shift (an isometry on the
    tail), with two finite-rank companions: the classic case where the
    essential bound (delta = 1) is strictly below the subspace distance (2).
    """
    x = TailOperator(head=2.0 * np.eye(3), weights=ConstantWeights(1.0))
    a = np.array([[1.0, 0.5, 0.0], [0.0, 0.5, 1.0], [1.0, 0.0, 0.0]])
    b = np.array([[0.0, 1.0, -1.0], [0.0, 0.5, 0.0], [1.0 / 3.0, 0.25, 0.0]])
    y = TailOperator(head=a, weights=ConstantWeights(0.0))
    z = TailOperator(head=b, weights=ConstantWeights(0.0))
    return x, [y, z]


def banded_shift_example():
    """Banded trace-class operator with subdiagonal (1, 1/2, 1/4, 1/4) and
    two diagonal finite-rank companions; trace-norm distance 2, attained at
    the half-sum of the companions, certified by the backward shift."""
    head = np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.5, 0.0]])
    x = TailOperator(
        head=head,
        weights=ExplicitWeights(values=(0.25,), tail_value=0.0),
        coupling=((3, 2, 0.25),),
    )
    y = TailOperator(
        head=np.diag([0.0, 2.0, 1.0]), weights=ConstantWeights(0.0)
    )
    z = TailOperator(
        head=np.diag([2.0, 0.0, -1.0]), weights=ConstantWeights(0.0)
    )
    return x, [y, z]
