import logging
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from hillspec.errors import OperatorError
from hillspec.services.seqspace import CoeffSeq, toeplitz_section

logger = logging.getLogger(__name__)


def _power_by_squaring(base: np.ndarray, exponent: int) -> np.ndarray:
    result = np.ones_like(base)
    while exponent:
        if exponent & 1:
            result = result * base
        base = base * base
        exponent >>= 1
    return result


def free_diagonal(m: int, K: int) -> np.ndarray:
    """(k pi)^{2m} for k = -K..K, built from (k pi)^2 by repeated squaring"""
    k = np.arange(-K, K + 1, dtype=np.float64)
    return _power_by_squaring((k * np.pi) ** 2, m)


def free_eigenvalue(n: int, m: int) -> float:
    """n^{2m} pi^{2m}, bit-identical to the matching entry of free_diagonal"""
    return float(_power_by_squaring((np.array([float(n)]) * np.pi) ** 2, m)[0])


@dataclass(frozen=True)
class OperatorSpec:
    """L_m(v) = D_m + B(v)"""
    m: int
    v: CoeffSeq

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise OperatorError(f"Operator order m must be an integer >= 1, got {self.m}")


@dataclass(frozen=True)
class TruncatedOperator:
    """Galerkin section of D_m + B(v) on the index window [-K, K]"""
    K: int
    A: np.ndarray
    spec: OperatorSpec

    def __post_init__(self):
        self.A.setflags(write=False)

    @property
    def size(self) -> int:
        return 2 * self.K + 1

    def indices(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    def restrict(self, K: int) -> "TruncatedOperator":
        if not 1 <= K <= self.K:
            raise OperatorError(f"Sub-window radius must lie in [1, {self.K}], got {K}")
        lo, hi = self.K - K, self.K + K + 1
        return TruncatedOperator(K=K, A=self.A[lo:hi, lo:hi].copy(), spec=self.spec)

    def is_hermitian(self) -> bool:
        return bool(np.array_equal(self.A, self.A.conj().T))

    def nonzero_entries(self) -> Iterator[Tuple[int, int, complex]]:
        """(k, j, A[k, j]) for every nonzero entry, rows then columns ascending"""
        rows, cols = np.nonzero(self.A)
        for r, c in zip(rows.tolist(), cols.tolist()):
            yield r - self.K, c - self.K, complex(self.A[r, c])


def assemble(spec: OperatorSpec, K: int) -> TruncatedOperator:
    """A[k, j] = k^{2m} pi^{2m} delta_kj + v(k - j) for k, j in [-K, K]"""
    if int(K) != K or K < 1:
        raise OperatorError(f"Truncation radius K must be an integer >= 1, got {K}")
    K = int(K)
    A = toeplitz_section(spec.v, K).astype(np.complex128)
    A[np.diag_indices_from(A)] += free_diagonal(spec.m, K)
    if spec.v.radius > 2 * K:
        logger.debug(f"Potential support radius {spec.v.radius} exceeds the 2K={2 * K} lags read by the section")
    logger.debug(f"Assembled m={spec.m} section with K={K} ({A.shape[0]}x{A.shape[1]})")
    return TruncatedOperator(K=K, A=A, spec=spec)


def is_formally_self_adjoint(v: CoeffSeq) -> bool:
    """v(-k) == conj(v(k)) for every k, compared exactly"""
    return all(v[-k] == value.conjugate() for k, value in v.items())
