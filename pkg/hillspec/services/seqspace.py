"""Coefficient sequences and the weighted sequence spaces h^{s,n}.

A potential V on [-1, 1] is handled only through its Fourier coefficients
v(k) = <V, e^{ik pi x}> with the pairing <f, g> = 1/2 int f conj(g), so the
basis e^{ik pi x} is orthonormal. All weights use <k> = 1 + |k|.
"""
import hashlib
import logging
import math
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, special

from hillspec.errors import DomainError, PotentialError, WindowError

logger = logging.getLogger(__name__)


def bracket(k):
    """<k> = 1 + |k|, elementwise for arrays"""
    return 1.0 + np.abs(k)


class CoeffSeq:
    """Finite-support complex sequence k -> v(k); absent indices are exactly zero.

    Instances are immutable. Zero values are dropped on construction so that
    `support()` is the true support.
    """

    __slots__ = ("_entries", "decay")

    def __init__(self, entries: Optional[Mapping[int, complex]] = None, decay: Optional[float] = None):
        clean: Dict[int, complex] = {}
        for k, value in (entries or {}).items():
            value = complex(value)
            if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                raise PotentialError(f"Non-finite coefficient at k={k}: {value}")
            if value != 0:
                clean[int(k)] = value
        object.__setattr__(self, "_entries", MappingProxyType(dict(sorted(clean.items()))))
        object.__setattr__(self, "decay", decay)

    def __setattr__(self, name, value):
        raise AttributeError("CoeffSeq is immutable")

    # Construction helpers
    @classmethod
    def from_dense(cls, values: Sequence[complex], offset: int, decay: Optional[float] = None) -> "CoeffSeq":
        """Sequence whose entry values[i] sits at index offset + i"""
        return cls({offset + i: value for i, value in enumerate(values)}, decay=decay)

    # Mapping-like access
    def __getitem__(self, k: int) -> complex:
        return self._entries.get(int(k), 0j)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self._entries)

    def items(self) -> Iterable[Tuple[int, complex]]:
        return self._entries.items()

    def support(self) -> List[int]:
        return list(self._entries)

    @property
    def is_zero(self) -> bool:
        return not self._entries

    @property
    def min_index(self) -> Optional[int]:
        return next(iter(self._entries), None)

    @property
    def max_index(self) -> Optional[int]:
        return next(reversed(self._entries.keys())) if self._entries else None

    @property
    def radius(self) -> int:
        """max |k| over the support (0 for the zero sequence)"""
        if not self._entries:
            return 0
        return max(abs(self.min_index), abs(self.max_index))

    def indices(self) -> np.ndarray:
        return np.fromiter(self._entries.keys(), dtype=np.int64, count=len(self._entries))

    def values(self) -> np.ndarray:
        return np.fromiter(self._entries.values(), dtype=np.complex128, count=len(self._entries))

    def window(self, K: int) -> np.ndarray:
        """Dense values v(-K), ..., v(K)"""
        dense = np.zeros(2 * K + 1, dtype=np.complex128)
        for k, value in self._entries.items():
            if -K <= k <= K:
                dense[k + K] = value
        return dense

    def span(self) -> Tuple[np.ndarray, int]:
        """Dense values over [min_index, max_index] and the offset min_index"""
        if not self._entries:
            return np.zeros(0, dtype=np.complex128), 0
        lo, hi = self.min_index, self.max_index
        dense = np.zeros(hi - lo + 1, dtype=np.complex128)
        for k, value in self._entries.items():
            dense[k - lo] = value
        return dense, lo

    # Arithmetic
    def __add__(self, other: "CoeffSeq") -> "CoeffSeq":
        merged = dict(self._entries)
        for k, value in other.items():
            merged[k] = merged.get(k, 0j) + value
        return CoeffSeq(merged)

    def __sub__(self, other: "CoeffSeq") -> "CoeffSeq":
        return self + other.scale(-1.0)

    def __neg__(self) -> "CoeffSeq":
        return self.scale(-1.0)

    def scale(self, factor: complex) -> "CoeffSeq":
        return CoeffSeq({k: factor * value for k, value in self._entries.items()}, decay=self.decay)

    def restrict(self, N: int) -> "CoeffSeq":
        """Entries with |k| <= N"""
        return CoeffSeq({k: v for k, v in self._entries.items() if abs(k) <= N}, decay=self.decay)

    def tail(self, N: int) -> "CoeffSeq":
        """Entries with |k| > N"""
        return CoeffSeq({k: v for k, v in self._entries.items() if abs(k) > N}, decay=self.decay)

    def digest(self) -> str:
        """SHA-256 over the canonical (k, re, im) list"""
        h = hashlib.sha256()
        for k, value in self._entries.items():
            h.update(f"{k}:{value.real:.17g}:{value.imag:.17g};".encode())
        return h.hexdigest()

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, CoeffSeq):
            return NotImplemented
        return dict(self._entries) == dict(other._entries)

    def __hash__(self) -> int:
        return hash(tuple(self._entries.items()))

    def __repr__(self) -> str:
        if len(self._entries) > 6:
            return f"CoeffSeq(<{len(self._entries)} entries on [{self.min_index}, {self.max_index}]>)"
        return f"CoeffSeq({dict(self._entries)})"


@dataclass(frozen=True)
class SpaceSpec:
    """h^{s,n}: weight <k+n>^s"""
    s: float
    n: int = 0

    def __post_init__(self):
        if not math.isfinite(self.s):
            raise DomainError(f"Sobolev exponent must be finite, got {self.s}")

    def weights(self, K: int) -> np.ndarray:
        k = np.arange(-K, K + 1)
        return bracket(k + self.n) ** self.s


@dataclass(frozen=True)
class SplitPotential:
    v0: CoeffSeq
    v1: CoeffSeq
    epsilon: float
    cutoff: int


def convolve(a: CoeffSeq, b: CoeffSeq) -> CoeffSeq:
    """(a*b)(k) = sum_j a(k-j) b(j), evaluated as the exact double sum"""
    if a.is_zero or b.is_zero:
        return CoeffSeq()
    a_dense, a_lo = a.span()
    b_dense, b_lo = b.span()
    # np.convolve evaluates the direct sum (no FFT)
    return CoeffSeq.from_dense(np.convolve(a_dense, b_dense), a_lo + b_lo)


def weighted_norm(a: CoeffSeq, s: float, n: int = 0) -> float:
    """(sum_k <k+n>^{2s} |a(k)|^2)^{1/2}"""
    if a.is_zero:
        return 0.0
    weighted = bracket(a.indices() + n) ** s * np.abs(a.values())
    return float(np.linalg.norm(weighted))


def split_tail(v: CoeffSeq, m: int, eps: float) -> SplitPotential:
    """Split v = v0 + v1 at the smallest cutoff N with ||v1||_{-m} <= eps.

    v0 keeps |k| <= N, v1 the rest.
    """
    if m < 1:
        raise DomainError(f"Order m must be >= 1, got {m}")
    if not eps > 0:
        raise DomainError(f"Tail bound must be positive, got {eps}")
    if v.is_zero:
        return SplitPotential(v0=v, v1=CoeffSeq(), epsilon=eps, cutoff=0)

    radius = v.radius
    levels = np.abs(v.indices())
    contrib = np.zeros(radius + 1)
    np.add.at(contrib, levels, bracket(levels) ** (-2.0 * m) * np.abs(v.values()) ** 2)
    # tail_sq[N] = sum over |k| > N
    tail_sq = np.concatenate([np.cumsum(contrib[::-1])[::-1][1:], [0.0]])
    cutoff = int(np.argmax(np.sqrt(tail_sq) <= eps))
    # The cumulative sums may round differently from weighted_norm; the direct norm decides
    while cutoff < radius and weighted_norm(v.tail(cutoff), -m) > eps:
        cutoff += 1

    logger.debug(f"split_tail: m={m}, eps={eps}, cutoff N={cutoff} (radius {radius})")
    return SplitPotential(v0=v.restrict(cutoff), v1=v.tail(cutoff), epsilon=eps, cutoff=cutoff)


# Potential constructors
class PotentialKind(str, Enum):
    ZERO = "zero"
    CONSTANT = "constant"
    TRIG_POLY = "trig_poly"
    DIRAC_COMB = "dirac_comb"
    RANDOM_DECAY = "random_decay"


def constant_potential(c: complex) -> CoeffSeq:
    return CoeffSeq({0: c}, decay=None)


def trig_poly(cos: Optional[Mapping[int, complex]] = None, sin: Optional[Mapping[int, complex]] = None) -> CoeffSeq:
    """Coefficients of sum_k cos[k] cos(k pi x) + sin[k] sin(k pi x)"""
    coeffs: Dict[int, complex] = {}
    for k, c in (cos or {}).items():
        k = int(k)
        if k < 0:
            raise PotentialError(f"Trigonometric index must be >= 0, got {k}")
        if k == 0:
            coeffs[0] = coeffs.get(0, 0j) + c
        else:
            coeffs[k] = coeffs.get(k, 0j) + c / 2
            coeffs[-k] = coeffs.get(-k, 0j) + c / 2
    for k, c in (sin or {}).items():
        k = int(k)
        if k < 0:
            raise PotentialError(f"Trigonometric index must be >= 0, got {k}")
        if k == 0:
            continue
        # sin(k pi x) = (e^{ik pi x} - e^{-ik pi x}) / 2i
        coeffs[k] = coeffs.get(k, 0j) - 0.5j * c
        coeffs[-k] = coeffs.get(-k, 0j) + 0.5j * c
    return CoeffSeq(coeffs)


def dirac_comb(amplitude: complex, center: float, window: int) -> CoeffSeq:
    """a * sum_j delta(x - x0 - 2j), materialized on |k| <= window.

    v(k) = <a delta_{x0}, e^{ik pi x}> = (a/2) e^{-ik pi x0}.
    """
    if window < 0:
        raise PotentialError(f"Empty coefficient window (K={window})")
    k = np.arange(0, window + 1)
    phase = np.exp(-1j * np.pi * k * center)
    coeffs: Dict[int, complex] = {}
    for kk, ph in zip(k.tolist(), phase):
        coeffs[kk] = 0.5 * amplitude * ph
        if kk:
            coeffs[-kk] = 0.5 * amplitude * ph.conjugate()
    return CoeffSeq(coeffs, decay=0.0)


def _zigzag(k: int) -> int:
    return 2 * k if k >= 0 else -2 * k - 1


def _keyed_uniform(seed: int, k: int) -> float:
    """Uniform draw keyed by (seed, k): Philox counter = k, key = seed"""
    gen = np.random.Generator(np.random.Philox(key=seed, counter=_zigzag(k)))
    return float(gen.random())


def random_decay(m: int, eta: float, window: int, norm: float = 1.0, seed: int = 0,
                 real_valued: bool = False) -> CoeffSeq:
    """|v(k)| = c <k>^{m - 1/2 - eta} with keyed random phases.

    c is fixed by the h^{-m} norm of the infinite sequence,
    sum_k <k>^{-1-2 eta} = 1 + 2 zeta(1 + 2 eta, 2), so every window size sees the
    same coefficients and the window norm never exceeds `norm`.
    """
    if m < 1:
        raise PotentialError(f"Order m must be >= 1, got {m}")
    if not eta > 0:
        raise PotentialError(f"Decay margin eta must be positive, got {eta}")
    if window < 0:
        raise PotentialError(f"Empty coefficient window (K={window})")
    if norm < 0:
        raise PotentialError(f"Requested norm must be >= 0, got {norm}")
    if seed < 0:
        raise PotentialError(f"Seed must be a non-negative integer, got {seed}")

    exponent = m - 0.5 - eta
    scale = norm / math.sqrt(1.0 + 2.0 * float(special.zeta(1.0 + 2.0 * eta, 2.0)))
    coeffs: Dict[int, complex] = {}
    for k in range(-window, window + 1):
        if real_valued and k < 0:
            continue
        size = scale * (1.0 + abs(k)) ** exponent
        u = _keyed_uniform(seed, k)
        if real_valued and k == 0:
            coeffs[0] = size if u < 0.5 else -size
        else:
            coeffs[k] = size * np.exp(2j * np.pi * u)
    if real_valued:
        for k in range(1, window + 1):
            coeffs[-k] = coeffs[k].conjugate()
    return CoeffSeq(coeffs, decay=exponent)


def make_potential(kind, params: Optional[Mapping[str, Any]] = None, seed: int = 0) -> CoeffSeq:
    """Build a potential of the given kind; `params` holds the kind-specific values"""
    params = dict(params or {})
    try:
        kind = PotentialKind(kind)
    except ValueError:
        raise PotentialError(f"Unknown potential kind: {kind!r}")

    if kind is PotentialKind.ZERO:
        return CoeffSeq()
    if kind is PotentialKind.CONSTANT:
        return constant_potential(params.get("c", 0.0))
    if kind is PotentialKind.TRIG_POLY:
        return trig_poly(params.get("cos"), params.get("sin"))
    if kind is PotentialKind.DIRAC_COMB:
        return dirac_comb(params.get("amplitude", 1.0), params.get("center", 0.0), int(params.get("window", 0)))
    return random_decay(
        m=int(params["m"]),
        eta=float(params["eta"]),
        window=int(params["window"]),
        norm=float(params.get("norm", 1.0)),
        seed=seed,
        real_valued=bool(params.get("real_valued", False)),
    )


# Convolution norms
def toeplitz_section(a: CoeffSeq, K: int) -> np.ndarray:
    """T[k, j] = a(k - j) for k, j in [-K, K] (index order ascending)"""
    lags = a.window(2 * K)
    column = lags[2 * K:]
    row = lags[2 * K::-1]
    return linalg.toeplitz(column, row)


def conv_norm_estimate(a: CoeffSeq, in_space: SpaceSpec, out_space: SpaceSpec, K: int) -> float:
    """Largest singular value of u -> a*u from in_space to out_space on [-K, K]"""
    if K < 0:
        raise WindowError(f"Window radius must be >= 0, got {K}")
    section = toeplitz_section(a, K)
    weighted = out_space.weights(K)[:, None] * section / in_space.weights(K)[None, :]
    if not weighted.any():
        return 0.0
    return float(linalg.svdvals(weighted)[0])


def convolution_ratio(a: CoeffSeq, m: int, K: int) -> float:
    """Worst of the two convolution ratios used for the relative-bound estimate:
    ||a*.||_{h^-m -> h^-m} / ||a||_m and ||a*.||_{h^m -> h^-m} / ||a||_{-m}.
    """
    if a.is_zero:
        return 0.0
    low, high = SpaceSpec(-m), SpaceSpec(m)
    smooth = conv_norm_estimate(a, low, low, K) / weighted_norm(a, m)
    rough = conv_norm_estimate(a, high, low, K) / weighted_norm(a, -m)
    return max(smooth, rough)


def default_probes(m: int, K: int, seed: int = 0) -> List[CoeffSeq]:
    """Impulses at powers of two plus a few keyed random sequences"""
    probes = [CoeffSeq({0: 1.0})]
    j = 1
    while j <= K:
        probes.append(CoeffSeq({j: 1.0}))
        j *= 2
    for offset, eta in enumerate((0.25, 0.5, 1.0)):
        probes.append(random_decay(m, eta, window=K, norm=1.0, seed=seed + offset))
    return probes


def estimate_convolution_constant(m: int, K: int, probes: Optional[Iterable[CoeffSeq]] = None,
                                  seed: int = 0) -> float:
    """C_m estimate: 1.1 x the largest convolution ratio over the probe set"""
    probes = list(probes) if probes is not None else default_probes(m, K, seed)
    worst = max((convolution_ratio(p, m, K) for p in probes), default=0.0)
    c_hat = 1.1 * worst
    logger.debug(f"Convolution constant estimate m={m}, K={K}: {c_hat:.6g} over {len(probes)} probes")
    return c_hat
