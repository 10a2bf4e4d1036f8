"""Deterministic random node vectors and the two vector binding operators.

Node vectors are unit-norm Gaussian directions that depend only on
``(master_seed, dim, label)``; re-running the process or reordering queries
yields bit-identical vectors. Randomness comes from the counter-based Philox
generator keyed by the master seed and a 64-bit FNV-1a hash of the label's
UTF-8 bytes, with Box-Muller applied to its uniform stream, so lexicons are
reproducible across platforms.

Two binding operators are provided:

* shuffled scaled product:   gamma * (p1(a) elementwise* p2(b))
* shuffled circular convolution:  p1(a) circ-conv p2(b)

where p1, p2 are two fixed random permutations and gamma rescales the
elementwise product so it preserves norm in expectation.
"""
from __future__ import annotations

import json
import threading
import warnings
from dataclasses import dataclass

import numpy as np

from . import _accel

# Namespace constants keeping the Philox key spaces of labels, permutations,
# and gamma estimation disjoint for a given master seed.
_MASK64 = (1 << 64) - 1
_NS_LEXICON = 0x9E3779B97F4A7C15
_NS_PERMUTATION = 0xC2B2AE3D27D4EB4F
_NS_GAMMA = 0x165667B19E3779F9

SHUFFLED_PRODUCT = "shuffled_product"
SHUFFLED_CONVOLUTION = "shuffled_convolution"
KINDS = (SHUFFLED_PRODUCT, SHUFFLED_CONVOLUTION)


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash; the documented stable label hash."""
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def _rng(high64: int, low64: int) -> np.random.Generator:
    key = ((high64 & _MASK64) << 64) | (low64 & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def _box_muller(rng: np.random.Generator, n: int) -> np.ndarray:
    """n standard normal draws via Box-Muller over the uniform stream."""
    m = (n + 1) // 2
    u1 = 1.0 - rng.random(m)  # in (0, 1], log-safe
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
    return z[:n]


class DimensionMismatch(ValueError):
    pass


def _check_dims(*vecs: np.ndarray) -> int:
    d = vecs[0].shape[0]
    for v in vecs[1:]:
        if v.shape[0] != d:
            raise DimensionMismatch(f"dimension mismatch: {v.shape[0]} != {d}")
    return d


class NodeLexicon:
    """Cache of unit-norm random vectors, one per label.

    Vectors are pure functions of (master_seed, dim, label); the cache only
    avoids recomputation. Concurrent queries may duplicate work but never
    change results.
    """

    def __init__(self, master_seed: int, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.master_seed = int(master_seed)
        self.dim = int(dim)
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def vector(self, label: str) -> np.ndarray:
        v = self._cache.get(label)
        if v is None:
            rng = _rng(self.master_seed ^ _NS_LEXICON, fnv1a64(label.encode("utf-8")))
            raw = _box_muller(rng, self.dim)
            v = raw / np.linalg.norm(raw)
            v.setflags(write=False)
            with self._lock:
                self._cache.setdefault(label, v)
        return v

    def export_json(self, path) -> None:
        payload = {
            "header": {"dim": self.dim, "master_seed": self.master_seed,
                       "hash_algo": "fnv1a64"},
            "vectors": {label: v.tolist() for label, v in sorted(self._cache.items())},
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)

    @classmethod
    def import_json(cls, path) -> "NodeLexicon":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        header = payload["header"]
        lex = cls(header["master_seed"], header["dim"])
        for label, comps in payload["vectors"].items():
            v = np.asarray(comps, dtype=np.float64)
            v.setflags(write=False)
            lex._cache[label] = v
        return lex


class Permutation:
    """A fixed bijection of [0, d); applied as v -> v[mapping]."""

    def __init__(self, mapping: np.ndarray):
        mapping = np.asarray(mapping, dtype=np.intp)
        d = mapping.shape[0]
        if not np.array_equal(np.sort(mapping), np.arange(d)):
            raise ValueError("mapping is not a bijection of [0, d)")
        mapping.setflags(write=False)
        self.mapping = mapping
        self.dim = d

    def apply(self, v: np.ndarray) -> np.ndarray:
        _check_dims(v, self.mapping)
        return v[self.mapping]

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self.mapping, other.mapping)

    def __hash__(self):
        return hash(self.mapping.tobytes())


def random_permutation(master_seed: int, stream_id: int, dim: int) -> Permutation:
    """Uniform random permutation, deterministic in (seed, stream, dim)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = _rng(master_seed ^ _NS_PERMUTATION, stream_id)
    return Permutation(rng.permutation(dim))


def estimate_gamma(dim: int, master_seed: int, samples: int = 200) -> float:
    """Reciprocal of the mean norm of the shuffled elementwise product.

    The mean is taken over `samples` independent pairs of unit vectors with
    N(0,1)-drawn directions; for random unit vectors that norm concentrates
    around 1/sqrt(d), so gamma is close to sqrt(d).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    p1 = random_permutation(master_seed, 1, dim)
    p2 = random_permutation(master_seed, 2, dim)
    rng = _rng(master_seed ^ _NS_GAMMA, 0)
    total = 0.0
    for _ in range(samples):
        a = _box_muller(rng, dim)
        b = _box_muller(rng, dim)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        total += np.linalg.norm(p1.apply(a) * p2.apply(b))
    return samples / total


def _is_power_of_two(d: int) -> bool:
    return d >= 1 and (d & (d - 1)) == 0


def circular_convolution(a: np.ndarray, b: np.ndarray, method: str = "fast") -> np.ndarray:
    """(a conv b)_k = sum_i a_i b_{(k-i) mod d}.

    The fast path is FFT-based and requires d a power of two; the direct
    O(d^2) path works for any d and serves as the independent oracle.
    """
    d = _check_dims(a, b)
    if method == "direct":
        return _accel.conv_direct(np.ascontiguousarray(a, dtype=np.float64),
                                  np.ascontiguousarray(b, dtype=np.float64))
    if method == "fast":
        if not _is_power_of_two(d):
            raise ValueError(f"fast convolution requires power-of-two dim, got {d}")
        return np.fft.irfft(np.fft.rfft(a) * np.fft.rfft(b), n=d)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class CompositionSpec:
    """Frozen configuration of one binding operator instance."""

    kind: str
    dim: int
    p1: Permutation
    p2: Permutation
    gamma: float
    master_seed: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown composition kind {self.kind!r}")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.dim > 1 and self.p1 == self.p2:
            raise ValueError("p1 and p2 must differ")


def make_spec(kind: str, dim: int, master_seed: int,
              gamma_samples: int = 200) -> CompositionSpec:
    """Build a CompositionSpec with seeded permutations and a frozen gamma."""
    p1 = random_permutation(master_seed, 1, dim)
    p2 = random_permutation(master_seed, 2, dim)
    gamma = estimate_gamma(dim, master_seed, gamma_samples) if kind == SHUFFLED_PRODUCT else 1.0
    if kind == SHUFFLED_CONVOLUTION and not _is_power_of_two(dim):
        warnings.warn(f"dim {dim} is not a power of two: "
                      "direct convolution fallback (O(d^2)) will be used")
    return CompositionSpec(kind, dim, p1, p2, gamma, master_seed)


def compose(spec: CompositionSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Apply the spec's binding operator. Bilinear, non-commutative,
    non-associative; reentrant and stateless."""
    d = _check_dims(a, b)
    if d != spec.dim:
        raise DimensionMismatch(f"vectors have dim {d}, spec has {spec.dim}")
    pa = spec.p1.apply(a)
    pb = spec.p2.apply(b)
    if spec.kind == SHUFFLED_PRODUCT:
        return spec.gamma * (pa * pb)
    method = "fast" if _is_power_of_two(d) else "direct"
    return circular_convolution(pa, pb, method=method)
