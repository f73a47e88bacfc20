"""Bit-vector solutions, objective/cost contracts, evaluation accounting
and the bi-objective dominance relation shared by every solver.

Solutions are characteristic vectors over a ground set of size n.  They are
immutable after construction, so they can be stored in populations and shared
across runs without defensive copies.
"""

from __future__ import annotations

import math
import threading
import zlib
from dataclasses import dataclass
from enum import Enum

import numpy as np

NEG_INF = float("-inf")
POS_INF = float("inf")


def substream(seed, *labels):
    """Derive an independent, reproducible generator from a master seed.

    Labels are hashed with crc32, so the stream only depends on (seed, labels)
    and never on call order or thread scheduling.
    """
    keys = [zlib.crc32(str(label).encode("utf-8")) for label in labels]
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *keys]))


class Solution:
    """Immutable subset of the ground set, stored as a 0/1 vector."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        b = np.ascontiguousarray(bits, dtype=np.uint8)
        if b.ndim != 1 or b.size < 1:
            raise ValueError("bits must be a non-empty 1-d vector")
        if b.max(initial=0) > 1:
            raise ValueError("bits must be 0/1")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    def __setattr__(self, name, value):
        raise AttributeError("Solution is immutable")

    @classmethod
    def empty(cls, n: int) -> "Solution":
        if n < 1:
            raise ValueError("ground set must have n >= 1")
        return cls(np.zeros(n, dtype=np.uint8))

    @classmethod
    def from_indices(cls, n: int, indices) -> "Solution":
        bits = np.zeros(n, dtype=np.uint8)
        idx = np.asarray(list(indices), dtype=np.intp)
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise ValueError("index out of range")
        bits[idx] = 1
        return cls(bits)

    @property
    def n(self) -> int:
        return self.bits.size

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def size(self) -> int:
        return int(self.bits.sum())

    def contains(self, v: int) -> bool:
        return bool(self.bits[v])

    def with_added(self, v: int) -> "Solution":
        bits = self.bits.copy()
        bits[v] = 1
        return Solution(bits)

    def with_removed(self, v: int) -> "Solution":
        bits = self.bits.copy()
        bits[v] = 0
        return Solution(bits)

    def __eq__(self, other):
        return isinstance(other, Solution) and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())

    def __repr__(self):
        return f"Solution({''.join(map(str, self.bits.tolist()))})"


class ObjectiveFn:
    """Monotone objective f over bit vectors. Subclasses set `n` and implement
    __call__(bits) -> float; `deterministic` is False for Monte-Carlo objectives."""

    deterministic = True
    n: int

    def __call__(self, bits: np.ndarray) -> float:
        raise NotImplementedError


class CostFn:
    """Monotone cost with c(empty) = 0.  `min_increment` is the smallest
    possible single-element cost increase on the instance."""

    min_increment = 0.0
    n: int

    def __call__(self, bits: np.ndarray) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class ObjectiveVector:
    """Stored (f1, f2) pair; f2 = -cost, f1 = -inf when the creating
    evaluation found cost > B + 1."""

    f1: float
    f2: float

    @property
    def cost(self) -> float:
        return -self.f2


class Dominance(Enum):
    STRICT = "strictly-dominates"
    WEAK = "weakly-dominates"
    NONE = "incomparable-or-dominated"


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> Dominance:
    """Tri-state dominance of a over b; NEG_INF compares below every real."""
    if a.f1 >= b.f1 and a.f2 >= b.f2:
        if a.f1 > b.f1 or a.f2 > b.f2:
            return Dominance.STRICT
        return Dominance.WEAK
    return Dominance.NONE


class EvalCounter:
    """Counts objective-vector (or scalar objective) computations.

    Cache hits must not increment.  Updates are atomic so evaluators can be
    called from independent runs concurrently.
    """

    def __init__(self):
        self._count = 0
        self._lock = threading.Lock()

    @property
    def count(self) -> int:
        return self._count

    def increment(self, k: int = 1) -> None:
        with self._lock:
            self._count += k


class Evaluator:
    """Wraps (f, c) with evaluation counting and the B+1 infeasibility cutoff
    used by the bi-objective reformulation."""

    def __init__(self, f: ObjectiveFn, c: CostFn, counter: EvalCounter | None = None):
        self.f = f
        self.c = c
        self.counter = counter if counter is not None else EvalCounter()

    def vector(self, bits: np.ndarray, budget: float) -> ObjectiveVector:
        """One objective-vector computation: f1 = -inf iff cost > budget + 1."""
        self.counter.increment()
        cost = float(self.c(bits))
        if cost > budget + 1:
            return ObjectiveVector(NEG_INF, -cost)
        return ObjectiveVector(float(self.f(bits)), -cost)

    def value(self, bits: np.ndarray) -> float:
        """One scalar objective computation."""
        self.counter.increment()
        return float(self.f(bits))


def flip_each_bit(s: Solution, rate: float, rng: np.random.Generator) -> Solution:
    """Flip each bit independently with probability `rate`; returns a new solution."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must be a probability")
    mask = rng.random(s.n) < rate
    return Solution(s.bits ^ mask)


def mutate_bits(bits: np.ndarray, uniforms: np.ndarray, rate: float) -> np.ndarray:
    """flip_each_bit on a raw bit array with pre-drawn uniforms (hot path)."""
    return bits ^ (uniforms < rate)


def marginal_ratio(f: ObjectiveFn, c: CostFn, x: Solution, v: int) -> float:
    """Objective gain per unit cost of adding element v to x.

    Zero cost increment: +inf for positive gain (take it greedily first),
    0 for zero gain.
    """
    if v < 0 or v >= x.n:
        raise ValueError(f"element {v} outside ground set of size {x.n}")
    if x.contains(v):
        raise ValueError(f"element {v} already selected")
    y = x.with_added(v)
    gain = float(f(y.bits)) - float(f(x.bits))
    dc = float(c(y.bits)) - float(c(x.bits))
    if dc == 0.0:
        return POS_INF if gain > 0 else 0.0
    return gain / dc


def phi_ratio(alpha: float) -> float:
    """Approximation guarantee (alpha/2) * (1 - e^-alpha)."""
    return (alpha / 2.0) * (1.0 - math.exp(-alpha))
