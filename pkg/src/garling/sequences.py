"""Finitely supported sequences, selections, signs and block basic sequences."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Union

import numpy as np

from .weights import Weight

__all__ = [
    "FiniteSequence",
    "Selection",
    "SignPattern",
    "ConstantBlock",
    "BlockSequence",
    "BlockClassification",
    "decreasing_rearrangement",
    "left_shift_blocks",
    "classify_blocks",
    "dyadic_blocks",
    "parse_sequence",
]


class FiniteSequence:
    """Finitely supported scalar sequence indexed from 1.

    Stored as parallel arrays of strictly increasing indices and nonzero
    coefficients.  Zeros are dropped on construction.
    """

    __slots__ = ("indices", "coefs")

    def __init__(self, indices: Iterable[int] = (), coefs: Iterable = ()):
        idx = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices,
                         dtype=np.int64)
        val = np.asarray(list(coefs) if not isinstance(coefs, np.ndarray) else coefs)
        if val.dtype.kind not in "fc":
            val = val.astype(float)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and coefficients must be 1-d and of equal length")
        if idx.size and idx[0] < 1:
            raise ValueError("indices start at 1")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("indices must be strictly increasing")
        keep = val != 0
        if not np.all(keep):
            idx, val = idx[keep], val[keep]
        idx.flags.writeable = False
        val.flags.writeable = False
        self.indices = idx
        self.coefs = val

    @classmethod
    def from_dense(cls, values: Iterable) -> "FiniteSequence":
        val = np.asarray(list(values))
        if val.dtype.kind not in "fc":
            val = val.astype(float)
        return cls(np.arange(1, val.size + 1), val)

    @classmethod
    def from_entries(cls, entries: Iterable) -> "FiniteSequence":
        pairs = list(entries)
        return cls([int(i) for i, _ in pairs], [v for _, v in pairs])

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, complex]) -> "FiniteSequence":
        keys = sorted(mapping)
        return cls(keys, [mapping[k] for k in keys])

    @classmethod
    def indicator(cls, indices: Iterable[int], value: float = 1.0) -> "FiniteSequence":
        idx = sorted(set(int(i) for i in indices))
        return cls(idx, np.full(len(idx), value, dtype=float))

    def __len__(self) -> int:
        return int(self.indices.size)

    @property
    def size(self) -> int:
        return int(self.indices.size)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in self.indices)

    @property
    def first(self) -> int:
        return int(self.indices[0])

    @property
    def last(self) -> int:
        return int(self.indices[-1])

    def max_abs(self) -> float:
        return float(np.abs(self.coefs).max()) if self.size else 0.0

    def abs_values(self) -> np.ndarray:
        return np.abs(self.coefs)

    def to_sequence(self) -> "FiniteSequence":
        return self

    def entries(self) -> list[tuple[int, complex]]:
        return [(int(i), _scalar(v)) for i, v in zip(self.indices, self.coefs)]

    def get(self, index: int) -> complex:
        pos = np.searchsorted(self.indices, index)
        if pos < self.size and self.indices[pos] == index:
            return _scalar(self.coefs[pos])
        return 0.0

    def without(self, index: int) -> "FiniteSequence":
        keep = self.indices != index
        return FiniteSequence(self.indices[keep], self.coefs[keep])

    def scaled(self, factor) -> "FiniteSequence":
        return FiniteSequence(self.indices, self.coefs * factor)

    def __add__(self, other: "FiniteSequence") -> "FiniteSequence":
        idx = np.union1d(self.indices, other.indices)
        dtype = np.result_type(self.coefs, other.coefs, float)
        val = np.zeros(idx.size, dtype=dtype)
        val[np.searchsorted(idx, self.indices)] += self.coefs
        val[np.searchsorted(idx, other.indices)] += other.coefs
        return FiniteSequence(idx, val)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteSequence):
            return NotImplemented
        return (np.array_equal(self.indices, other.indices)
                and np.array_equal(self.coefs, other.coefs))

    def __hash__(self):
        return hash((self.indices.tobytes(), self.coefs.tobytes()))

    def __repr__(self) -> str:
        body = ", ".join(f"{i}: {v!r}" for i, v in self.entries()[:8])
        more = ", ..." if self.size > 8 else ""
        return f"FiniteSequence({{{body}{more}}})"

    def to_json(self) -> dict:
        return {"entries": [[i, v] for i, v in self.entries()]}


def _scalar(v):
    return complex(v) if np.iscomplexobj(v) else float(v)


def parse_sequence(text: str | list | dict) -> FiniteSequence:
    """Read dense ``[v1, v2, ...]`` or sparse ``{"entries": [[i, v], ...]}``."""
    data = json.loads(text) if isinstance(text, str) else text
    if isinstance(data, dict):
        if set(data) != {"entries"}:
            raise ValueError("sparse sequence must have exactly the key 'entries'")
        return FiniteSequence.from_entries(data["entries"])
    if isinstance(data, list):
        return FiniteSequence.from_dense(data)
    raise ValueError("sequence must be a JSON list or an object with 'entries'")


@dataclass(frozen=True)
class Selection:
    """Strictly increasing finite index list; ``r`` is its length."""

    indices: tuple[int, ...]

    def __post_init__(self):
        arr = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        if arr.size and arr[0] < 1:
            raise ValueError("selection indices start at 1")
        if np.any(np.diff(arr) <= 0):
            raise ValueError("selection must be strictly increasing")
        object.__setattr__(self, "indices", tuple(arr.tolist()))

    @property
    def r(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __call__(self, n):
        arr = np.asarray(n, dtype=np.int64)
        if np.any(arr < 1) or np.any(arr > self.r):
            raise ValueError(f"selection is defined on 1..{self.r}")
        return np.asarray(self.indices, dtype=np.int64)[arr - 1]


@dataclass(frozen=True)
class SignPattern:
    """Unimodular multipliers; indices not listed carry sign 1."""

    signs: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {int(k): (complex(v) if isinstance(v, complex) else float(v))
                 for k, v in dict(self.signs).items()}
        for k, v in clean.items():
            if abs(abs(v) - 1.0) > 1e-15:
                raise ValueError(f"sign at {k} has modulus {abs(v)}, expected 1")
        object.__setattr__(self, "signs", clean)

    @classmethod
    def alternating(cls, indices: Iterable[int]) -> "SignPattern":
        """``eps_n = (-1)^(n+1)`` on the given indices."""
        return cls({int(i): (1.0 if int(i) % 2 else -1.0) for i in indices})

    def values_at(self, indices: np.ndarray):
        vals = [self.signs.get(int(i), 1.0) for i in indices]
        return np.asarray(vals) if vals else np.empty(0)


@dataclass(frozen=True)
class ConstantBlock:
    """Compressed block: ``value`` on every index of ``[start, start+length)``."""

    start: int
    length: int
    value: float

    def __post_init__(self):
        if self.start < 1 or self.length < 1:
            raise ValueError("constant block needs start >= 1 and length >= 1")
        if self.value == 0:
            raise ValueError("block value must be nonzero")

    @property
    def size(self) -> int:
        return self.length

    @property
    def first(self) -> int:
        return self.start

    @property
    def last(self) -> int:
        return self.start + self.length - 1

    def max_abs(self) -> float:
        return abs(self.value)

    def abs_values(self) -> np.ndarray:
        return np.full(self.length, abs(self.value))

    def to_sequence(self) -> FiniteSequence:
        return FiniteSequence(np.arange(self.start, self.start + self.length),
                              np.full(self.length, self.value))


Block = Union[FiniteSequence, ConstantBlock]


class BlockSequence:
    """Blocks on consecutive disjoint index intervals.

    Either an explicit list, or a ``generator`` called with ``n = 1, 2, ...``
    (pure in ``n``; results are memoized).  ``sizes`` optionally gives the
    support size of block ``n`` without building it, so callers can budget
    work before materializing.  Boundaries are ``p_1 = 1`` and
    ``p_{n+1} = last(supp y_n) + 1``.
    """

    def __init__(
        self,
        blocks: Iterable[Block] | None = None,
        generator: Callable[[int], Block] | None = None,
        sizes: Callable[[int], int] | None = None,
    ):
        self._blocks: list[Block] = list(blocks) if blocks is not None else []
        self._generator = generator
        self._sizes = sizes
        self._lock = threading.Lock()
        if generator is None:
            for n in range(1, len(self._blocks) + 1):
                self._validate(n, self._blocks[n - 1])

    @property
    def available(self) -> int | None:
        """Number of blocks, or ``None`` when generated on demand."""
        return None if self._generator is not None else len(self._blocks)

    @property
    def materialized(self) -> int:
        return len(self._blocks)

    def _validate(self, n: int, block: Block) -> None:
        if block.size == 0:
            raise ValueError(f"block {n} has empty support")
        if n > 1 and block.first <= self._blocks[n - 2].last:
            raise ValueError(f"block {n} overlaps block {n - 1}")

    def block(self, n: int) -> Block:
        if n < 1:
            raise IndexError("blocks are indexed from 1")
        if n <= len(self._blocks):
            return self._blocks[n - 1]
        if self._generator is None:
            raise IndexError(f"only {len(self._blocks)} blocks available, block {n} requested")
        with self._lock:
            while len(self._blocks) < n:
                k = len(self._blocks) + 1
                blk = self._generator(k)
                self._validate(k, blk)
                self._blocks.append(blk)
        return self._blocks[n - 1]

    def size(self, n: int) -> int:
        if n > len(self._blocks) and self._sizes is not None:
            return int(self._sizes(n))
        return self.block(n).size

    def boundary(self, n: int) -> int:
        """``p_n``."""
        return 1 if n == 1 else self.block(n - 1).last + 1

    def blocks(self, count: int | None = None) -> list[Block]:
        if count is None:
            if self._generator is not None:
                raise ValueError("count is required for generated block sequences")
            count = len(self._blocks)
        return [self.block(n) for n in range(1, count + 1)]

    def __len__(self) -> int:
        if self._generator is not None:
            raise TypeError("generated block sequence has no length")
        return len(self._blocks)


def decreasing_rearrangement(f: FiniteSequence) -> np.ndarray:
    """Absolute coefficients sorted nonincreasing (stable on ties)."""
    mags = np.abs(f.coefs).astype(float)
    order = np.argsort(-mags, kind="stable")
    return mags[order]


def _shift_block(block: Block, start: int) -> Block:
    if isinstance(block, ConstantBlock):
        return ConstantBlock(start, block.length, block.value)
    return FiniteSequence(np.arange(start, start + block.size), block.coefs)


def left_shift_blocks(bs: BlockSequence) -> BlockSequence:
    """Repack the nonzero coefficients onto ``1, 2, 3, ...`` block by block."""
    if bs.available is not None:
        out, start = [], 1
        for blk in bs.blocks():
            out.append(_shift_block(blk, start))
            start += blk.size
        return BlockSequence(out)

    starts = [1]
    lock = threading.Lock()

    def start_of(n: int) -> int:
        with lock:
            while len(starts) < n:
                starts.append(starts[-1] + bs.size(len(starts)))
            return starts[n - 1]

    return BlockSequence(
        generator=lambda n: _shift_block(bs.block(n), start_of(n)),
        sizes=bs.size,
    )


@dataclass
class BlockClassification:
    maxima: list[float]
    running_inf: list[float]
    verdict: str
    constant: float | None
    hump_subsequence: list[int]
    horizon: int

    def to_dict(self) -> dict:
        return {
            "maxima": self.maxima,
            "running_inf": self.running_inf,
            "verdict": self.verdict,
            "constant": self.constant,
            "hump_subsequence": self.hump_subsequence,
            "horizon": self.horizon,
        }


def classify_blocks(bs: BlockSequence, prefix_len: int, threshold: float) -> BlockClassification:
    """Finite-horizon gliding-hump / uniformly-null verdict over a prefix.

    ``gliding-hump`` when every block maximum in the prefix is at least
    ``threshold``; ``uniformly-null-trend`` when the maxima drop below the
    threshold, stay below for the rest of the prefix (at least two blocks)
    and the second half of the prefix peaks lower than the first half;
    otherwise ``inconclusive``.  ``hump_subsequence`` lists the blocks whose
    maximum reaches the threshold.
    """
    if prefix_len < 1:
        raise ValueError("prefix_len must be positive")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    maxima = [bs.block(n).max_abs() for n in range(1, prefix_len + 1)]
    running = list(np.minimum.accumulate(maxima))
    hump = [n for n, m in enumerate(maxima, 1) if m >= threshold]
    inf = float(running[-1])
    verdict, constant = "inconclusive", None
    if inf >= threshold:
        verdict, constant = "gliding-hump", inf
    else:
        tail_start = hump[-1] + 1 if hump else 1
        half = prefix_len // 2
        if (prefix_len - tail_start + 1 >= 2 and half >= 1
                and max(maxima[half:]) < max(maxima[:half])):
            verdict = "uniformly-null-trend"
    return BlockClassification(
        maxima=[float(m) for m in maxima],
        running_inf=[float(r) for r in running],
        verdict=verdict,
        constant=constant,
        hump_subsequence=hump,
        horizon=prefix_len,
    )


def dyadic_blocks(w: Weight, p: float, count: int | None = None) -> BlockSequence:
    """``y_n = W_{2^{n-1}}^{-1/p} * (g_{2^{n-1}} + ... + g_{2^n - 1})``.

    Dividing by the ``1/p`` power of the prefix sum keeps every block of
    Garling norm one for all ``p``.  ``count=None`` gives a lazy family.
    """
    def make(n: int) -> ConstantBlock:
        size = 1 << (n - 1)
        return ConstantBlock(size, size, w.prefix_sum(size) ** (-1.0 / p))

    if count is None:
        return BlockSequence(generator=make, sizes=lambda n: 1 << (n - 1))
    return BlockSequence([make(n) for n in range(1, count + 1)])
