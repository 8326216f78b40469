"""Sign multiplication, coordinate projection, extraction and spreading.

Conventions follow the displayed definitions: ``extract`` (V_phi) reads
``(V_phi f)_n = a_{phi(n)}``, ``spread`` (U_phi) moves ``a_k`` to index
``phi(k)``.  Hence ``extract(phi, spread(phi, f)) == f`` and ``spread`` is
the Garling isometry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .sequences import FiniteSequence, Selection, SignPattern

__all__ = [
    "IncreasingMap",
    "IndexSet",
    "apply_signs",
    "project",
    "extract",
    "spread",
    "parse_map",
    "parse_signs",
]


@dataclass(frozen=True)
class IncreasingMap:
    """Strictly increasing map ``phi: {1, 2, ...} -> {1, 2, ...}``.

    ``kind`` is one of ``affine`` (``a n + b``), ``power`` (``n^k``),
    ``dyadic`` (``2^(n-1)``) or ``explicit`` (a finite Selection, defined on
    ``1..r`` only).
    """

    kind: str
    params: tuple = ()
    selection: Selection | None = None

    @classmethod
    def identity(cls) -> "IncreasingMap":
        return cls("affine", (1, 0))

    @classmethod
    def affine(cls, a: int, b: int) -> "IncreasingMap":
        if a < 1 or a + b < 1:
            raise ValueError("affine map needs a >= 1 and a + b >= 1")
        return cls("affine", (int(a), int(b)))

    @classmethod
    def power(cls, k: int) -> "IncreasingMap":
        if k < 1:
            raise ValueError("power map needs k >= 1")
        return cls("power", (int(k),))

    @classmethod
    def dyadic(cls) -> "IncreasingMap":
        return cls("dyadic")

    @classmethod
    def explicit(cls, indices: Iterable[int]) -> "IncreasingMap":
        return cls("explicit", selection=Selection(tuple(indices)))

    @property
    def domain(self) -> int | None:
        return self.selection.r if self.kind == "explicit" else None

    def __call__(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        if np.any(n < 1):
            raise ValueError("maps are defined on positive integers")
        if self.kind == "affine":
            a, b = self.params
            return a * n + b
        if self.kind == "power":
            return n ** self.params[0]
        if self.kind == "dyadic":
            if np.any(n > 62):
                raise OverflowError("dyadic map exceeds 64-bit indices")
            return np.left_shift(np.int64(1), n - 1)
        return self.selection(n)

    def values_up_to(self, bound: int) -> np.ndarray:
        """``phi(1), phi(2), ...`` while the value stays ``<= bound``."""
        if self.kind == "explicit":
            vals = np.asarray(self.selection.indices, dtype=np.int64)
            return vals[vals <= bound]
        hi = 1
        while self(hi)[()] <= bound:
            hi *= 2
        vals = self(np.arange(1, hi + 1))
        return vals[vals <= bound]


class IndexSet:
    """Strictly increasing set of positive integers, explicit or an interval."""

    def __init__(self, indices: Iterable[int] = (), interval: tuple[int, int] | None = None):
        self.interval = interval
        if interval is None:
            arr = np.unique(np.asarray(list(indices), dtype=np.int64))
            if arr.size and arr[0] < 1:
                raise ValueError("indices start at 1")
            self.indices = arr
        else:
            self.indices = None

    def contains(self, idx: np.ndarray) -> np.ndarray:
        if self.interval is not None:
            lo, hi = self.interval
            return (idx >= lo) & (idx <= hi)
        return np.isin(idx, self.indices)


def apply_signs(eps: SignPattern, f: FiniteSequence) -> FiniteSequence:
    if f.size == 0:
        return f
    return FiniteSequence(f.indices, f.coefs * eps.values_at(f.indices))


def project(A, f: FiniteSequence) -> FiniteSequence:
    """Keep the coordinates in ``A`` (an IndexSet or any iterable of ints)."""
    if not isinstance(A, IndexSet):
        A = IndexSet(A)
    keep = A.contains(f.indices)
    return FiniteSequence(f.indices[keep], f.coefs[keep])


def _as_map(phi) -> IncreasingMap:
    if isinstance(phi, IncreasingMap):
        return phi
    if isinstance(phi, Selection):
        return IncreasingMap("explicit", selection=phi)
    return IncreasingMap.explicit(phi)


def extract(phi, f: FiniteSequence) -> FiniteSequence:
    """``(V_phi f)_n = a_{phi(n)}``."""
    phi = _as_map(phi)
    if f.size == 0:
        return f
    values = phi.values_up_to(f.last)
    if values.size == 0:
        return FiniteSequence()
    pos = np.searchsorted(values, f.indices)
    hit = (pos < values.size) & (values[np.minimum(pos, values.size - 1)] == f.indices)
    return FiniteSequence(pos[hit] + 1, f.coefs[hit])


def spread(phi, f: FiniteSequence) -> FiniteSequence:
    """``U_phi``: the coefficient at ``k`` moves to ``phi(k)``."""
    phi = _as_map(phi)
    if f.size == 0:
        return f
    if phi.domain is not None and f.last > phi.domain:
        raise ValueError(f"map is defined on 1..{phi.domain}, support reaches {f.last}")
    return FiniteSequence(phi(f.indices), f.coefs)


def parse_map(text: str) -> IncreasingMap:
    """``identity`` | ``affine:<a>,<b>`` | ``power:<k>`` | ``dyadic`` | ``list:<i1>,<i2>,...``"""
    kind, _, body = text.strip().partition(":")
    try:
        if kind == "identity":
            return IncreasingMap.identity()
        if kind == "affine":
            a, b = (int(v) for v in body.split(","))
            return IncreasingMap.affine(a, b)
        if kind == "power":
            return IncreasingMap.power(int(body))
        if kind == "dyadic":
            return IncreasingMap.dyadic()
        if kind == "list":
            return IncreasingMap.explicit(int(v) for v in body.split(",") if v.strip())
    except ValueError as exc:
        raise ValueError(f"cannot parse map {text!r}: {exc}") from exc
    raise ValueError(f"unknown map kind {kind!r}")


def parse_signs(text: str, support: Iterable[int]) -> SignPattern:
    """``alt`` (``(-1)^(n+1)`` on the support) | ``flip:<i1>,<i2>,...``"""
    kind, _, body = text.strip().partition(":")
    if kind == "alt":
        return SignPattern.alternating(support)
    if kind == "flip":
        try:
            return SignPattern({int(v): -1.0 for v in body.split(",") if v.strip()})
        except ValueError as exc:
            raise ValueError(f"cannot parse sign pattern {text!r}") from exc
    raise ValueError(f"unknown sign pattern {text!r}")
