"""Garling, Lorentz, weak-Lorentz and l_p norms of finitely supported vectors.

The Garling norm is

    ||f||_g^p = max over S = {i_1 < ... < i_r} of  sum_k |a_{i_k}|^p w_k

and only subsets of the support need to be considered.  It is computed by a
dynamic program over the support positions whose state is the number of
coordinates selected so far (equivalently, the next weight slot).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sequences import FiniteSequence, Selection, decreasing_rearrangement
from .weights import Weight

__all__ = [
    "NormReport",
    "SupportTooLarge",
    "garling_norm",
    "garling_norm_oracle",
    "lorentz_norm",
    "weak_lorentz_quasinorm",
    "lp_norm",
    "is_minimal",
    "minimal_predecessor",
    "norm_attaining_check",
    "selection_sum",
    "ORACLE_MAX_SUPPORT",
]

ORACLE_MAX_SUPPORT = 20

# Two DP optima closer than this (relative) are treated as a tie and the
# smaller selection wins; well below the 1e-12 agreement we promise.
_TIE_RTOL = 1e-13


class SupportTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class NormReport:
    value: float
    p_power: float
    optimal_selection: Selection
    algorithm: str

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "p_power": self.p_power,
            "selection": list(self.optimal_selection.indices),
            "algorithm": self.algorithm,
        }


def _check_p(p: float) -> float:
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"exponent p must be >= 1, got {p}")
    return p


def _runs(x: np.ndarray) -> list[tuple[int, int]]:
    """(start, length) of maximal runs of equal consecutive values."""
    if x.size == 0:
        return []
    cuts = np.flatnonzero(x[1:] != x[:-1]) + 1
    starts = np.concatenate([[0], cuts])
    ends = np.concatenate([cuts, [x.size]])
    return list(zip(starts.tolist(), (ends - starts).tolist()))


def _window_argmax(y: np.ndarray, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Max and argmax of ``y[i : i + width]`` for every full window.

    Van Herk / Gil-Werman: prefix and suffix maxima inside blocks of
    ``width``.  Ties go to the largest index.
    """
    n = y.size
    nb = -(-n // width)
    pad = nb * width - n
    z = np.concatenate([y, np.full(pad, -np.inf)]).reshape(nb, width)
    pos = np.arange(nb * width).reshape(nb, width)

    pre = np.maximum.accumulate(z, axis=1)
    pre_arg = np.maximum.accumulate(np.where(z >= pre, pos, -1), axis=1)

    zr = z[:, ::-1]
    suf_r = np.maximum.accumulate(zr, axis=1)
    prev = np.concatenate([np.full((nb, 1), -np.inf), suf_r[:, :-1]], axis=1)
    rec = np.where(zr > prev, pos[:, ::-1], np.iinfo(np.int64).max)
    suf_arg = np.minimum.accumulate(rec, axis=1)[:, ::-1]
    suf = suf_r[:, ::-1]

    pre, pre_arg = pre.ravel(), pre_arg.ravel()
    suf, suf_arg = suf.ravel(), suf_arg.ravel()
    m = n - width + 1
    i = np.arange(m)
    left, left_arg = suf[i], suf_arg[i]
    right, right_arg = pre[i + width - 1], pre_arg[i + width - 1]
    use_right = right >= left
    return np.where(use_right, right, left), np.where(use_right, right_arg, left_arg)


def _garling_dp(mags: np.ndarray, w: np.ndarray) -> tuple[float, list[int]]:
    """Max of ``sum_k mags[i_k] * w[k]`` over increasing position lists.

    ``mags`` holds ``|a|^p`` in support order.  Runs of equal consecutive
    magnitudes are processed at once: within a run any ``k`` of its positions
    occupy ``k`` consecutive weight slots, so only the count matters and

        V'[K] = c W_K + max_{K-s <= K' <= K} (V[K'] - c W_{K'}),

    a sliding-window maximum.  Returns the optimal p-th power and the
    selected positions (0-based, increasing).
    """
    n = mags.size
    W = np.concatenate([[0.0], np.cumsum(w[:n])])
    V = np.zeros(1)
    choices = []
    runs = _runs(mags)
    for start, s in runs:
        c = float(mags[start])
        total = V.size - 1
        T = total + s
        if s == 1:
            keep = np.concatenate([V, [-np.inf]])
            take = np.concatenate([[-np.inf], V + c * w[:T]])
            pick = take > keep
            V = np.where(pick, take, keep)
            choices.append(pick)
            continue
        G = V - c * W[: total + 1]
        y = np.concatenate([np.full(s, -np.inf), G, np.full(s, -np.inf)])
        best, arg = _window_argmax(y, s + 1)
        best, arg = best[: T + 1], arg[: T + 1]
        K = np.arange(T + 1)
        V = c * W[: T + 1] + best
        choices.append((K - (arg - s)).astype(np.int64))

    top = float(V.max()) if V.size else 0.0
    if top <= 0:
        return 0.0, []
    K = int(np.flatnonzero(V >= top * (1 - _TIE_RTOL))[0])
    value = top
    picked = []
    for (start, s), choice in zip(reversed(runs), reversed(choices)):
        k = int(choice[K])
        if k:
            picked.extend(range(start + k - 1, start - 1, -1))
        K -= k
    picked.reverse()
    return value, picked


def garling_norm(f: FiniteSequence, w: Weight, p: float = 1.0) -> NormReport:
    """Exact Garling norm with an attaining selection.

    Among optimal selections the one of least cardinality is returned; ties
    inside that cardinality are resolved towards selecting earlier
    positions, and within a run of equal magnitudes the first coordinates
    are used.  Vectors whose coefficients all share one modulus use the
    closed form ``|c| W_N^{1/p}`` (the full support is the unique optimum).
    """
    p = _check_p(p)
    n = f.size
    if n == 0:
        return NormReport(0.0, 0.0, Selection(()), "closed-form")
    mags = np.abs(f.coefs).astype(float) ** p
    if np.all(mags == mags[0]):
        p_power = float(mags[0] * w.prefix_sum(n))
        return NormReport(p_power ** (1 / p), p_power, Selection(f.indices), "closed-form")
    p_power, picked = _garling_dp(mags, w.values(n))
    sel = Selection(f.indices[picked]) if picked else Selection(())
    return NormReport(p_power ** (1 / p), p_power, sel, "dp")


def selection_sum(f: FiniteSequence, selection: Selection, w: Weight, p: float = 1.0) -> float:
    """``sum_k |a_{phi(k)}|^p w_k`` for a selection inside the support."""
    if selection.r == 0:
        return 0.0
    pos = np.searchsorted(f.indices, np.asarray(selection.indices))
    if np.any(pos >= f.size) or np.any(f.indices[np.minimum(pos, f.size - 1)] != selection.indices):
        raise ValueError("selection leaves the support")
    mags = np.abs(f.coefs[pos]).astype(float) ** p
    return float(np.dot(mags, w.values(selection.r)))


def garling_norm_oracle(f: FiniteSequence, w: Weight, p: float = 1.0) -> float:
    """Exhaustive maximum over all ``2^N`` subsets of the support (N <= 20)."""
    p = _check_p(p)
    n = f.size
    if n > ORACLE_MAX_SUPPORT:
        raise SupportTooLarge(f"support of size {n} exceeds the oracle cap {ORACLE_MAX_SUPPORT}")
    if n == 0:
        return 0.0
    mags = np.abs(f.coefs).astype(float) ** p
    wv = np.asarray(w.values(n))
    best = 0.0
    chunk = 1 << min(n, 15)
    shifts = np.arange(n, dtype=np.int64)
    for lo in range(0, 1 << n, chunk):
        masks = np.arange(lo, min(lo + chunk, 1 << n), dtype=np.int64)
        bits = (masks[:, None] >> shifts) & 1
        slot = np.cumsum(bits, axis=1) - 1
        terms = np.where(bits == 1, mags[None, :] * wv[np.maximum(slot, 0)], 0.0)
        best = max(best, float(terms.sum(axis=1).max()))
    return best ** (1 / p)


def lorentz_norm(f: FiniteSequence, w: Weight, p: float = 1.0) -> NormReport:
    """Lorentz norm: decreasing rearrangement paired with the weights.

    The weights ``w_1..w_N`` are themselves sorted nonincreasing first,
    which changes nothing for nonincreasing weights and keeps the value
    equal to the maximum over bijections ``supp f -> {1..N}`` otherwise.
    The reported selection lists the support in the order of the pairing.
    """
    p = _check_p(p)
    n = f.size
    if n == 0:
        return NormReport(0.0, 0.0, Selection(()), "rearrangement")
    mags = np.abs(f.coefs).astype(float)
    order = np.argsort(-mags, kind="stable")
    wv = np.sort(np.asarray(w.values(n)))[::-1]
    p_power = float(np.dot(mags[order] ** p, wv))
    return NormReport(p_power ** (1 / p), p_power, Selection(f.indices), "rearrangement")


def weak_lorentz_quasinorm(f: FiniteSequence, w: Weight, p: float = 1.0) -> float:
    """``max_n W_n^{1/p} a*_n``."""
    p = _check_p(p)
    if f.size == 0:
        return 0.0
    star = decreasing_rearrangement(f)
    W = np.asarray(w.prefix_sums(f.size))[1:]
    return float(np.max(W ** (1 / p) * star))


def lp_norm(f: FiniteSequence, p: float = 1.0) -> float:
    p = _check_p(p)
    if f.size == 0:
        return 0.0
    return float(np.sum(np.abs(f.coefs) ** p) ** (1 / p))


def _preserves(norm: float, reference: float, tol: float) -> bool:
    return norm >= reference * (1 - tol)


def is_minimal(f: FiniteSequence, w: Weight, p: float = 1.0,
               tol: float = 1e-9) -> tuple[bool, int | None]:
    """Minimality test by single-coordinate removal.

    Returns ``(True, None)`` or ``(False, i)`` with ``i`` the lowest index
    whose removal keeps the norm (within relative ``tol``).

    Single removals suffice: coordinate projections are contractive and
    monotone in the projected set, so if a proper subset ``B`` of the
    support preserves the norm then so does the larger set ``supp \\ {i}``
    for any ``i`` outside ``B``.
    """
    if f.size == 0:
        raise ValueError("minimality is defined for nonzero vectors")
    mags = np.abs(f.coefs)
    if np.all(mags == mags[0]):
        # constant modulus: multiple of an indicator, always minimal
        return True, None
    full = garling_norm(f, w, p).value
    for i in f.indices:
        if _preserves(garling_norm(f.without(int(i)), w, p).value, full, tol):
            return False, int(i)
    return True, None


def minimal_predecessor(f: FiniteSequence, w: Weight, p: float = 1.0,
                        tol: float = 1e-9) -> FiniteSequence:
    """Drop norm-preserving coordinates (lowest index first) until minimal."""
    g = f
    while g.size:
        minimal, witness = is_minimal(g, w, p, tol)
        if minimal:
            break
        g = g.without(witness)
    return g


def norm_attaining_check(f: FiniteSequence, w: Weight, p: float = 1.0) -> bool:
    """Whether the DP's optimal selection is the whole support."""
    return garling_norm(f, w, p).optimal_selection.r == f.size
