"""Finite-scale experiments on Garling spaces.

* ``symmetry_defect``: the vector with coefficients ``(n w_n)^{-1/p}`` against
  its reversal; the ratio of their Garling norms grows without bound for
  bi-regular weights while their Lorentz norms coincide.
* ``select_lp_subsequence``: the recursive choice of a subsequence of a
  uniformly null normalized block sequence that is ``(1+eps)``-equivalent to
  the unit vector basis of ``l_p``, with the functionals of the left inverse.
* ``verify_factorization``, ``domination_check``, ``partial_sum_growth`` and
  ``permutation_defect``: randomized and deterministic checks around it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .norms import garling_norm, lorentz_norm, lp_norm
from .sequences import (
    BlockSequence,
    ConstantBlock,
    FiniteSequence,
    classify_blocks,
)
from .weights import Weight

__all__ = [
    "WorkBudgetExceeded",
    "NotUniformlyNull",
    "SelectionInvariantError",
    "DefectRow",
    "DEFECT_COLUMNS",
    "defect_vectors",
    "symmetry_defect",
    "SelectionStep",
    "SelectionTrace",
    "select_lp_subsequence",
    "lp_embedding",
    "lp_projection",
    "FactorizationReport",
    "verify_factorization",
    "domination_check",
    "partial_sum_growth",
    "permutation_defect",
    "random_lp_unit",
]


class WorkBudgetExceeded(RuntimeError):
    pass


class NotUniformlyNull(ValueError):
    pass


class SelectionInvariantError(AssertionError):
    pass


def random_lp_unit(rng: np.random.Generator, dim: int, p: float) -> np.ndarray:
    """Uniform ``[-1, 1]`` entries scaled to unit ``l_p`` norm."""
    while True:
        b = rng.uniform(-1.0, 1.0, dim)
        norm = float(np.sum(np.abs(b) ** p) ** (1 / p))
        if norm > 0:
            return b / norm


def _combination(blocks, coefs) -> FiniteSequence:
    idx, val = [], []
    for blk, c in zip(blocks, coefs):
        if c == 0:
            continue
        seq = blk.to_sequence()
        idx.append(seq.indices)
        val.append(seq.coefs * c)
    if not idx:
        return FiniteSequence()
    return FiniteSequence(np.concatenate(idx), np.concatenate(val))


# -- symmetry defect ------------------------------------------------------------
DEFECT_COLUMNS = ("r", "norm_f", "norm_g_rev", "harmonic", "defect", "lorentz_common")


@dataclass
class DefectRow:
    r: int
    norm_f: float
    norm_g_rev: float
    harmonic: float
    defect: float
    lorentz_common: float
    lorentz_rev: float = field(default=math.nan, repr=False)
    p: float = field(default=1.0, repr=False)

    @property
    def rev_exceeds_f(self) -> bool:
        return self.norm_g_rev > self.norm_f

    def violations(self) -> list[str]:
        out = []
        if self.norm_f ** self.p < self.harmonic - 1e-12:
            out.append(f"r={self.r}: ||f||^p below the harmonic sum")
        if abs(self.lorentz_common - self.lorentz_rev) > 1e-12 * self.lorentz_common:
            out.append(f"r={self.r}: Lorentz norms of f and its reversal differ")
        return out

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in DEFECT_COLUMNS}


def defect_vectors(w: Weight, p: float, r: int) -> tuple[FiniteSequence, FiniteSequence]:
    """``f`` with ``a_n = (n w_n)^{-1/p}`` on ``1..r`` and its reversal ``g``."""
    n = np.arange(1, r + 1, dtype=float)
    a = (n * w.values(r)) ** (-1.0 / p)
    idx = np.arange(1, r + 1)
    return FiniteSequence(idx, a), FiniteSequence(idx, a[::-1].copy())


def symmetry_defect(w: Weight, p: float, r_list, budget: float | None = None) -> list[DefectRow]:
    """Garling norms of ``f^(r)`` and its reversal for each ``r``.

    ``budget`` bounds the total number of DP cells (``2 r^2`` per row).
    """
    r_list = [int(r) for r in r_list]
    if any(r < 1 for r in r_list):
        raise ValueError("r must be positive")
    cost = sum(2 * r * r for r in r_list)
    if budget is not None and cost > budget:
        raise WorkBudgetExceeded(f"defect rows need {cost} DP cells, budget is {budget:g}")
    rows = []
    for r in r_list:
        f, g = defect_vectors(w, p, r)
        nf = garling_norm(f, w, p).value
        ng = garling_norm(g, w, p).value
        rows.append(DefectRow(
            r=r,
            norm_f=nf,
            norm_g_rev=ng,
            harmonic=math.fsum(1.0 / k for k in range(1, r + 1)),
            defect=nf / ng,
            lorentz_common=lorentz_norm(f, w, p).value,
            lorentz_rev=lorentz_norm(g, w, p).value,
            p=p,
        ))
    return rows


# -- l_p subsequence selection --------------------------------------------------
@dataclass(frozen=True)
class SelectionStep:
    k: int
    L: int
    M: int
    n_k: int
    q_k: int
    q_next: int
    A_k: float
    threshold: float

    def to_dict(self) -> dict:
        return {
            "k": self.k, "L": self.L, "M": self.M, "n_k": self.n_k,
            "q_k": self.q_k, "q_next": self.q_next, "A_k": self.A_k,
            "threshold": self.threshold,
        }


@dataclass
class SelectionTrace:
    """Completed steps of the construction plus what is needed to rebuild
    the maps ``R: l_p -> g`` and ``T: g -> l_p``."""

    alpha: float
    epsilon: float
    p: float
    steps: list[SelectionStep] = field(default_factory=list)
    functionals: list[np.ndarray] = field(default_factory=list)
    selected_blocks: list = field(default_factory=list)   # minimal, left-shifted
    minimal_blocks: list = field(default_factory=list)    # minimal, original place
    original_blocks: list = field(default_factory=list)
    stop_reason: str = ""
    work: int = 0

    @property
    def K(self) -> int:
        return len(self.steps)

    def z_block(self, k: int) -> np.ndarray:
        """Coefficients of the k-th (1-based) left-shifted selected block."""
        return self.selected_blocks[k - 1].abs_values()

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "p": self.p,
            "steps": [s.to_dict() for s in self.steps],
            "block_sizes": [b.size for b in self.selected_blocks],
            "stop_reason": self.stop_reason,
            "work": self.work,
        }


class _Budget:
    def __init__(self, limit: float):
        self.limit = limit
        self.used = 0

    @property
    def remaining(self) -> float:
        return self.limit - self.used

    def charge(self, amount: int) -> None:
        if self.used + amount > self.limit:
            raise WorkBudgetExceeded(
                f"work budget {self.limit:g} exhausted ({self.used} used, {amount} more needed)")
        self.used += amount


class _PreparedBlocks:
    """Blocks replaced by minimal predecessors, then left-shifted, on demand."""

    def __init__(self, bs: BlockSequence, w: Weight, p: float, budget: _Budget, norm_tol: float):
        self.bs, self.w, self.p = bs, w, p
        self.budget = budget
        self.norm_tol = norm_tol
        self.original: list = []
        self.minimal: list = []
        self.shifted: list = []
        self.next_start = 1

    def has(self, n: int) -> bool:
        return self.bs.available is None or n <= self.bs.available

    def size_hint(self, n: int) -> int:
        return self.bs.size(n)

    def get(self, n: int):
        from .norms import minimal_predecessor

        while len(self.shifted) < n:
            j = len(self.shifted) + 1
            self.budget.charge(self.bs.size(j))
            blk = self.bs.block(j)
            if isinstance(blk, ConstantBlock):
                if blk.value < 0:
                    raise ValueError(f"block {j} has negative coefficients; apply signs first")
                norm = blk.value * self.w.prefix_sum(blk.size) ** (1 / self.p)
                minimal = blk
            else:
                if np.iscomplexobj(blk.coefs) or np.any(blk.coefs < 0):
                    raise ValueError(f"block {j} has non-positive coefficients; apply signs first")
                self.budget.charge(blk.size ** 2)
                norm = garling_norm(blk, self.w, self.p).value
                if np.all(blk.coefs == blk.coefs[0]):
                    minimal = blk
                else:
                    self.budget.charge(blk.size ** 4)
                    minimal = minimal_predecessor(blk, self.w, self.p)
            if abs(norm - 1.0) > self.norm_tol:
                raise ValueError(f"block {j} is not normalized (norm {norm!r})")
            if isinstance(minimal, ConstantBlock):
                shifted = ConstantBlock(self.next_start, minimal.size, minimal.value)
            else:
                shifted = FiniteSequence(
                    np.arange(self.next_start, self.next_start + minimal.size), minimal.coefs)
            self.next_start += minimal.size
            self.original.append(blk)
            self.minimal.append(minimal)
            self.shifted.append(shifted)
        return self.shifted[n - 1]


def _least_L(w: Weight, q: int, target: float, budget: _Budget) -> int:
    """Least ``L >= 1`` with ``w_{L+1} + ... + w_{L+q-1} < target``."""
    if q <= 1:
        return 1

    def ok(L: int) -> bool:
        # a step needs more than L + q coefficients, so larger L cannot finish
        if L + q > budget.remaining:
            raise WorkBudgetExceeded(f"least L exceeds {L} with q = {q}")
        budget.charge(q - 1)
        return w.window_sum(L + 1, L + q - 1) < target

    if ok(1):
        return 1
    lo, hi = 1, 2
    monotone = w._provable or w.normalized_nonincreasing
    if not monotone:
        while not ok(hi):
            hi += 1
        return hi
    # window sums of a nonincreasing weight are nonincreasing in L
    while not ok(hi):
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def select_lp_subsequence(
    bs: BlockSequence,
    w: Weight,
    p: float,
    epsilon: float,
    budget: float = 1e9,
    max_steps: int | None = None,
    null_check_prefix: int = 12,
    null_check_threshold: float = 0.1,
    norm_tol: float = 1e-9,
) -> SelectionTrace:
    """Recursive selection of blocks equivalent to the ``l_p`` basis.

    With ``alpha = (1+eps)^{-p}``, ``q_1 = 1`` and ``n_0 = 0``, step ``k``:

    1. ``L`` = least integer with ``w_{L+1} + ... + w_{L+q_k-1} < (1-alpha)/2``;
    2. ``M`` = one past the last left-shifted coefficient that is at least
       ``((1-alpha)/(2L))^{1/p}`` (over the blocks generated so far);
    3. ``n_k`` = least ``j > n_{k-1}`` with ``p_j >= M`` and block size
       ``> L + q_k``; then ``q_{k+1} = q_k + size``;
    4. ``A_k = sum_t a_{p_j+t}^p w_{q_k+t}`` must be at least ``alpha``.

    Work (coefficients and weights touched, DP cells) is charged against
    ``budget``; running out after at least one step returns the partial
    trace with ``stop_reason == "budget"``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    p = float(p)
    alpha = (1.0 + epsilon) ** (-p)
    work = _Budget(budget)
    prefix = null_check_prefix if bs.available is None else min(null_check_prefix, bs.available)
    if prefix < 1:
        raise ValueError("empty block sequence")
    for n in range(1, prefix + 1):
        work.charge(bs.size(n))
    verdict = classify_blocks(bs, prefix, null_check_threshold)
    if verdict.verdict != "uniformly-null-trend":
        raise NotUniformlyNull(
            f"blocks are not uniformly null over {prefix} blocks ({verdict.verdict})")

    prepared = _PreparedBlocks(bs, w, p, work, norm_tol)
    trace = SelectionTrace(alpha=alpha, epsilon=epsilon, p=p)
    q, n_prev = 1, 0
    last_big = 0   # last left-shifted index holding a coefficient >= threshold
    scanned = 0

    def fail(reason: str) -> SelectionTrace:
        if not trace.steps:
            if reason == "budget":
                raise WorkBudgetExceeded(
                    f"work budget {budget:g} exhausted before the first step completed")
            raise NotUniformlyNull("no block meets the selection thresholds")
        trace.stop_reason = reason
        trace.work = work.used
        return trace

    k = 0
    while max_steps is None or k < max_steps:
        k += 1
        try:
            L = _least_L(w, q, (1 - alpha) / 2, work)
        except WorkBudgetExceeded:
            return fail("budget")
        # every admissible block has more than L + q coefficients to sum
        if L + q > work.remaining:
            return fail("budget")
        thr = ((1 - alpha) / (2 * L)) ** (1 / p)
        # thresholds only shrink, so rescan everything generated for this one
        last_big = 0
        for n in range(1, scanned + 1):
            last_big = max(last_big, _last_at_least(prepared.shifted[n - 1], thr))
        j = n_prev
        chosen = None
        while chosen is None:
            j += 1
            if not prepared.has(j):
                return fail("blocks-exhausted")
            if prepared.size_hint(j) > work.remaining:
                return fail("budget")
            try:
                blk = prepared.get(j)
            except WorkBudgetExceeded:
                return fail("budget")
            scanned = max(scanned, j)
            last_big = max(last_big, _last_at_least(blk, thr))
            M = last_big + 1
            if blk.first >= M and blk.size > L + q:
                chosen = blk
        s = chosen.size
        try:
            work.charge(s)
        except WorkBudgetExceeded:
            return fail("budget")
        a = chosen.abs_values()
        wv = np.asarray(w.values(q + s - 1))[q - 1:]
        A = float(np.dot(a ** p, wv))
        if A < alpha:
            raise SelectionInvariantError(
                f"step {k}: A_k = {A!r} < alpha = {alpha!r} (L={L}, M={M}, block {j}, size {s})")
        trace.steps.append(SelectionStep(k=k, L=L, M=M, n_k=j, q_k=q, q_next=q + s,
                                         A_k=A, threshold=thr))
        trace.functionals.append(a ** (p - 1) * wv / A)
        trace.selected_blocks.append(chosen)
        trace.minimal_blocks.append(prepared.minimal[j - 1])
        trace.original_blocks.append(prepared.original[j - 1])
        q, n_prev = q + s, j
    trace.stop_reason = "max-steps"
    trace.work = work.used
    return trace


def _last_at_least(blk, thr: float) -> int:
    if isinstance(blk, ConstantBlock):
        return blk.last if abs(blk.value) >= thr else 0
    hits = np.flatnonzero(np.abs(blk.coefs) >= thr)
    return int(blk.indices[hits[-1]]) if hits.size else 0


def lp_embedding(trace: SelectionTrace, b) -> FiniteSequence:
    """``R(b) = sum_k b_k y_{n_k}``."""
    b = np.asarray(b)
    if b.size != trace.K:
        raise ValueError(f"expected {trace.K} coefficients, got {b.size}")
    return _combination(trace.original_blocks, b)


def _values_on(f: FiniteSequence, blk) -> np.ndarray:
    if isinstance(blk, ConstantBlock):
        lo = np.searchsorted(f.indices, blk.first)
        hi = np.searchsorted(f.indices, blk.last, side="right")
        out = np.zeros(blk.size, dtype=np.result_type(f.coefs, float))
        out[f.indices[lo:hi] - blk.first] = f.coefs[lo:hi]
        return out
    pos = np.searchsorted(f.indices, blk.indices)
    pos_c = np.minimum(pos, max(f.size - 1, 0))
    hit = (pos < f.size) & (f.indices[pos_c] == blk.indices) if f.size else np.zeros(blk.size, bool)
    out = np.zeros(blk.size, dtype=np.result_type(f.coefs, float))
    out[hit] = f.coefs[pos_c[hit]]
    return out


def lp_projection(trace: SelectionTrace, f: FiniteSequence) -> np.ndarray:
    """``T(f) = S(V_phi(P_A f))`` with ``A`` the union of the selected minimal
    supports and ``phi`` its increasing enumeration."""
    return np.array([np.dot(func, _values_on(f, blk))
                     for func, blk in zip(trace.functionals, trace.minimal_blocks)])


@dataclass
class FactorizationReport:
    s_values: list[float]
    max_s_error: float
    identity_max_error: float
    trials: int
    upper_violations: int
    lower_violations: int
    max_ratio: float
    min_ratio: float
    max_tr_error: float
    lower_bound: float
    tol: float

    @property
    def passed(self) -> bool:
        return (self.max_s_error <= self.tol and self.identity_max_error <= self.tol
                and self.upper_violations == 0 and self.lower_violations == 0
                and self.max_tr_error <= self.tol)

    def to_dict(self) -> dict:
        return {
            "s_values": self.s_values,
            "max_s_error": self.max_s_error,
            "identity_max_error": self.identity_max_error,
            "trials": self.trials,
            "upper_violations": self.upper_violations,
            "lower_violations": self.lower_violations,
            "max_ratio": self.max_ratio,
            "min_ratio": self.min_ratio,
            "max_tr_error": self.max_tr_error,
            "lower_bound": self.lower_bound,
            "passed": self.passed,
        }


def verify_factorization(trace: SelectionTrace, w: Weight, p: float, trials: int,
                         rng_seed: int, tol: float = 1e-12,
                         budget: float | None = None) -> FactorizationReport:
    """Check ``S(z_k) = 1``, ``T R = Id`` and the two-sided ``l_p`` estimate.

    For ``trials`` random unit vectors ``b`` of ``l_p``:
    ``(1+eps)^{-1} <= ||R b||_g <= 1``.
    """
    if trace.K == 0:
        raise ValueError("trace has no completed steps")
    s_values = [float(np.dot(func, trace.z_block(k)))
                for k, func in enumerate(trace.functionals, 1)]
    eye = np.eye(trace.K)
    identity_err = max(float(np.max(np.abs(lp_projection(trace, lp_embedding(trace, e)) - e)))
                       for e in eye)
    n_support = sum(b.size for b in trace.original_blocks)
    runs = sum(1 if isinstance(b, ConstantBlock) else b.size for b in trace.original_blocks)
    if budget is not None and trials * runs * n_support > budget:
        raise WorkBudgetExceeded("combination DPs exceed the work budget")

    rng = np.random.default_rng(rng_seed)
    lower = 1.0 / (1.0 + trace.epsilon)
    upper_v = lower_v = 0
    ratios, tr_err = [], 0.0
    for _ in range(trials):
        b = random_lp_unit(rng, trace.K, p)
        combo = lp_embedding(trace, b)
        g = garling_norm(combo, w, p).value
        ratios.append(g)
        upper_v += g > 1.0 + tol
        lower_v += g < lower - tol
        tr_err = max(tr_err, float(np.max(np.abs(lp_projection(trace, combo) - b))))
    return FactorizationReport(
        s_values=s_values,
        max_s_error=max(abs(s - 1.0) for s in s_values),
        identity_max_error=identity_err,
        trials=trials,
        upper_violations=int(upper_v),
        lower_violations=int(lower_v),
        max_ratio=max(ratios) if ratios else math.nan,
        min_ratio=min(ratios) if ratios else math.nan,
        max_tr_error=tr_err,
        lower_bound=lower,
        tol=tol,
    )


@dataclass
class DominationReport:
    max_ratio: float
    min_ratio: float
    trials: int

    def to_dict(self) -> dict:
        return {"max_ratio": self.max_ratio, "min_ratio": self.min_ratio, "trials": self.trials}


def domination_check(bs: BlockSequence, w: Weight, p: float, trials: int, rng_seed: int,
                     max_dim: int = 8) -> DominationReport:
    """``||sum b_n y_n||_g / ||b||_p`` over random ``b`` on the first blocks.

    The first trial is the all-equal vector on ``max_dim`` blocks.
    """
    dim_cap = max_dim if bs.available is None else min(max_dim, bs.available)
    blocks = bs.blocks(dim_cap)
    rng = np.random.default_rng(rng_seed)
    ratios = []
    for t in range(trials):
        if t == 0:
            b = np.full(dim_cap, dim_cap ** (-1 / p))
        else:
            b = random_lp_unit(rng, int(rng.integers(1, dim_cap + 1)), p)
        combo = _combination(blocks, b)
        ratios.append(garling_norm(combo, w, p).value / lp_norm(FiniteSequence.from_dense(b), p))
    return DominationReport(max(ratios), min(ratios), trials)


def partial_sum_growth(bs: BlockSequence, w: Weight, p: float, m_list) -> list[float]:
    """``||y_1 + ... + y_m||_g`` for each ``m``."""
    m_list = [int(m) for m in m_list]
    blocks = bs.blocks(max(m_list))
    return [garling_norm(_combination(blocks[:m], np.ones(m)), w, p).value for m in m_list]


@dataclass
class PermutationReport:
    base_norm: float
    max_ratio: float
    min_ratio: float
    reversal_ratio: float
    lorentz_norm: float
    lorentz_bound_violations: int
    trials: int

    def to_dict(self) -> dict:
        return {
            "base_norm": self.base_norm,
            "max_ratio": self.max_ratio,
            "min_ratio": self.min_ratio,
            "reversal_ratio": self.reversal_ratio,
            "lorentz_norm": self.lorentz_norm,
            "lorentz_bound_violations": self.lorentz_bound_violations,
            "trials": self.trials,
        }


def permutation_defect(f: FiniteSequence, w: Weight, p: float, trials: int,
                       rng_seed: int, tol: float = 1e-12) -> PermutationReport:
    """Garling norms of ``f`` with its coefficients permuted over its support.

    The reversal of the coefficient order is always included; random
    permutations are drawn on top of it.
    """
    if f.size == 0:
        raise ValueError("f must be nonzero")
    base = garling_norm(f, w, p).value
    bound = lorentz_norm(f, w, p).value
    rng = np.random.default_rng(rng_seed)
    perms = [np.arange(f.size)[::-1]] + [rng.permutation(f.size) for _ in range(trials)]
    ratios, violations = [], 0
    for perm in perms:
        norm = garling_norm(FiniteSequence(f.indices, f.coefs[perm]), w, p).value
        violations += norm > bound * (1 + tol)
        ratios.append(norm / base)
    return PermutationReport(
        base_norm=base,
        max_ratio=max(ratios),
        min_ratio=min(ratios),
        reversal_ratio=ratios[0],
        lorentz_norm=bound,
        lorentz_bound_violations=int(violations),
        trials=trials,
    )
