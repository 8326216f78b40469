"""Weight sequences: construction, conjugation and finite-horizon diagnostics.

A weight is a positive sequence ``w_1, w_2, ...`` indexed from 1.  Values are
materialized lazily into an append-only cache together with the prefix sums
``W_m = w_1 + ... + w_m``.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "Weight",
    "WeightError",
    "WeightHorizonError",
    "WeightDiagnostics",
    "make_weight",
    "power_weight",
    "log_power_weight",
    "explicit_weight",
    "normalized",
    "conjugate",
    "nonincreasing_envelope",
    "diagnostics",
    "classify",
]

logger = logging.getLogger(__name__)

_MIN_CHUNK = 1024


class WeightError(ValueError):
    """Invalid weight specification or table."""


class WeightHorizonError(WeightError):
    """An explicit table is shorter than the requested horizon."""


class Weight:
    """Positive weight sequence with a lazily grown value/prefix-sum cache.

    ``formula`` maps an integer array ``n`` (1-based) to the weight values;
    explicit weights pass ``table`` instead and cannot grow past its length.
    Growth of the cache is serialized by a lock and readers only ever see
    fully written prefixes, so a Weight can be shared between threads.
    """

    def __init__(
        self,
        kind: str,
        params: dict,
        formula: Callable[[np.ndarray], np.ndarray] | None = None,
        table: np.ndarray | None = None,
        provably_nonincreasing: bool = False,
    ):
        if (formula is None) == (table is None):
            raise WeightError("exactly one of formula/table is required")
        self.kind = kind
        self.params = dict(params)
        self._formula = formula
        self._provable = provably_nonincreasing
        self._lock = threading.Lock()
        self._values = np.empty(0)
        self._prefix = np.zeros(1)
        self._monotone = True
        self._table = None
        if table is not None:
            table = np.array(table, dtype=float)
            if table.ndim != 1 or table.size == 0:
                raise WeightError("weight table must be a non-empty list")
            if not np.all(np.isfinite(table)) or np.any(table <= 0):
                raise WeightError("weight table entries must be positive")
            self._table = table
            self._extend(table.size)

    # -- cache ---------------------------------------------------------------
    @property
    def length(self) -> int | None:
        """Maximal horizon for explicit tables, ``None`` for formula families."""
        return None if self._table is None else self._table.size

    @property
    def materialized(self) -> int:
        return self._values.size

    @property
    def normalized_nonincreasing(self) -> bool:
        """``w_1 = 1`` and nonincreasing over every materialized value."""
        return self._monotone and self._values.size > 0 and self._values[0] == 1.0

    def _extend(self, n: int) -> None:
        with self._lock:
            have = self._values.size
            if n <= have:
                return
            if self._table is not None:
                if n > self._table.size:
                    raise WeightHorizonError(
                        f"explicit weight has {self._table.size} entries, {n} requested"
                    )
                target = self._table.size if have == 0 else n
                chunk = self._table[have:target]
            else:
                target = max(n, 2 * have, _MIN_CHUNK)
                chunk = np.asarray(
                    self._formula(np.arange(have + 1, target + 1, dtype=np.int64)),
                    dtype=float,
                )
                if not np.all(np.isfinite(chunk)) or np.any(chunk <= 0):
                    raise WeightError(f"{self.kind} weight produced a non-positive value")
            values = np.concatenate([self._values, chunk])
            prefix = np.concatenate([self._prefix, self._prefix[-1] + np.cumsum(chunk)])
            monotone = self._monotone and not np.any(np.diff(values[max(have - 1, 0):]) > 0)
            if self._provable and not monotone:
                raise AssertionError(f"{self.kind} weight is not nonincreasing")
            if self._monotone and not monotone:
                logger.info("%s weight is not nonincreasing; flag cleared", self.describe())
            # publish arrays before the flag so readers never see a short cache
            self._prefix = prefix
            self._values = values
            self._monotone = monotone

    def values(self, n: int) -> np.ndarray:
        """Read-only array ``[w_1, ..., w_n]``."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        self._extend(n)
        out = self._values[:n]
        out.flags.writeable = False
        return out

    def prefix_sums(self, n: int) -> np.ndarray:
        """Read-only array ``[W_0, W_1, ..., W_n]`` with ``W_0 = 0``."""
        self._extend(n)
        out = self._prefix[: n + 1]
        out.flags.writeable = False
        return out

    def __getitem__(self, n: int) -> float:
        if n < 1:
            raise IndexError("weights are indexed from 1")
        self._extend(n)
        return float(self._values[n - 1])

    def prefix_sum(self, m: int) -> float:
        self._extend(m)
        return float(self._prefix[m])

    def evaluate(self, n: np.ndarray) -> np.ndarray:
        """Evaluate at arbitrary indices without growing the cache.

        Used for windows far beyond anything worth caching; explicit tables
        still fail past their length.
        """
        n = np.asarray(n, dtype=np.int64)
        if n.size == 0:
            return np.empty(0)
        top = int(n.max())
        if top <= self._values.size:
            return self._values[n - 1]
        if self._formula is None:
            raise WeightHorizonError(
                f"explicit weight has {self._table.size} entries, {top} requested"
            )
        return np.asarray(self._formula(n), dtype=float)

    def window_sum(self, lo: int, hi: int) -> float:
        """``w_lo + ... + w_hi`` (0 when ``hi < lo``)."""
        if hi < lo:
            return 0.0
        if hi <= self._values.size:
            return float(self._prefix[hi] - self._prefix[lo - 1])
        total = 0.0
        step = 1 << 20
        for start in range(lo, hi + 1, step):
            stop = min(hi, start + step - 1)
            total += float(self.evaluate(np.arange(start, stop + 1)).sum())
        return total

    def describe(self) -> str:
        if self.kind == "power":
            return f"pow:a={self.params['a']!r}"
        if self.kind == "log-power":
            return f"logpow:a={self.params['a']!r},b={self.params['b']!r}"
        if self.kind == "quotient-normalized":
            return f"normalized({self.params['inner']})"
        return f"{self.kind}[{self.length}]"

    def __repr__(self) -> str:
        return f"Weight({self.describe()})"


# -- constructors ---------------------------------------------------------------
def power_weight(a: float) -> Weight:
    """``w_n = n^{-a}`` for ``0 <= a <= 1`` (``a = 1`` is outside the class but allowed)."""
    a = float(a)
    if not 0.0 <= a <= 1.0:
        raise WeightError(f"power exponent must lie in [0, 1], got {a}")
    return Weight(
        "power", {"a": a}, formula=lambda n: n.astype(float) ** (-a),
        provably_nonincreasing=True,
    )


def log_power_weight(a: float, b: float) -> Weight:
    """``w_n = (log(1+n))^b n^{-a} / (log 2)^b``, normalized so ``w_1 = 1``.

    Monotonicity is verified on materialization, not assumed: for ``b > 0``
    the sequence may increase for small ``n``.
    """
    a, b = float(a), float(b)
    if not 0.0 <= a <= 1.0:
        raise WeightError(f"power exponent must lie in [0, 1], got {a}")
    log2 = math.log(2.0)

    def formula(n: np.ndarray) -> np.ndarray:
        x = n.astype(float)
        out = (np.log1p(x) / log2) ** b * x ** (-a)
        out[n == 1] = 1.0
        return out

    return Weight("log-power", {"a": a, "b": b}, formula=formula,
                  provably_nonincreasing=(b <= 0))


def explicit_weight(values, require_normalized: bool = True) -> Weight:
    table = np.array(values, dtype=float)
    if table.ndim != 1 or table.size == 0:
        raise WeightError("weight table must be a non-empty list")
    if np.any(~np.isfinite(table)) or np.any(table <= 0):
        raise WeightError("weight table entries must be positive")
    if require_normalized and table[0] != 1.0:
        raise WeightError(f"explicit weight must start with 1.0, got {table[0]!r}")
    return Weight("explicit", {}, table=table)


def normalized(inner: Weight) -> Weight:
    """Divide ``inner`` by its first value."""
    first = inner[1]
    if inner.length is not None:
        return explicit_weight(inner.values(inner.length) / first)
    return Weight(
        "quotient-normalized", {"inner": inner.describe()},
        formula=lambda n: inner.evaluate(n) / first,
    )


def make_weight(spec: str) -> Weight:
    """Parse a weight spec.

    Grammar::

        pow:a=<float>
        logpow:a=<float>,b=<float>
        file:<path>          one positive float per line, first line 1.0
        table:<v1>,<v2>,...
    """
    kind, sep, body = spec.strip().partition(":")
    if not sep:
        raise WeightError(f"cannot parse weight spec {spec!r}")
    try:
        if kind == "pow":
            params = _parse_params(body, ("a",))
            return power_weight(params["a"])
        if kind == "logpow":
            params = _parse_params(body, ("a", "b"))
            return log_power_weight(params["a"], params["b"])
        if kind == "table":
            return explicit_weight([float(v) for v in body.split(",") if v.strip()])
        if kind == "file":
            lines = Path(body).read_text().split()
            return explicit_weight([float(v) for v in lines])
    except (ValueError, OSError) as exc:
        if isinstance(exc, WeightError):
            raise
        raise WeightError(f"cannot parse weight spec {spec!r}: {exc}") from exc
    raise WeightError(f"unknown weight kind {kind!r} in {spec!r}")


def _parse_params(body: str, names: tuple[str, ...]) -> dict[str, float]:
    params = {}
    for item in body.split(","):
        key, eq, value = item.partition("=")
        if not eq:
            raise WeightError(f"expected key=value, got {item!r}")
        params[key.strip()] = float(value)
    if set(params) != set(names):
        raise WeightError(f"expected parameters {names}, got {tuple(params)}")
    return params


def conjugate(w: Weight, horizon: int) -> Weight:
    """Explicit conjugate weight ``w*_n = 1/(n w_n)`` for ``n <= horizon``."""
    n = np.arange(1, horizon + 1, dtype=float)
    return explicit_weight(1.0 / (n * w.values(horizon)), require_normalized=False)


def nonincreasing_envelope(w: Weight, horizon: int) -> Weight:
    """``v_n = min_{k<=n} w_k / w_1``: the normalized nonincreasing weight
    equivalent to an essentially decreasing ``w``."""
    vals = w.values(horizon)
    return explicit_weight(np.minimum.accumulate(vals) / vals[0])


# -- diagnostics ----------------------------------------------------------------
@dataclass
class WeightDiagnostics:
    horizon: int
    ed_sup: float
    reg_sup: float
    conj_reg_sup: float
    eq2_sup: float
    trend_samples: list[dict] = field(default_factory=list)
    in_W_report: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "ed_sup": self.ed_sup,
            "reg_sup": self.reg_sup,
            "conj_reg_sup": self.conj_reg_sup,
            "eq2_sup": self.eq2_sup,
            "trend_samples": self.trend_samples,
            "in_W_report": self.in_W_report,
        }


def eq2_sum(w: np.ndarray, m: int) -> float:
    """``sum_{n=1}^m w_{m+1-n} / (n w_n)`` from an array of weight values."""
    head = w[:m]
    n = np.arange(1, m + 1, dtype=float)
    return float(np.dot(head[::-1], 1.0 / (n * head)))


def diagnostics(w: Weight, horizon: int) -> WeightDiagnostics:
    """Finite-horizon statistics of the weight taxonomy.

    Every statistic is a running maximum, so it can only grow with the
    horizon; nothing here decides asymptotic class membership.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    vals = w.values(horizon)
    prefix = w.prefix_sums(horizon)[1:]
    n = np.arange(1, horizon + 1, dtype=float)
    ed = np.maximum.accumulate(vals / np.minimum.accumulate(vals))
    reg = np.maximum.accumulate(prefix / (n * vals))
    conj = 1.0 / (n * vals)
    conj_reg = np.maximum.accumulate(np.cumsum(conj) / (n * conj))

    samples = [1 << j for j in range(horizon.bit_length()) if (1 << j) <= horizon]
    eq2_running = 0.0
    trend = []
    for m in samples:
        eq2_running = max(eq2_running, eq2_sum(vals, m))
        trend.append({
            "m": m,
            "ed": float(ed[m - 1]),
            "reg": float(reg[m - 1]),
            "conj_reg": float(conj_reg[m - 1]),
            "eq2": eq2_running,
        })

    half = max(horizon // 2, 1)
    quarter = max(horizon // 4, 1)
    upper = prefix[-1] - prefix[half - 1]
    lower = prefix[half - 1] - prefix[quarter - 1]
    report = {
        "w1_is_one": bool(vals[0] == 1.0),
        "nonincreasing_to_horizon": bool(not np.any(np.diff(vals) > 0)),
        # last octave still decreasing and the tail is below the head
        "c0_decay_trend": bool(horizon >= 4 and vals[-1] < vals[half - 1]),
        # dyadic block sums not shrinking geometrically
        "l1_divergence_trend": bool(horizon >= 4 and lower > 0 and upper >= 0.95 * lower),
        "tail_weight": float(vals[-1]),
        "prefix_sum": float(prefix[-1]),
    }
    return WeightDiagnostics(
        horizon=horizon,
        ed_sup=float(ed[-1]),
        reg_sup=float(reg[-1]),
        conj_reg_sup=float(conj_reg[-1]),
        eq2_sup=eq2_running,
        trend_samples=trend,
        in_W_report=report,
    )


def classify(w: Weight, horizon: int, bound: float) -> dict[str, bool]:
    """Taxonomy booleans, each meaning "statistic <= bound up to horizon"."""
    d = diagnostics(w, horizon)
    regular = d.reg_sup <= bound
    conj_regular = d.conj_reg_sup <= bound
    return {
        "horizon": horizon,
        "bound": bound,
        "essentially_decreasing": d.ed_sup <= bound,
        "regular": regular,
        "conjugate_regular": conj_regular,
        "bi_regular": regular and conj_regular,
        "eq2_bounded": d.eq2_sup <= bound,
    }
