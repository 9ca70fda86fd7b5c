"""Exact comparisons for property inequalities.

Parameters given as decimal literals (0.3, 0.05, ...) or as ``Fraction`` are
handled exactly; anything whose denominator is too large to scale into
64-bit integers falls back to floating point with absolute slack ``SLACK``.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from numbers import Rational

import numpy as np

SLACK = 1e-9
MAX_DEN = 10**9
_SAFE = 2**62


def num(x) -> Fraction | float:
    """Exact value of ``x`` when it is a short decimal or a rational, else float."""
    if isinstance(x, Rational):
        return Fraction(x)
    f = Fraction(repr(float(x)))
    return f if f.denominator <= MAX_DEN else float(x)


def is_exact(*xs) -> bool:
    return all(isinstance(x, (int, Fraction)) for x in xs)


def le(a, b) -> bool:
    return a <= b if is_exact(a, b) else float(a) <= float(b) + SLACK


def lt(a, b) -> bool:
    return a < b if is_exact(a, b) else float(a) < float(b) + SLACK


def to_float(x) -> float:
    return float(x)


def _scale(values_max: int, *fracs) -> int | None:
    """Common denominator of ``fracs`` if the scaled integers stay within 62 bits."""
    if not is_exact(*fracs):
        return None
    L = 1
    for f in fracs:
        L = lcm(L, Fraction(f).denominator)
    biggest = max([abs(Fraction(f)) * L for f in fracs] + [0])
    if L * (values_max + 1) + biggest >= _SAFE:
        return None
    return L


def sum_abs_dev(values: np.ndarray, center) -> Fraction | float:
    """``sum |v - center|`` over an integer array."""
    values = np.asarray(values, dtype=np.int64)
    if values.size == 0:
        return Fraction(0)
    L = _scale(int(values.max(initial=0)), center)
    if L is not None and L * (int(values.max()) + abs(Fraction(center))) * values.size < _SAFE:
        c = int(Fraction(center) * L)
        return Fraction(int(np.abs(values * L - c).sum(dtype=np.int64)), L)
    return float(np.abs(values.astype(np.float64) - float(center)).sum())


def count_within(values: np.ndarray, center, radius) -> int:
    """Number of entries with ``|v - center| < radius`` (strict)."""
    values = np.asarray(values, dtype=np.int64)
    if values.size == 0:
        return 0
    L = _scale(int(values.max(initial=0)), center, radius)
    if L is not None:
        c = int(Fraction(center) * L)
        r = Fraction(radius) * L
        dev = np.abs(values * L - c)
        if (int(dev.max()) + 1) * r.denominator < _SAFE:
            return int(np.count_nonzero(dev * r.denominator < r.numerator))
        return int(sum(1 for d in dev.tolist() if d < r))
    dev = np.abs(values.astype(np.float64) - float(center))
    return int(np.count_nonzero(dev < float(radius) + SLACK))


def positive_part_sums(counts: np.ndarray, level) -> tuple[Fraction | float, Fraction | float]:
    """``(sum (c - level)+, sum (level - c)+)`` over the columns of an integer array.

    ``counts`` has shape ``(rows, batch)`` and ``level`` is a per-column value
    (scalar or length-``batch`` array of exact or float values); returns two
    length-``batch`` lists.
    """
    counts = np.asarray(counts, dtype=np.int64)
    levels = list(level) if np.ndim(level) else [level] * counts.shape[1]
    L = _scale(int(counts.max(initial=0)), *levels) if counts.size else 1
    if L is not None and L * (int(counts.max(initial=0)) + 1) * max(1, counts.shape[0]) < _SAFE:
        lv = np.array([int(Fraction(x) * L) for x in levels], dtype=np.int64)
        d = counts * L - lv[None, :]
        up = np.where(d > 0, d, 0).sum(axis=0)
        down = np.where(d < 0, -d, 0).sum(axis=0)
        return [Fraction(int(u), L) for u in up], [Fraction(int(v), L) for v in down]
    lv = np.array([float(x) for x in levels])
    d = counts - lv[None, :]
    return list(np.clip(d, 0, None).sum(axis=0)), list(np.clip(-d, 0, None).sum(axis=0))
