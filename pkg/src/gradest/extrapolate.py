"""Sequence acceleration for limits of geometric-tail sequences."""

from __future__ import annotations

import math

__all__ = ["aitken_accelerate", "sequence_limit"]


def _aitken_pass(seq):
    out = []
    for i in range(len(seq) - 2):
        d1 = seq[i + 1] - seq[i]
        d2 = seq[i + 2] - seq[i + 1]
        den = d2 - d1
        if den == 0.0 or not math.isfinite(den):
            out.append(seq[i + 2])
        else:
            out.append(seq[i + 2] - d2 * d2 / den)
    return out


def _tail_spread(seq):
    tail = seq[-3:]
    return max(tail) - min(tail) if len(tail) >= 2 else math.inf


def aitken_accelerate(seq, passes: int = 3) -> float:
    """Iterated Aitken delta-squared extrapolation; returns the best tail value.

    Passes stop early once they stop shrinking the tail spread, which guards
    against noise amplification on already-converged sequences.
    """
    cur = [float(x) for x in seq if math.isfinite(x)]
    if not cur:
        return math.nan
    for _ in range(passes):
        if len(cur) < 3:
            break
        nxt = _aitken_pass(cur)
        if not nxt or not all(math.isfinite(x) for x in nxt):
            break
        if _tail_spread(nxt) >= _tail_spread(cur):
            break
        cur = nxt
    return cur[-1]


def sequence_limit(seq, rel_tol: float = 1e-8, abs_tol: float = 1e-12):
    """Extrapolated limit of a sequence plus a stability verdict.

    Returns ``(value, stable)``; stable means two successive accelerated
    estimates agree within tolerance.  Divergent or oscillating sequences
    come back unstable.
    """
    xs = [float(x) for x in seq]
    if len(xs) < 4 or not all(math.isfinite(x) for x in xs):
        return (xs[-1] if xs else math.nan), False
    acc_prev = aitken_accelerate(xs[:-1])
    acc = aitken_accelerate(xs)
    tol = max(abs_tol, rel_tol * max(abs(acc), 1.0))
    stable = math.isfinite(acc) and math.isfinite(acc_prev) and abs(acc - acc_prev) <= tol
    return acc, stable
