"""Small scalar solvers shared by the cost, algorithm and bound modules.

Everything here is derivative free: a bracketing scan followed by
bisection for roots, and golden-section search for one-dimensional maxima.
"""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


class BracketError(RuntimeError):
    """No sign change was found on the scanned interval."""

    def __init__(self, lo: float, hi: float, step: float):
        super().__init__(f"no sign change of the residual on [{lo:.6g}, {hi:.6g}] (scan step {step:g})")
        self.lo = lo
        self.hi = hi
        self.step = step


def scan_brackets(f: Callable[[float], float], lo: float, hi: float, step: float = 1e-3) -> list[tuple[float, float]]:
    """Return every sub-interval of ``[lo, hi]`` of width ``step`` whose endpoints straddle a root of ``f``."""
    n = max(1, int(math.ceil((hi - lo) / step)))
    brackets = []
    a, fa = lo, f(lo)
    for i in range(1, n + 1):
        b = lo + (hi - lo) * i / n
        fb = f(b)
        if fa == 0.0:
            brackets.append((a, a))
        elif fa * fb < 0.0:
            brackets.append((a, b))
        a, fa = b, fb
    if fa == 0.0:
        brackets.append((a, a))
    return brackets


def bisect(f: Callable[[float], float], a: float, b: float, xtol: float = 1e-13) -> float:
    """Bisection on a sign-changing bracket.

    Iterates until the bracket is narrower than ``xtol`` or cannot be split
    further in double precision.
    """
    fa = f(a)
    if fa == 0.0:
        return a
    fb = f(b)
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise ValueError(f"f({a}) and f({b}) have the same sign")
    while b - a > xtol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = f(m)
        if fm == 0.0:
            return m
        if fa * fm < 0.0:
            b = m
        else:
            a, fa = m, fm
    # return the endpoint with the smaller residual
    return a if abs(fa) <= abs(f(b)) else b


def first_root(f: Callable[[float], float], lo: float, hi: float, step: float = 1e-3, xtol: float = 1e-13) -> float:
    brackets = scan_brackets(f, lo, hi, step)
    if not brackets:
        raise BracketError(lo, hi, step)
    a, b = brackets[0]
    return a if a == b else bisect(f, a, b, xtol)


def golden_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``.

    The endpoints are compared against the interior estimate, so a maximum
    sitting on the boundary is returned exactly.
    """
    fa, fb = f(a), f(b)
    best = (a, fa) if fa >= fb else (b, fb)
    h = b - a
    if h <= tol:
        return best
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            h = INV_PHI * h
            c = a + INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = INV_PHI * h
            d = a + INV_PHI * h
            fd = f(d)
    x, fx = (c, fc) if fc >= fd else (d, fd)
    return (x, fx) if fx > best[1] else best
