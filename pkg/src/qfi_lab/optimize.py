"""Bracketed one-dimensional maximisation."""

from __future__ import annotations

import math

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQ = (3 - math.sqrt(5)) / 2  # 1 / phi^2


def golden_section_max(f, a: float, b: float, tol: float = 1e-10, max_iter: int = 500):
    """Maximise a unimodal ``f`` on [a, b] by golden-section search.

    Returns ``(x, f(x))`` with the bracket shrunk below ``tol``.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    c = a + INV_PHI_SQ * h
    d = a + INV_PHI * h
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if h <= tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            h = INV_PHI * h
            c = a + INV_PHI_SQ * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = INV_PHI * h
            d = a + INV_PHI * h
            fd = f(d)
    x = c if fc > fd else d
    return x, max(fc, fd)
