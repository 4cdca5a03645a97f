"""Grid-then-golden-section maximization for smooth one-dimensional objectives."""

import math

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section_max(f, a, b, tol=1e-6, max_iter=200):
    """Maximize a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x))`` for the best point evaluated, including the
    endpoints, so the result never falls below ``max(f(a), f(b))``.
    """
    a, b = min(a, b), max(a, b)
    best_x, best_f = a, f(a)
    fb = f(b)
    if fb > best_f:
        best_x, best_f = b, fb
    h = b - a
    if h <= tol:
        return best_x, best_f
    n = min(max_iter, int(math.ceil(math.log(tol / h) / math.log(INV_PHI))))
    c = a + INV_PHI_SQ * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n):
        if yc > yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI_SQ * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d)
    for x, y in ((c, yc), (d, yd)):
        if y > best_f:
            best_x, best_f = x, y
    return best_x, best_f


def grid_then_golden(f, grid, tol=1e-6):
    """Evaluate ``f`` on an ascending ``grid``, then refine around the best cell.

    Returns ``(x, f(x))``; the refined value is never worse than the best
    grid value.
    """
    values = [f(x) for x in grid]
    k = max(range(len(grid)), key=values.__getitem__)
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    x, y = golden_section_max(f, lo, hi, tol=tol)
    if y >= values[k]:
        return x, y
    return grid[k], values[k]
