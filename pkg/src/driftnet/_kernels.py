"""Compiled inner loops for the decay-constant objective."""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def prefix_fits(x, t, y, lam, ncoef):
    """Weighted LS fit on every prefix ``0..k-1`` for ``k = ncoef .. len(x)-1``.

    Square-root recursive least squares: the triangular factor is shrunk by
    the exponential forgetting factor between samples and each new row is
    rotated in with Givens rotations. ``ok[i]`` is False where the factor is
    numerically singular and the caller must fall back to a direct solve.
    """
    n = x.shape[0]
    m = n - ncoef
    R = np.zeros((ncoef, ncoef + 1))
    fits = np.zeros((max(m, 0), ncoef))
    ok = np.ones(max(m, 0), dtype=np.bool_)
    row = np.empty(ncoef + 1)
    eps = np.finfo(np.float64).eps
    for k in range(n):
        if k >= ncoef:
            i = k - ncoef
            dmax = 0.0
            dmin = np.inf
            for d in range(ncoef):
                a = abs(R[d, d])
                dmax = max(dmax, a)
                dmin = min(dmin, a)
            if dmin <= dmax * k * eps:
                ok[i] = False
            else:
                for d in range(ncoef - 1, -1, -1):
                    s = R[d, ncoef]
                    for c in range(d + 1, ncoef):
                        s -= R[d, c] * fits[i, c]
                    fits[i, d] = s / R[d, d]
        if k > 0:
            f = math.sqrt(math.exp(-lam * (t[k] - t[k - 1])))
            for a in range(ncoef):
                for c in range(a, ncoef + 1):
                    R[a, c] *= f
        p = 1.0
        for c in range(ncoef):
            row[c] = p
            p *= x[k]
        row[ncoef] = y[k]
        for d in range(ncoef):
            a = R[d, d]
            b = row[d]
            if b == 0.0:
                continue
            r = math.hypot(a, b)
            cs = a / r
            sn = b / r
            for c in range(d, ncoef + 1):
                u = R[d, c]
                v = row[c]
                R[d, c] = cs * u + sn * v
                row[c] = -sn * u + cs * v
    return fits, ok


@njit(cache=True)
def _poly(c, x):
    acc = 0.0
    for j in range(c.shape[0] - 1, -1, -1):
        acc = acc * x + c[j]
    return acc


@njit(cache=True)
def scan_row(c, y, x_max, tol, npts):
    """Grid scan for the closest response, refined by bisection inside a sign change."""
    grid = np.linspace(0.0, x_max, npts)
    resid = np.empty(npts)
    best = 0
    for g in range(npts):
        resid[g] = _poly(c, grid[g]) - y
        if abs(resid[g]) < abs(resid[best]):
            best = g
    for a in (best - 1, best):
        b = a + 1
        if a >= 0 and b < npts and resid[a] * resid[b] <= 0 and resid[a] != resid[b]:
            lo = grid[a]
            hi = grid[b]
            sign = 1.0 if resid[b] > resid[a] else -1.0
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if sign * (_poly(c, mid) - y) < 0:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
    return grid[best]


@njit(cache=True)
def bisect_rows(coeffs, ys, x_max, tol, npts):
    """Invert degree <= 2 polynomials row-wise.

    Rows that are not increasing on ``[0, x_max]`` are resolved by
    :func:`scan_row` and reported with ``monotone[i] = False``.
    """
    n, ncoef = coeffs.shape
    out = np.zeros(n)
    monotone = np.ones(n, dtype=np.bool_)
    for i in range(n):
        c = coeffs[i]
        y = ys[i]
        lo_d = c[1]
        hi_d = c[1] + (2.0 * c[2] * x_max if ncoef == 3 else 0.0)
        if not (lo_d >= 0 and hi_d >= 0 and (lo_d > 0 or hi_d > 0)):
            monotone[i] = False
            out[i] = scan_row(c, y, x_max, tol, npts)
            continue
        if y <= c[0]:
            out[i] = 0.0
            continue
        if y >= _poly(c, x_max):
            out[i] = x_max
            continue
        lo = 0.0
        hi = x_max
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _poly(c, mid) < y:
                lo = mid
            else:
                hi = mid
        out[i] = 0.5 * (lo + hi)
    return out, monotone
