"""The Lobachevsky function, Lambda(t) = -int_0^t ln|2 sin s| ds.

Two independent evaluators are provided. ``lobachevsky_series`` sums the
Fourier expansion ``Lambda(t) = 1/2 sum sin(2nt)/n^2`` with an Euler-Maclaurin
tail; ``lobachevsky_quad`` integrates the definition numerically. The
series one is vectorised and is what the rest of the package calls.
"""
import math
from functools import lru_cache

import numpy as np
from scipy import integrate, special

_N = 30  # terms summed directly
_K = 20  # Euler-Maclaurin correction terms
_BERN = [float(special.bernoulli(2 * k)[2 * k]) for k in range(_K + 1)]


def _correction_polys():
    """Coefficients of P, R with sum_k B_2k/(2k)! f^(2k-1)(N) = sin(xN) P(x) + cos(xN) R(x).

    Here f(u) = sin(x u) / u^2; its m-th derivative expands by Leibniz into
    terms x^j sin(x u + j pi/2) / u^(m-j+2).
    """
    c = [0.0] * (2 * _K)
    for k in range(1, _K + 1):
        m = 2 * k - 1
        b = _BERN[k] / math.factorial(2 * k)
        for j in range(m + 1):
            c[j] += b * math.comb(m, j) * (-1) ** (m - j) * math.factorial(m - j + 1) / _N ** (m - j + 2)
    P = [cj * (1, 0, -1, 0)[j % 4] for j, cj in enumerate(c)]
    R = [cj * (0, 1, 0, -1)[j % 4] for j, cj in enumerate(c)]
    # numpy.polyval wants the leading coefficient first
    return np.array(P[::-1]), np.array(R[::-1])


_P, _R = _correction_polys()


def clausen2(x):
    """Cl_2(x) = sum sin(n x) / n^2, vectorised."""
    x = np.asarray(x, dtype=float)
    # reduce into (-pi, pi]
    x = x - 2 * math.pi * np.round(x / (2 * math.pi))
    sgn = np.sign(x)
    a = np.abs(x)
    n = np.arange(1, _N + 1, dtype=float)
    head = (np.sin(np.multiply.outer(a, n)) / n**2).sum(axis=-1)

    # sum_{n>N} f(n) = int_N^inf f - f(N)/2 - sum_k B_2k/(2k)! f^(2k-1)(N)
    safe = np.where(a > 0, a, 1.0)
    si, ci = special.sici(safe * _N)
    integral = np.sin(safe * _N) / _N - safe * ci
    sN, cN = np.sin(safe * _N), np.cos(safe * _N)
    tail = integral - 0.5 * sN / _N**2 - sN * np.polyval(_P, safe) - cN * np.polyval(_R, safe)
    total = np.where(a > 0, head + tail, 0.0)
    return sgn * total


def lobachevsky_series(t):
    t = np.asarray(t, dtype=float)
    out = 0.5 * clausen2(2 * t)
    return float(out) if out.ndim == 0 else out


def lobachevsky(t):
    """Lambda(t) for a scalar or array ``t``."""
    return lobachevsky_series(t)


def _log_sinc(s):
    # ln|sin(s)/s|, smooth through s = 0
    return np.log(np.abs(np.sinc(s / math.pi)))


def _piece(a, b, k):
    """int_a^b ln|2 sin s| ds where k*pi is whichever of a, b is a multiple of pi."""
    c = k * math.pi
    smooth, _ = integrate.quad(
        lambda s: math.log(2) + _log_sinc(s - c), a, b, epsabs=1e-15, epsrel=1e-13, limit=200
    )

    def F(d):
        return d * math.log(d) - d if d > 0 else 0.0

    # int_a^b ln|s - c| ds with [a, b] on one side of c
    if c <= a:
        sing = F(b - c) - F(a - c)
    else:
        sing = F(c - a) - F(c - b)
    return smooth + sing


@lru_cache(maxsize=None)
def _full_piece(j):
    # integral over [j pi/2, (j+1) pi/2]
    a, b = j * math.pi / 2, (j + 1) * math.pi / 2
    k = j // 2 if j % 2 == 0 else (j + 1) // 2
    return _piece(a, b, k)


def lobachevsky_quad(t):
    """Lambda(t) by adaptive quadrature of the defining integral.

    The interval [0, t] is cut at multiples of pi/2 so that every piece has
    the logarithmic singularity (if any) at one endpoint; there the
    singular part ln|s - k pi| is integrated in closed form.
    """
    t = float(t)
    if t == 0.0:
        return 0.0
    if t < 0:
        # integrand is even
        return -lobachevsky_quad(-t)
    h = math.pi / 2
    m = int(t // h)
    total = sum(_full_piece(j) for j in range(m))
    a = m * h
    if t > a:
        k = m // 2 if m % 2 == 0 else (m + 1) // 2
        total += _piece(a, t, k)
    return -total
