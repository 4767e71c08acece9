"""Independent reference implementations used only by the tests."""

import itertools

import mpmath as mp

mp.mp.dps = 50


def cofactor_det(m):
    """Laplace expansion along the first row; factorial cost, n <= 6."""
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * m[0][j] * cofactor_det(minor)
    return total


def mp_det(entry, m):
    """High-precision determinant of the m x m matrix entry(i, j), 1-based."""
    return mp.det(mp.matrix([[entry(i, j) for j in range(1, m + 1)] for i in range(1, m + 1)]))


def permutation_degrees(m, degree):
    """Total degree of every permutation term of a matrix whose (i,j) entry has the given degree."""
    return {sum(degree(i + 1, p[i] + 1) for i in range(m)) for p in itertools.permutations(range(m))}


def ed_uncorrelated(nt, nr, beta, rho):
    nmin, nmax = min(nt, nr), max(nt, nr)
    dn = nmax - nmin
    rho, beta = mp.mpf(rho), mp.mpf(beta)
    u = mp_det(lambda i, j: (rho / nt) ** (-(i + j + dn - 1)) * mp.gamma(i + j + dn - 1)
               * mp.hyperu(i + j + dn - 1, i + j + dn - beta, nt / rho), nmin)
    den = mp.mpf(1)
    for k in range(1, nmin + 1):
        den *= mp.gamma(nmax - k + 1) * mp.gamma(nmin - k + 1)
    return u / den


def ed_correlated(nt, nr, beta, sigma, rho):
    nmin, nmax = min(nt, nr), max(nt, nr)
    dn = nmax - nmin
    rho, beta = mp.mpf(rho), mp.mpf(beta)
    sig = [mp.mpf(s) for s in sigma]
    g = mp_det(lambda i, j: (rho / nt) ** (-(dn + j)) * mp.gamma(dn + j)
               * mp.hyperu(dn + j, dn + j + 1 - beta, nt / (sig[i - 1] * rho)), nmin)
    den = mp.mpf(1)
    for k in range(nmin):
        den *= sig[k] ** (dn + 1) * mp.gamma(nmax - k)
    for a in range(nmin):
        for b in range(a + 1, nmin):
            den *= sig[b] - sig[a]
    return g / den
