"""Exact linear algebra over the rationals and the integers.

Matrices are plain lists of rows. Entries are ``int`` or ``fractions.Fraction``;
nothing in here touches floating point.
"""
from fractions import Fraction


def frac_matrix(M):
    return [[Fraction(x) for x in row] for row in M]


def shape(M, ncols=None):
    if not M:
        return 0, (ncols or 0)
    return len(M), len(M[0])


def transpose(M, ncols=None):
    nrows, nc = shape(M, ncols)
    return [[M[i][j] for i in range(nrows)] for j in range(nc)]


def matmul(A, B):
    if not A:
        return []
    Bt = transpose(B)
    return [[sum(a * b for a, b in zip(row, col) if a and b) for col in Bt] for row in A]


def matvec(A, x):
    return [sum(a * b for a, b in zip(row, x) if a and b) for row in A]


def dot(x, y):
    return sum(a * b for a, b in zip(x, y) if a and b)


def is_zero(M):
    return all(x == 0 for row in M for x in row)


def rref(M, ncols=None):
    """Reduced row echelon form.

    Returns ``(R, pivots)`` where ``R`` holds only the nonzero rows and
    ``pivots[i]`` is the pivot column of row ``i``.
    """
    R = frac_matrix(M)
    nrows, nc = shape(R, ncols)
    pivots = []
    r = 0
    for c in range(nc):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if R[i][c] != 0), None)
        if p is None:
            continue
        R[r], R[p] = R[p], R[r]
        inv = 1 / R[r][c]
        if inv != 1:
            R[r] = [x * inv for x in R[r]]
        prow = R[r]
        for i in range(nrows):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [x - f * y for x, y in zip(R[i], prow)]
        pivots.append(c)
        r += 1
    return R[:r], pivots


def rank(M, ncols=None):
    return len(rref(M, ncols)[1])


def nullspace(M, ncols):
    """Basis of ``{x : M x = 0}``, one vector per free column.

    The basis vector for free column ``f`` has ``x[f] = 1`` and zero in every
    other free column.
    """
    R, pivots = rref(M, ncols)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def solve(M, b, ncols):
    """Particular solution of ``M x = b`` with all free variables zero.

    Returns ``None`` when the system is inconsistent.
    """
    aug = [list(row) + [rhs] for row, rhs in zip(M, b)]
    R, pivots = rref(aug, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(R, pivots):
        x[p] = row[ncols]
    return x


def span_contains(vectors, v, dim):
    if not vectors:
        return all(x == 0 for x in v)
    return rank(list(vectors) + [list(v)], dim) == rank(vectors, dim)


def orthogonal_complement(vectors, dim):
    """Basis of the standard-inner-product orthogonal complement of ``span(vectors)``."""
    return nullspace(vectors, dim) if vectors else identity(dim)


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def inverse(M):
    n = len(M)
    aug = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(M)]
    R, pivots = rref(aug, 2 * n)
    if pivots[:n] != list(range(n)) or len(pivots) != n:
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in R]


def clear_denominators(v):
    """Smallest integer multiple of a rational vector with coprime entries."""
    from math import gcd, lcm

    den = 1
    for x in v:
        den = lcm(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    return [x // g for x in ints] if g else ints


def smith_form(M, ncols=None):
    """Integer diagonalisation ``U M V = D`` with ``U``, ``V`` unimodular.

    ``D`` is diagonal (no divisibility chain is enforced; callers only need
    the diagonal). Returns ``(U, D, V)`` as lists of Python ints.
    """
    nrows, nc = shape(M, ncols)
    D = [[int(x) for x in row] for row in M]
    U = [[int(i == j) for j in range(nrows)] for i in range(nrows)]
    V = [[int(i == j) for j in range(nc)] for i in range(nc)]

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, k):
        # row dst += k * row src
        D[dst] = [a + k * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a + k * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, k):
        for row in D:
            row[dst] += k * row[src]
        for row in V:
            row[dst] += k * row[src]

    for t in range(min(nrows, nc)):
        # pick the smallest nonzero entry of the remaining block as pivot
        best = None
        for i in range(t, nrows):
            for j in range(t, nc):
                if D[i][j] and (best is None or abs(D[i][j]) < abs(D[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            done = True
            for i in range(t + 1, nrows):
                if D[i][t]:
                    q = D[i][t] // D[t][t]
                    add_row(t, i, -q)
                    if D[i][t]:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, nc):
                if D[t][j]:
                    q = D[t][j] // D[t][t]
                    add_col(t, j, -q)
                    if D[t][j]:
                        swap_cols(t, j)
                        done = False
            if done:
                break
    return U, D, V


def fraction_str(x):
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(s):
    return Fraction(s)
