r'''Exact rational linear algebra on lists of Fractions.

All geometry in this package is carried out over the rationals.  Matrices are
represented as lists of rows, each row a list of ``fractions.Fraction`` (or
ints, which are promoted on the fly).  The routines here are unoptimized
Gaussian- elimination style algorithms; every ambient dimension we encounter
is tiny (at most ~10), so clarity wins over asymptotics.
'''

from fractions import Fraction
from math import gcd


def frac_rows(mat):
    '''Copy a matrix, promoting all entries to Fraction.'''
    return [[Fraction(x) for x in row] for row in mat]


def rref(mat):
    '''Reduced row echelon form.

    Returns (R, pivots) where R is the reduced matrix and pivots is the list
    of pivot column indices.
    '''
    R = frac_rows(mat)
    if not R:
        return R, []
    rows, cols = len(R), len(R[0])
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pr = next((i for i in range(r, rows) if R[i][c] != 0), None)
        if pr is None:
            continue
        R[r], R[pr] = R[pr], R[r]
        pv = R[r][c]
        R[r] = [x / pv for x in R[r]]
        for i in range(rows):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
    return R, pivots


def rank(mat):
    return len(rref(mat)[1])


def nullspace(mat, ncols=None):
    '''Basis of the right kernel of ``mat`` (rows = constraints).'''
    if not mat:
        return [] if ncols is None else [
            [Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)
        ]
    R, pivots = rref(mat)
    cols = len(R[0])
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * cols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -R[r][fc]
        basis.append(v)
    return basis


def det(mat):
    '''Determinant by fraction-free-ish Gaussian elimination.'''
    A = frac_rows(mat)
    n = len(A)
    assert all(len(row) == n for row in A)
    sign = 1
    d = Fraction(1)
    for c in range(n):
        pr = next((i for i in range(c, n) if A[i][c] != 0), None)
        if pr is None:
            return Fraction(0)
        if pr != c:
            A[c], A[pr] = A[pr], A[c]
            sign = -sign
        d *= A[c][c]
        inv = A[c][c]
        for i in range(c + 1, n):
            if A[i][c] != 0:
                f = A[i][c] / inv
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return sign * d


def solve(mat, rhs):
    '''Solve ``mat @ x = rhs`` exactly.

    Returns one solution x (a list of Fractions), or None when inconsistent.
    ``mat`` may be rectangular; when the system is underdetermined an
    arbitrary (free-variables-zero) solution is returned.
    '''
    aug = [list(row) + [b] for row, b in zip(mat, rhs)]
    R, pivots = rref(aug)
    cols = len(mat[0]) if mat else 0
    for row in R:
        if all(x == 0 for x in row[:cols]) and row[cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for r, pc in enumerate(pivots):
        if pc == cols:
            return None
        x[pc] = R[r][cols]
    # pivots may involve free columns feeding back; re-derive properly
    for r, pc in enumerate(pivots):
        if pc == cols:
            continue
        acc = R[r][cols]
        for c in range(pc + 1, cols):
            acc -= R[r][c] * x[c]
        x[pc] = acc
    return x


def mat_vec(mat, vec):
    return [sum((Fraction(a) * b for a, b in zip(row, vec)), Fraction(0))
            for row in mat]


def dot(u, v):
    return sum((Fraction(a) * b for a, b in zip(u, v)), Fraction(0))


def primitive(vec):
    '''Scale a rational vector to a primitive integer vector.

    The result has coprime integer entries; the zero vector is returned
    unchanged.  Orientation is preserved.
    '''
    fr = [Fraction(x) for x in vec]
    if all(x == 0 for x in fr):
        return [0] * len(fr)
    from functools import reduce
    denom = reduce(lambda a, b: a * b // gcd(a, b), (x.denominator for x in fr), 1)
    ints = [int(x * denom) for x in fr]
    g = reduce(gcd, (abs(x) for x in ints))
    return [x // g for x in ints]


def sign_normalized(vec):
    '''Flip a vector so its first nonzero entry is positive.'''
    for x in vec:
        if x != 0:
            return vec if x > 0 else [-y for y in vec]
    return vec


def inverse(mat):
    '''Exact inverse of a square matrix, or None if singular.'''
    n = len(mat)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(mat)]
    R, pivots = rref(aug)
    if pivots != list(range(n)):
        return None
    return [row[n:] for row in R]
