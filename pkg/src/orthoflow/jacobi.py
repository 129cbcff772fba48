"""Banded truncations of the multiplication operator and their calculus.

The multiplication-by-x operator in the orthonormal basis is an infinite
symmetric tridiagonal matrix. We work with N x N truncations and track a
*trust window* T: entries A[n][m] with max(n, m) < T are exactly the
entries of the infinite operator. Every multiplication against a
bandwidth-b operator lets truncation effects creep b indices inward from
the N edge, so trust shrinks accordingly; consumers must stay inside the
window or get OutsideTrustWindow.

Storage is by diagonal offset: band[o][n] = A[n][n+o].
"""

from __future__ import annotations

from mpmath import mpf

from .errors import OutsideTrustWindow
from .polynomials import Poly


class BandedOperator:
    """Immutable banded N x N matrix with a certified trust window."""

    __slots__ = ("N", "bandwidth", "trust", "_bands", "_power_cache")

    def __init__(self, N, bandwidth, trust, bands):
        self.N = int(N)
        self.bandwidth = int(bandwidth)
        self.trust = max(0, min(int(trust), self.N))
        self._bands = {
            int(o): tuple(mpf(v) for v in vals) for o, vals in bands.items()
        }
        for o, vals in self._bands.items():
            if abs(o) > self.bandwidth:
                raise ValueError(f"offset {o} exceeds bandwidth {self.bandwidth}")
            if len(vals) != self.N:
                raise ValueError("band arrays must have length N")
        self._power_cache = {}

    # -- construction ----------------------------------------------------

    @classmethod
    def identity(cls, N):
        return cls(N, 0, N, {0: [mpf(1)] * N})

    @classmethod
    def from_recurrence(cls, rc, N=None) -> "BandedOperator":
        """Truncated Jacobi operator: diagonal beta_n, off-diagonals gamma_n.

        Entries: Q[n][n+1] = gamma_{n+1}, Q[n][n] = beta_n,
        Q[n][n-1] = gamma_n. All N^2 stored entries equal the infinite
        operator's, so trust = N.
        """
        if N is None:
            N = rc.N
        N = int(N)
        if not 1 <= N <= rc.N:
            raise ValueError(f"N must be in [1, {rc.N}]")
        diag = [rc.beta[n] for n in range(N)]
        upper = [rc.gamma[n + 1] if n < N - 1 else mpf(0) for n in range(N)]
        lower = [rc.gamma[n] if n >= 1 else mpf(0) for n in range(N)]
        return cls(N, 1, N, {0: diag, 1: upper, -1: lower})

    # -- queries -----------------------------------------------------------

    def band(self, o: int) -> tuple:
        return self._bands.get(int(o), tuple([mpf(0)] * self.N))

    def certified(self, n: int, m: int) -> bool:
        """True when entry (n, m) provably equals the infinite operator's."""
        if abs(n - m) > self.bandwidth:
            return True  # structural zero at every truncation
        return 0 <= n and 0 <= m and max(n, m) < self.trust

    def entry(self, n: int, m: int, require_trust: bool = False):
        """Entry A[n][m]; outside the band it is a structural zero.

        With require_trust=True, an entry inside the band but outside the
        trust window raises OutsideTrustWindow instead of returning a
        possibly truncation-polluted value.
        """
        n = int(n)
        m = int(m)
        if n < 0 or m < 0:
            raise OutsideTrustWindow(n, m, self.trust)
        if abs(n - m) > self.bandwidth:
            return mpf(0)
        if max(n, m) >= self.N:
            raise OutsideTrustWindow(n, m, self.trust)
        if require_trust and max(n, m) >= self.trust:
            raise OutsideTrustWindow(n, m, self.trust)
        row = self._bands.get(m - n)
        return row[n] if row is not None else mpf(0)

    def max_abs(self):
        out = mpf(0)
        for vals in self._bands.values():
            for v in vals:
                out = max(out, abs(v))
        return out

    def to_dense(self):
        """Full N x N list-of-lists. Test oracle plumbing, not a production path."""
        out = [[mpf(0)] * self.N for _ in range(self.N)]
        for o, vals in self._bands.items():
            for n in range(max(0, -o), min(self.N, self.N - o)):
                out[n][n + o] = vals[n]
        return out

    # -- arithmetic --------------------------------------------------------

    def _combine(self, other, sign):
        if self.N != other.N:
            raise ValueError("size mismatch")
        b = max(self.bandwidth, other.bandwidth)
        bands = {}
        for o in range(-b, b + 1):
            mine = self._bands.get(o)
            theirs = other._bands.get(o)
            if mine is None and theirs is None:
                continue
            mine = mine or tuple([mpf(0)] * self.N)
            theirs = theirs or tuple([mpf(0)] * self.N)
            bands[o] = [x + sign * y for x, y in zip(mine, theirs)]
        return BandedOperator(
            self.N, b, min(self.trust, other.trust), bands
        )

    def __add__(self, other):
        return self._combine(other, mpf(1))

    def __sub__(self, other):
        return self._combine(other, mpf(-1))

    def scale(self, c) -> "BandedOperator":
        c = mpf(c)
        return BandedOperator(
            self.N,
            self.bandwidth,
            self.trust,
            {o: [c * v for v in vals] for o, vals in self._bands.items()},
        )

    def __neg__(self):
        return self.scale(-1)

    def add_scalar(self, c) -> "BandedOperator":
        """A + c*I."""
        c = mpf(c)
        diag = list(self._bands.get(0, tuple([mpf(0)] * self.N)))
        bands = {o: list(v) for o, v in self._bands.items()}
        bands[0] = [v + c for v in diag]
        return BandedOperator(self.N, self.bandwidth, self.trust, bands)

    def transpose(self) -> "BandedOperator":
        bands = {}
        for o, vals in self._bands.items():
            flipped = [mpf(0)] * self.N
            for n in range(max(0, -o), min(self.N, self.N - o)):
                flipped[n + o] = vals[n]
            bands[-o] = flipped
        return BandedOperator(self.N, self.bandwidth, self.trust, bands)

    def multiply(self, other: "BandedOperator") -> "BandedOperator":
        """Banded product with trust window contraction.

        trust(AB) = min(T_A - b_B, T_B - b_A, N - min(b_A, b_B)): inside
        that window every summation index both stays below N and hits
        certified entries of both factors.
        """
        if self.N != other.N:
            raise ValueError("size mismatch")
        N = self.N
        b = min(self.bandwidth + other.bandwidth, N - 1)
        bands = {o: [mpf(0)] * N for o in range(-b, b + 1)}
        for oa, avals in self._bands.items():
            for ob, bvals in other._bands.items():
                o = oa + ob
                if abs(o) > b:
                    continue
                target = bands[o]
                lo = max(0, -oa, -o)
                hi = min(N, N - oa, N - o)
                for n in range(lo, hi):
                    a = avals[n]
                    if a != 0:
                        target[n] += a * bvals[n + oa]
        trust = min(
            self.trust - other.bandwidth,
            other.trust - self.bandwidth,
            N - min(self.bandwidth, other.bandwidth),
        )
        return BandedOperator(N, b, trust, bands)

    def power(self, k: int) -> "BandedOperator":
        """A^k by repeated multiplication, memoized on the instance.

        Trust is clamped to N - k*bandwidth (for the tridiagonal Q this is
        the documented N - k), slightly below what iterated multiplication
        alone would give; conservatism here is free soundness.
        """
        k = int(k)
        if k < 0:
            raise ValueError("negative powers unsupported")
        cached = self._power_cache.get(k)
        if cached is not None:
            return cached
        if k == 0:
            out = BandedOperator.identity(self.N)
        elif k == 1:
            out = self
        else:
            out = self.power(k - 1).multiply(self)
        clamp = self.N - k * self.bandwidth
        if k > 1 and out.trust > clamp:
            out = BandedOperator(out.N, out.bandwidth, clamp, out._bands)
        self._power_cache[k] = out
        return out


def apply_polynomial(coeffs, Q: BandedOperator) -> BandedOperator:
    """f(Q) for f given by ascending coefficients, via Horner.

    Post: bandwidth min(deg f * Q.bandwidth, N-1); trust clamped to
    N - deg f * Q.bandwidth.
    """
    coeffs = [mpf(c) for c in coeffs]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    d = len(coeffs) - 1
    acc = BandedOperator.identity(Q.N).scale(coeffs[-1])
    for j in range(d - 1, -1, -1):
        acc = acc.multiply(Q).add_scalar(coeffs[j])
    clamp = Q.N - d * Q.bandwidth
    if d >= 1 and acc.trust > clamp:
        acc = BandedOperator(acc.N, acc.bandwidth, clamp, acc._bands)
    return acc


def triangular_split(A: BandedOperator):
    """(strictly lower, diagonal, strictly upper), trust and N preserved."""
    lower = {}
    upper = {}
    diag = {}
    for o, vals in A._bands.items():
        if o < 0:
            lower[o] = vals
        elif o > 0:
            upper[o] = vals
        else:
            diag[0] = vals
    b = A.bandwidth
    return (
        BandedOperator(A.N, b, A.trust, lower),
        BandedOperator(A.N, 0, A.trust, diag),
        BandedOperator(A.N, b, A.trust, upper),
    )


def divided_difference_entry(coeffs, Q: BandedOperator, n: int, m: int) -> Poly:
    """Entry (n, m) of R(x) = (f(Q) - f(x)) / (Q - x) as a polynomial in x.

    For f with ascending coefficients c_0..c_d, the telescoping
    (Q^j - x^j)/(Q - x) = sum_{i<j} x^i Q^{j-1-i} gives

        R(x)[n][m] = sum_i x^i * sum_{j>i} c_j (Q^{j-1-i})[n][m]

    of degree <= d-1. Entries come from certified windows of the powers of
    Q, else OutsideTrustWindow.
    """
    coeffs = [mpf(c) for c in coeffs]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    d = len(coeffs) - 1
    if d < 1:
        return Poly()
    out = []
    for i in range(d):
        acc = mpf(0)
        for j in range(i + 1, d + 1):
            if coeffs[j] == 0:
                continue
            acc += coeffs[j] * Q.power(j - 1 - i).entry(n, m, require_trust=True)
        out.append(acc)
    return Poly(out)


def dense_product(a, b):
    """Plain cubic matrix product on lists of lists. Test oracle only."""
    n = len(a)
    out = [[mpf(0)] * n for _ in range(n)]
    for i in range(n):
        for k in range(n):
            aik = a[i][k]
            if aik == 0:
                continue
            row = b[k]
            target = out[i]
            for j in range(n):
                target[j] += aik * row[j]
    return out
