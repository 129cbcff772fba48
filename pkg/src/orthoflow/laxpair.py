"""First-order 2x2 systems in x and in the deformation parameters.

Everything here is assembled from certified windows of banded operators:
the derivative system D_n(x) acting on the wavefunction pair
(psi_{n-1}, psi_n), the semi-infinite derivative operator P, the
deformation generators U_k (antisymmetric, bandwidth k) and their 2x2
projections. Construction is exact given the recurrence coefficients;
truncation pollution is excluded by trust windows rather than estimated.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mpf

from .errors import OutsideTrustWindow
from .jacobi import BandedOperator, divided_difference_entry, triangular_split
from .polynomials import Poly
from .potential import Potential


@dataclass(frozen=True)
class PolyMatrix2x2:
    """2x2 matrix of polynomials in x attached to wavefunction index n.

    Layout [[a, b], [c, d]]; degree_bound is the structural cap on every
    entry's degree.
    """

    a: Poly
    b: Poly
    c: Poly
    d: Poly
    n: int
    degree_bound: int

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def trace(self) -> Poly:
        return self.a + self.d

    def det(self) -> Poly:
        return self.a * self.d - self.b * self.c

    def apply(self, v0, v1, x):
        """Evaluate (matrix @ (v0, v1)) at the point x."""
        return (
            self.a(x) * v0 + self.b(x) * v1,
            self.c(x) * v0 + self.d(x) * v1,
        )

    def __sub__(self, other: "PolyMatrix2x2") -> "PolyMatrix2x2":
        return PolyMatrix2x2(
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
            self.n,
            max(self.degree_bound, other.degree_bound),
        )

    def __add__(self, other: "PolyMatrix2x2") -> "PolyMatrix2x2":
        return PolyMatrix2x2(
            self.a + other.a,
            self.b + other.b,
            self.c + other.c,
            self.d + other.d,
            self.n,
            max(self.degree_bound, other.degree_bound),
        )

    def scale(self, s) -> "PolyMatrix2x2":
        s = mpf(s)
        return PolyMatrix2x2(
            self.a * s, self.b * s, self.c * s, self.d * s,
            self.n, self.degree_bound,
        )

    def scale_x(self) -> "PolyMatrix2x2":
        """Multiply every entry by x."""
        x = Poly.x_power(1)
        return PolyMatrix2x2(
            self.a * x, self.b * x, self.c * x, self.d * x,
            self.n, self.degree_bound + 1,
        )

    def max_abs(self):
        return max(e.max_abs() for e in self.entries())


@dataclass(frozen=True)
class DerivativeData:
    """The two divided-difference entries feeding the derivative system.

    u(x) = R(x)[n][n-1] (degree <= deg V' - 2) and
    v(x) = R(x)[n][n] (degree <= deg V' - 1), stored without the gamma_n
    prefactor; assembly applies it.
    """

    n: int
    u: Poly
    v: Poly
    gamma_n: object


def eta(k: int, n: int, vprime_q: BandedOperator):
    """Band entry eta_{k,n} = V'(Q)[n][n+k], the expansion coefficient of
    V'(x) psi_n on psi_{n+k}. Certified entries only."""
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    return vprime_q.entry(n, n + k, require_trust=True)


def p_matrix(vprime_q: BandedOperator) -> BandedOperator:
    """Derivative operator P = -(1/2)(V'(Q)_+ - V'(Q)_-).

    Built from the strictly-upper part and its transpose so antisymmetry
    holds exactly, not merely to roundoff; the diagonal of V'(Q) vanishes
    by the string equation and is dropped structurally.
    """
    _, _, upper = triangular_split(vprime_q)
    return (upper.transpose() - upper).scale(mpf(1) / 2)


def derivative_data(n: int, p: Potential, Q: BandedOperator) -> DerivativeData:
    """u_n(x), v_n(x), gamma_n for the derivative system at index n >= 1."""
    n = int(n)
    if n < 1:
        raise ValueError("derivative system starts at n = 1")
    c = p.vprime_coeffs()
    d = len(c) - 1
    u = divided_difference_entry(c, Q, n, n - 1)
    v = divided_difference_entry(c, Q, n, n)
    _assert_degree(u, d - 2, "u_n")
    _assert_degree(v, d - 1, "v_n")
    return DerivativeData(
        n=n, u=u, v=v, gamma_n=Q.entry(n, n - 1, require_trust=True)
    )


def d_matrix(n: int, p: Potential, Q: BandedOperator) -> PolyMatrix2x2:
    """Derivative system D_n(x): d/dx (psi_{n-1}, psi_n) = D_n (psi_{n-1}, psi_n).

    D_n = (V'(x)/2) diag(1, -1)
          + [[R[n-1][n-1], R[n-1][n]], [R[n][n-1], R[n][n]]]
            @ [[0, -gamma_n], [gamma_n, 0]]

    with R(x) the divided difference (V'(Q) - V'(x))/(Q - x). Entries are
    polynomials of degree <= deg V'.
    """
    n = int(n)
    if n < 1:
        raise ValueError("derivative system starts at n = 1")
    c = p.vprime_coeffs()
    d = len(c) - 1
    half_vp = Poly(c) * mpf("0.5")
    g = Q.entry(n, n - 1, require_trust=True)
    r_prev = divided_difference_entry(c, Q, n - 1, n - 1)
    r_mid = divided_difference_entry(c, Q, n - 1, n)
    r_low = divided_difference_entry(c, Q, n, n - 1)
    r_diag = divided_difference_entry(c, Q, n, n)
    return PolyMatrix2x2(
        a=half_vp + r_mid * g,
        b=-(r_prev * g),
        c=r_diag * g,
        d=-half_vp - r_low * g,
        n=n,
        degree_bound=d,
    )


def u_k_matrix(k: int, Q: BandedOperator) -> BandedOperator:
    """Deformation generator U_k = -(1/2k)((Q^k)_+ - (Q^k)_-).

    Antisymmetric with bandwidth k, exact by construction from the
    strictly-upper part of Q^k.
    """
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    qk = Q.power(k)
    _, _, upper = triangular_split(qk)
    return (upper.transpose() - upper).scale(mpf(1) / (2 * k))


def cal_u_matrix(k: int, n: int, Q: BandedOperator) -> PolyMatrix2x2:
    """2x2 deformation system for d/du_k acting on (psi_{n-1}, psi_n):

        (1/2k) diag(x^k - (Q^k)[n-1][n-1], (Q^k)[n][n] - x^k)
        + (gamma_n/k) [[S[n][n-1], -S[n-1][n-1]], [S[n][n], -S[n][n-1]]]

    where S(x) = (x^k - Q^k)/(x - Q). Entries have degree <= k; the trace
    is the constant (1/2k)((Q^k)[n][n] - (Q^k)[n-1][n-1]).
    """
    k = int(k)
    n = int(n)
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < 1:
        raise ValueError("deformation system starts at n = 1")
    mono = [mpf(0)] * k + [mpf(1)]
    qk = Q.power(k)
    g = Q.entry(n, n - 1, require_trust=True)
    s_lo = divided_difference_entry(mono, Q, n, n - 1)
    s_prev = divided_difference_entry(mono, Q, n - 1, n - 1)
    s_diag = divided_difference_entry(mono, Q, n, n)
    xk = Poly.x_power(k)
    half = mpf(1) / (2 * k)
    gk = g / k
    a = (xk - qk.entry(n - 1, n - 1, require_trust=True)) * half + s_lo * gk
    b = -(s_prev * gk)
    c = s_diag * gk
    d = (Poly.constant(qk.entry(n, n, require_trust=True)) - xk) * half - s_lo * gk
    return PolyMatrix2x2(a=a, b=b, c=c, d=d, n=n, degree_bound=k)


def d_from_flows(n: int, p: Potential, Q: BandedOperator) -> PolyMatrix2x2:
    """Independent route to D_n: the weighted sum of deformation systems

        D_n(x) = sum_{k=1}^{deg V'} u_{k+1} * k * calU_k(x).

    Exercises every U_k against the direct divided-difference assembly.
    """
    n = int(n)
    c = p.vprime_coeffs()
    d = len(c) - 1
    if d < 1:
        raise ValueError("potential must have deg V' >= 1")
    total = None
    for k in range(1, d + 1):
        if c[k] == 0:
            continue
        term = cal_u_matrix(k, n, Q).scale(c[k] * k)
        total = term if total is None else total + term
    if total is None:
        raise ValueError("V' has no terms of degree >= 1")
    return PolyMatrix2x2(
        a=total.a, b=total.b, c=total.c, d=total.d, n=n, degree_bound=d
    )


def _assert_degree(poly: Poly, bound: int, label: str):
    if poly.degree > bound:
        raise ArithmeticError(
            f"{label} has degree {poly.degree}, structural bound {bound}"
        )
