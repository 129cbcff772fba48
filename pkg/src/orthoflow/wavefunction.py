"""Pointwise evaluation of orthonormal wavefunctions and their derivatives.

psi_n(x) = p_n(x) e^{-V(x)/2} / sqrt(h_n) with p_n monic. Evaluation runs
the three-term recurrence in the working precision; mpf exponents are
unbounded, so e^{-V/2} never under- or overflows and no log-scaling is
needed. Finite differences here are diagnostics: the derivative systems
they validate are exact constructions.
"""

from __future__ import annotations

from mpmath import mp, mpf, sqrt, exp

from .moments import RecurrenceCoefficients
from .potential import Potential


class WaveState:
    """Potential plus validated recurrence coefficients, ready to evaluate."""

    __slots__ = ("potential", "rc")

    def __init__(self, potential: Potential, rc: RecurrenceCoefficients,
                 validate: bool = True):
        # validate=False is for fault-injection studies, where the point is
        # to let downstream checks see an inconsistent coefficient set
        if validate:
            rc.validate()
        self.potential = potential
        self.rc = rc

    @property
    def n_max(self) -> int:
        # psi_n needs gamma_n and beta_{n-1}
        return self.rc.N - 1

    def _check_n(self, n: int) -> int:
        n = int(n)
        if not 0 <= n <= self.n_max:
            raise ValueError(
                f"n={n} outside the evaluable range [0, {self.n_max}]"
            )
        return n

    def eval_monic(self, n: int, x):
        """Monic orthogonal polynomial p_n(x)."""
        n = self._check_n(n)
        x = mpf(x)
        prev, cur = mpf(0), mpf(1)
        for m in range(n):
            prev, cur = cur, (
                (x - self.rc.beta[m]) * cur
                - self.rc.gamma[m] ** 2 * prev
            )
        return cur

    def psi_all(self, x, n_max: int):
        """[psi_0(x), ..., psi_{n_max}(x)] by the orthonormal recurrence

        gamma_{n+1} psi_{n+1} = (x - beta_n) psi_n - gamma_n psi_{n-1}.
        """
        n_max = self._check_n(n_max)
        x = mpf(x)
        ground = exp(-self.potential.eval_V(x) / 2) / sqrt(self.rc.h[0])
        out = [ground]
        prev, cur = mpf(0), ground
        for m in range(n_max):
            prev, cur = cur, (
                (x - self.rc.beta[m]) * cur - self.rc.gamma[m] * prev
            ) / self.rc.gamma[m + 1]
            out.append(cur)
        return out

    def eval_psi(self, n: int, x):
        return self.psi_all(x, self._check_n(n))[-1]

    psi = eval_psi

    def fd_derivative(self, n: int, x, h=None):
        """Central-difference psi_n'(x); O(h^2) error model."""
        n = self._check_n(n)
        return central_difference(lambda t: self.eval_psi(n, t), x, h)

    def orthonormality_residual(self, n: int, m: int, precision: int = None):
        """|<psi_n, psi_m> - delta_nm| for one pair, on its own rule."""
        gram = orthonormality_gram(self, max(self._check_n(n), self._check_n(m)),
                                   precision=precision)
        key = (min(n, m), max(n, m))
        return abs(gram[key])

    def psi_pair(self, n: int, x):
        """(psi_{n-1}(x), psi_n(x)) for n >= 1, the derivative-system state."""
        n = self._check_n(n)
        if n < 1:
            raise ValueError("pair evaluation starts at n = 1")
        vals = self.psi_all(x, n)
        return vals[n - 1], vals[n]


def central_difference(f, x, h=None):
    """Central difference f'(x) with an exactly-representable step."""
    x = mpf(x)
    if h is None:
        h = mpf(2) ** (-(mp.prec // 3)) * (1 + abs(x))
    h = mpf(h)
    # snap h to the grid so (x+h) - (x-h) is exactly 2h
    xp = x + h
    xm = x - h
    return (f(xp) - f(xm)) / (xp - xm)


def richardson_derivative(f, x, h0, levels: int = 2):
    """Richardson-extrapolated central difference.

    Central differences have an even error expansion, so each level
    multiplies the order by h^2; levels=2 turns O(h^2) into O(h^6).
    Returns (value, last_correction) where last_correction bounds the
    remaining step error.
    """
    levels = int(levels)
    if levels < 0:
        raise ValueError("levels must be >= 0")
    h = mpf(h0)
    table = [central_difference(f, x, h)]
    for i in range(1, levels + 1):
        h = h / 2
        row = [central_difference(f, x, h)]
        for j in range(1, i + 1):
            factor = mpf(4) ** j
            row.append((factor * row[j - 1] - table[j - 1]) / (factor - 1))
        table = row
    correction = abs(table[-1] - table[-2]) if levels >= 1 else mpf("inf")
    return table[-1], correction


def orthonormality_gram(state: WaveState, n_max: int, precision: int = None):
    """Residuals <psi_n, psi_m> - delta_nm for all 0 <= n <= m <= n_max.

    Integrates every pairwise product on one adaptive doubling rule sized
    for the slowest-decaying integrand. The rule is built independently of
    whatever quadrature produced the coefficients, so exact discrete
    orthogonality of a source rule cannot mask a continuum failure.
    Returns a dict {(n, m): residual}.
    """
    from .precision import resolve, working
    from .quadrature import truncation_interval, integrate_vector

    n_max = int(n_max)
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    target = resolve(precision)
    work = target + 60 + 2 * n_max
    pairs = [(n, m) for n in range(n_max + 1) for m in range(n, n_max + 1)]
    with working(work):
        lo, hi, _ = truncation_interval(
            state.potential, 2 * n_max + 2, work + 70
        )

        def integrand(x):
            vals = state.psi_all(x, n_max)
            return [vals[n] * vals[m] for n, m in pairs]

        res = integrate_vector(
            integrand, lo, hi, len(pairs), work,
            tol=mpf(2) ** (-(target + 10)), start_level=5,
        )
        out = {}
        for idx, (n, m) in enumerate(pairs):
            expect = mpf(1) if n == m else mpf(0)
            out[(n, m)] = res.values[idx] - expect
    return out
