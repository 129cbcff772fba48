"""Moments of exp(-V) and recurrence coefficients by two independent routes.

Route one: raw power moments by tanh-sinh quadrature, then a Cholesky
factorization of the Hankel matrix. The Hankel map amplifies moment error
by its condition number (empirically ~2^(5n) for the weights handled here),
so this route escalates internal precision until two consecutive passes
agree; the settled result carries close to the full requested precision.

Route two: a discrete Stieltjes orthogonalization against a tanh-sinh
discretization of the measure, doubling the node count until the
coefficients stabilize. Numerically far better conditioned, and
algorithmically unrelated to the Hankel pivots.

The two routes are cross-validated and only exported together; see
`certified_recurrence`.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import fdot, ln, mp, mpf, sqrt

from .errors import BreakdownAtStep, HankelSingular, PrecisionUnreachable
from .potential import Potential
from .precision import resolve, working
from .quadrature import integrate_vector, rule_nodes, truncation_interval


@dataclass(frozen=True)
class MomentTable:
    """Moments m_j = integral x^j exp(-V(x)) dx for j = 0..J.

    `abs_scales[j]` is the integral of |x|^j exp(-V), the natural magnitude
    against which `error_estimates[j]` should be read (odd moments of an
    even weight cancel to ~0, so plain relative error would be meaningless).
    Positivity of the Hankel forms is checked where it is consumed, during
    factorization.
    """

    potential: Potential
    values: tuple
    abs_scales: tuple
    error_estimates: tuple
    precision: int
    work_bits: int
    interval: tuple
    level: int

    @property
    def J(self) -> int:
        return len(self.values) - 1

    def accuracy_bits(self) -> int:
        """Conservative bits of accuracy relative to per-moment scales."""
        worst = mpf(0)
        for err, scale in zip(self.error_estimates, self.abs_scales):
            if scale == 0:
                continue
            worst = max(worst, err / scale)
        if worst == 0:
            return self.work_bits
        return min(self.work_bits, int(-ln(worst) / ln(2)))


def compute_moments(p: Potential, J: int, precision=None) -> MomentTable:
    """Moments m_0..m_J of exp(-V) by tanh-sinh quadrature.

    Delivered relative error (against the |x|^j scale) is at most
    10^-(0.3*precision - g) with guard margin g = 6 digits; in practice the
    internal tolerance of 2^-(precision+30) leaves it far smaller. Raises
    PrecisionUnreachable if node doubling stops converging first.
    """
    p.require_confining()
    J = int(J)
    if J < 0:
        raise ValueError("J must be >= 0")
    target = resolve(precision)
    work = target + 60
    lo, hi, log_edge = truncation_interval(p, J, target + 70)
    with working(work):

        def monomials(x):
            weight = mp.exp(-p.eval_V(x))
            out = [weight]
            acc = weight
            for _ in range(J):
                acc = acc * x
                out.append(acc)
            return out

        result = integrate_vector(
            monomials,
            lo,
            hi,
            J + 1,
            work,
            mpf(2) ** (-(target + 30)),
        )
        tail = mp.exp(mpf(log_edge)) * (mpf(hi) - mpf(lo))
        errors = tuple(e + tail for e in result.error_estimates)
        m0 = result.values[0]
        if not m0 > 0:
            raise ValueError("zeroth moment is not positive; weight not normalizable")
    return MomentTable(
        potential=p,
        values=tuple(result.values),
        abs_scales=tuple(result.abs_sums),
        error_estimates=errors,
        precision=target,
        work_bits=work,
        interval=(lo, hi),
        level=result.level,
    )


@dataclass(frozen=True)
class RecurrenceCoefficients:
    """Three-term recurrence data for monic p_n and orthonormal psi_n.

    gamma[n] holds gamma_n for n = 0..N with the gamma_0 := 0 convention;
    beta[n] holds beta_n for n = 0..N-1; h[n] holds the squared monic norms
    for n = 0..N. Invariants: gamma_n > 0 and h_n > 0 for n >= 1, and
    gamma_n^2 = h_n / h_{n-1} up to working roundoff.
    """

    gamma: tuple
    beta: tuple
    h: tuple
    precision: int
    source: str = "unspecified"

    def __post_init__(self):
        if len(self.gamma) != len(self.h) or len(self.beta) != len(self.gamma) - 1:
            raise ValueError("inconsistent coefficient lengths")
        if self.gamma[0] != 0:
            raise ValueError("gamma_0 must be 0 by convention")

    @property
    def N(self) -> int:
        return len(self.beta)

    def gamma_n(self, n: int):
        return self.gamma[n]

    def beta_n(self, n: int):
        return self.beta[n]

    def h_n(self, n: int):
        return self.h[n]

    def gamma_sq(self, n: int):
        g = self.gamma[n]
        return g * g

    def validate(self, tol_bits=None):
        """Check positivity and the gamma/h consistency invariant."""
        tol = mpf(2) ** (-(tol_bits if tol_bits is not None else self.precision // 2))
        for n in range(1, len(self.gamma)):
            if not self.gamma[n] > 0:
                raise ValueError(f"gamma_{n} not positive")
        for n, hn in enumerate(self.h):
            if not hn > 0:
                raise ValueError(f"h_{n} not positive")
        for n in range(1, len(self.gamma)):
            lhs = self.gamma_sq(n)
            rhs = self.h[n] / self.h[n - 1]
            if abs(lhs - rhs) > tol * max(lhs, rhs):
                raise ValueError(f"gamma_{n}^2 != h_{n}/h_{n-1} beyond tolerance")
        return self

    def with_gamma_fault(self, n: int, delta) -> "RecurrenceCoefficients":
        """Copy with gamma_n shifted by delta. For sensitivity testing only:
        deliberately skips validation, so the returned object is inconsistent."""
        g = list(self.gamma)
        g[n] = g[n] + mpf(delta)
        return RecurrenceCoefficients(
            gamma=tuple(g),
            beta=self.beta,
            h=self.h,
            precision=self.precision,
            source=self.source + f"+fault(gamma_{n})",
        )


def recurrence_from_moments(mt: MomentTable, N: int) -> RecurrenceCoefficients:
    """Hankel-Cholesky route: moments m_0..m_2N to recurrence coefficients.

    Works on the (N+1)x(N+1) Hankel matrix H[i][j] = m_{i+j}. With
    H = L L^T, the lower factor collects the mixed monomial/orthonormal
    inner products, and

        gamma_n = L[n][n] / L[n-1][n-1]
        beta_n  = L[n+1][n] / L[n][n] - L[n][n-1] / L[n-1][n-1]
        h_n     = L[n][n]^2

    A pivot that is not positive, or that falls below the moment noise
    floor, raises HankelSingular with the failing order.
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    if mt.J < 2 * N:
        raise ValueError(f"need moments up to 2N={2 * N}, table has J={mt.J}")
    acc_bits = mt.accuracy_bits()
    with working(mt.work_bits + 64):
        m = [mpf(v) for v in mt.values]
        rows = N + 1
        L = [[mpf(0)] * rows for _ in range(rows)]
        noise = mpf(2) ** (-(acc_bits - 10))
        for i in range(rows):
            for j in range(i + 1):
                s = m[i + j] - fdot(L[i][:j], L[j][:j])
                if i == j:
                    floor = noise * m[2 * i]
                    if not s > 0 or s < floor:
                        raise HankelSingular(i, pivot=s)
                    L[i][i] = sqrt(s)
                else:
                    L[i][j] = s / L[j][j]
        gamma = [mpf(0)] + [L[n][n] / L[n - 1][n - 1] for n in range(1, N + 1)]
        beta = []
        for n in range(N):
            b = L[n + 1][n] / L[n][n]
            if n > 0:
                b -= L[n][n - 1] / L[n - 1][n - 1]
            beta.append(b)
        h = [L[n][n] ** 2 for n in range(N + 1)]
    return RecurrenceCoefficients(
        gamma=tuple(gamma),
        beta=tuple(beta),
        h=tuple(h),
        precision=mt.precision,
        source="moments",
    ).validate()


def moment_roundtrip_residual(rc: RecurrenceCoefficients, mt: MomentTable):
    """Max scaled residual of m_j = h_0 (Q^j)_{0,0} for j < N.

    The recurrence-to-moment direction is well conditioned, so this is a
    cheap independent consistency gauge on a coefficient set.
    """
    with working(mt.work_bits):
        worst = mpf(0)
        limit = min(rc.N - 1, mt.J)
        v = {0: mpf(1)}
        for j in range(1, limit + 1):
            new = {}
            for i, val in v.items():
                new[i] = new.get(i, mpf(0)) + rc.beta[i] * val
                if i + 1 <= limit:
                    new[i + 1] = new.get(i + 1, mpf(0)) + rc.gamma[i + 1] * val
                if i >= 1:
                    new[i - 1] = new.get(i - 1, mpf(0)) + rc.gamma[i] * val
            v = new
            predicted = rc.h[0] * v.get(0, mpf(0))
            scale = mt.abs_scales[j]
            if scale > 0:
                worst = max(worst, abs(predicted - mt.values[j]) / scale)
        return worst


def recurrence_stieltjes(
    p: Potential, N: int, nodes: int = 0, precision=None
) -> RecurrenceCoefficients:
    """Discrete Stieltjes route: orthogonalize monic polynomials against a
    tanh-sinh discretization of exp(-V) dx.

    `nodes` is a floor on the discrete measure size; levels keep doubling
    beyond it until gamma and beta stabilize to 2^-(precision+10) relative,
    with the stabilized pass returned. Loss of positivity in a discrete
    norm raises BreakdownAtStep.
    """
    p.require_confining()
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    target = resolve(precision)
    work = target + 96 + 2 * N
    lo, hi, _ = truncation_interval(p, 2 * N + 1, work + 40)
    agree = mpf(2) ** (-(target + 10))
    drift = mpf("inf")
    with working(work):
        level = 5
        while nodes and _rule_size(level, work + 30) < nodes and level < 13:
            level += 1
        prev = None
        while level <= 13:
            current = _stieltjes_pass(p, lo, hi, level, N, work, target)
            if prev is not None:
                drift = cross_validate(prev, current)
                if drift <= agree:
                    return current.validate()
            prev = current
            level += 1
        raise PrecisionUnreachable(agree, drift, "stieltjes level doubling")


def _rule_size(level, cut_bits):
    from .quadrature import _node_parameters

    t_max = _node_parameters(cut_bits)
    j_max = int(t_max * (1 << level)) + 1
    return 2 * j_max + 1


def _stieltjes_pass(p, lo, hi, level, N, work, target):
    xs = []
    ws = []
    for x, w in rule_nodes(lo, hi, level, work + 30):
        xs.append(x)
        ws.append(w * mp.exp(-p.eval_V(x)))
    wx = [w * x for w, x in zip(ws, xs)]
    pi_prev = None
    pi_cur = [mpf(1)] * len(xs)
    gamma = [mpf(0)]
    beta = []
    h = []
    s_prev = None
    for n in range(N + 1):
        sq = [v * v for v in pi_cur]
        s = fdot(ws, sq)
        if not s > 0:
            raise BreakdownAtStep(n, s)
        if n >= 1:
            gamma.append(sqrt(s / s_prev))
        h.append(s)
        if n == N:
            break
        b = fdot(wx, sq) / s
        beta.append(b)
        gsq = s / s_prev if n >= 1 else None
        nxt = []
        if pi_prev is None:
            for x, cur in zip(xs, pi_cur):
                nxt.append((x - b) * cur)
        else:
            for x, cur, old in zip(xs, pi_cur, pi_prev):
                nxt.append((x - b) * cur - gsq * old)
        pi_prev, pi_cur = pi_cur, nxt
        s_prev = s
    return RecurrenceCoefficients(
        gamma=tuple(gamma),
        beta=tuple(beta),
        h=tuple(h),
        precision=target,
        source="stieltjes",
    )


def cross_validate(a: RecurrenceCoefficients, b: RecurrenceCoefficients):
    """Max relative discrepancy of gamma_n and beta_n over the shared range.

    The denominator max(|x|, |y|, 1) keeps the measure meaningful for
    beta values that are legitimately ~0.
    """
    worst = mpf(0)
    for n in range(1, min(len(a.gamma), len(b.gamma))):
        worst = max(worst, _rel(a.gamma[n], b.gamma[n]))
    for n in range(min(len(a.beta), len(b.beta))):
        worst = max(worst, _rel(a.beta[n], b.beta[n]))
    return worst


def discrepancy_profile(a: RecurrenceCoefficients, b: RecurrenceCoefficients):
    """Per-n discrepancies (n, gamma_diff, beta_diff) over the shared range."""
    out = []
    for n in range(min(len(a.beta), len(b.beta))):
        gdiff = _rel(a.gamma[n], b.gamma[n]) if n >= 1 else mpf(0)
        out.append((n, gdiff, _rel(a.beta[n], b.beta[n])))
    return out


def _rel(x, y):
    return abs(x - y) / max(abs(x), abs(y), mpf(1))


@dataclass(frozen=True)
class CertifiedRecurrence:
    """Cross-validated coefficients plus the certification evidence."""

    rc: RecurrenceCoefficients
    stieltjes: RecurrenceCoefficients
    cross_discrepancy: object
    moment_boost: int
    escalations: int

    @property
    def N(self) -> int:
        return self.rc.N


def moment_route(p: Potential, N: int, precision=None, boost_bits: int = 0):
    """Single moment-backend pass at precision + boost_bits internal bits."""
    target = resolve(precision)
    mt = compute_moments(p, 2 * N, target + int(boost_bits))
    rc = recurrence_from_moments(mt, N)
    return RecurrenceCoefficients(
        gamma=rc.gamma,
        beta=rc.beta,
        h=rc.h,
        precision=target,
        source="moments",
    )


def certified_recurrence(
    p: Potential, N: int, precision=None, stieltjes_nodes: int = 0
) -> CertifiedRecurrence:
    """Both backends, escalated and cross-validated; export only on agreement.

    The moment route restarts at increasing internal precision until two
    consecutive passes agree to 2^-(precision-10) relative, which certifies
    the Hankel amplification has been absorbed. The Stieltjes route
    stabilizes its own discretization. The two must then agree to
    2^-(precision-16); otherwise PrecisionUnreachable.
    """
    p.require_confining()
    target = resolve(precision)
    N = int(N)
    agree = mpf(2) ** (-(target - 10))
    cap = 4 * target + 1024
    boost = max(96, 6 * N)
    prev = None
    escalations = 0
    last_error = None
    drift = mpf("inf")
    while target + boost <= cap:
        try:
            rc = moment_route(p, N, precision=target, boost_bits=boost)
        except HankelSingular as exc:
            last_error = exc
            rc = None
        if rc is not None and prev is not None:
            drift = cross_validate(prev, rc)
            if drift <= agree:
                break
        prev = rc
        boost += 128
        escalations += 1
    else:
        if last_error is not None:
            raise last_error
        raise PrecisionUnreachable(agree, drift, "moment-route escalation")

    st = recurrence_stieltjes(p, N, nodes=stieltjes_nodes, precision=target)
    cross = cross_validate(rc, st)
    if cross > mpf(2) ** (-(target - 16)):
        raise PrecisionUnreachable(
            mpf(2) ** (-(target - 16)), cross, "backend cross-validation"
        )
    return CertifiedRecurrence(
        rc=rc,
        stieltjes=st,
        cross_discrepancy=cross,
        moment_boost=boost,
        escalations=escalations,
    )
