"""Double-exponential (tanh-sinh) quadrature on potential-adapted intervals.

The integrands here are entire functions times exp(-V(x)), so a finite
interval chosen from the potential's growth plus a tanh-sinh rule converges
superexponentially. Node counts double per level until the internal
estimate stabilizes; the final change between levels is the reported error
estimate.

The rule assumes the integrand has decayed below the target at the interval
endpoints; `truncation_interval` guarantees that for |x|^J exp(-V(x)).
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import asinh, cosh, exp, ln, mp, mpf, pi, sinh, tanh

from .errors import PrecisionUnreachable
from .precision import working

_RADIUS_PREC = 80


def truncation_interval(p, J: int, drop_bits: int):
    """Interval [lo, hi] outside which |x|^J exp(-V(x)) is negligible.

    Negligible means `drop_bits` bits below the hump maximum of the same
    function, per side. Returns (lo, hi, log_edge) where log_edge bounds
    ln of the integrand value at both endpoints.

    The search only steers efficiency and tail safety, so it runs at a
    fixed small precision.
    """
    p.require_confining()
    J = int(J)
    with working(_RADIUS_PREC):
        drop = mpf(drop_bits) * ln(2)
        edges = []
        log_edges = []
        for sign in (1, -1):

            def logf(t):
                return (J * ln(t) if J else mpf(0)) - p.eval_V(sign * t)

            def outward_slope_negative(t):
                return t * sign * p.eval_Vprime(sign * t) > J

            t = mpf("0.125")
            gmax = logf(t)
            while True:
                t *= 2
                g = logf(t)
                gmax = max(gmax, g, logf(t * mpf("0.75")))
                if outward_slope_negative(t) and g < gmax - drop:
                    break
                if t > mpf("1e40"):  # pragma: no cover - confining V cannot get here
                    raise PrecisionUnreachable(
                        -drop, g - gmax, "truncation radius search diverged"
                    )
            edges.append(sign * t)
            log_edges.append(g)
        hi, lo = edges
        return lo, hi, max(log_edges)


@dataclass
class IntegrationResult:
    values: list
    abs_sums: list
    error_estimates: list
    level: int


def _node_parameters(cut_bits):
    """t range where tanh-sinh weights stay above 2^-cut_bits."""
    return asinh(cut_bits * ln(2) / pi)


def rule_nodes(lo, hi, level: int, cut_bits: int):
    """Full tanh-sinh rule at `level` mapped to [lo, hi], as (x, w) pairs.

    Node j sits at t = j / 2^level; the weight function is
    (pi/2) cosh t / cosh^2((pi/2) sinh t), scaled by the step and the
    affine map onto [lo, hi].
    """
    lo = mpf(lo)
    hi = mpf(hi)
    radius = (hi - lo) / 2
    center = (hi + lo) / 2
    h = mpf(1) / (1 << level)
    t_max = _node_parameters(cut_bits)
    j_max = int(t_max / h) + 1
    half_pi = pi / 2
    out = []
    for j in range(-j_max, j_max + 1):
        t = j * h
        q = half_pi * sinh(t)
        s = tanh(q)
        w = h * radius * half_pi * cosh(t) / cosh(q) ** 2
        out.append((center + radius * s, w))
    return out


def integrate_vector(
    f,
    lo,
    hi,
    dim: int,
    work_bits: int,
    tol,
    start_level: int = 4,
    max_level: int = 13,
) -> IntegrationResult:
    """Integrate a vector-valued integrand over [lo, hi] to tolerance.

    f(x) must return `dim` mpf values. Levels double the node count and
    reuse all previous evaluations; convergence requires the change in every
    component to fall below tol times that component's absolute-value
    integral (a natural per-component scale that stays meaningful for
    components that cancel to ~0, like odd moments of an even weight).
    """
    tol = mpf(tol)
    with working(work_bits):
        lo = mpf(lo)
        hi = mpf(hi)
        radius = (hi - lo) / 2
        center = (hi + lo) / 2
        cut_bits = work_bits + 30
        t_max = _node_parameters(cut_bits)
        half_pi = pi / 2

        def accumulate(h, js, values, absolutes):
            for j in js:
                t = j * h
                q = half_pi * sinh(t)
                x = center + radius * tanh(q)
                w = half_pi * cosh(t) / cosh(q) ** 2
                fx = f(x)
                for i in range(dim):
                    term = w * fx[i]
                    values[i] += term
                    absolutes[i] += abs(term)

        h = mpf(1) / (1 << start_level)
        j_max = int(t_max / h) + 1
        values = [mpf(0)] * dim
        absolutes = [mpf(0)] * dim
        accumulate(h, range(-j_max, j_max + 1), values, absolutes)
        scale = h * radius
        prev = [v * scale for v in values]

        if max_level <= start_level:
            raise ValueError("max_level must exceed start_level")
        level = start_level
        while level < max_level:
            level += 1
            h = h / 2
            j_max = int(t_max / h) + 1
            first_odd = -j_max if j_max % 2 else -(j_max - 1)
            accumulate(h, range(first_odd, j_max + 1, 2), values, absolutes)
            scale = h * radius
            current = [v * scale for v in values]
            abs_now = [a * scale for a in absolutes]
            deltas = [abs(c - q) for c, q in zip(current, prev)]
            if all(
                d <= tol * a or a == 0 for d, a in zip(deltas, abs_now)
            ):
                return IntegrationResult(current, abs_now, deltas, level)
            prev = current

        worst = max(
            (d / a for d, a in zip(deltas, abs_now) if a != 0), default=mpf(0)
        )
        raise PrecisionUnreachable(tol, worst, "tanh-sinh levels exhausted")
