"""Polynomial confinement potentials V(x) = sum_k (u_k / k) x^k.

The coefficient u_k multiplies x^k/k, so dV/du_k = x^k/k and
V'(x) = sum_k u_k x^(k-1). The weight exp(-V(x)) is normalizable on the
real line when the top nonzero coefficient sits at an even k and is
positive; that is the only family this package claims to handle.

u_0 is a documented no-op: it multiplies the weight by a constant that
cancels out of every exported quantity, so the parser drops it.
"""

from __future__ import annotations

import json

from mpmath import fadd, isfinite, mp, mpf

from .errors import PerturbationBreaksConvergence
from .precision import resolve, to_str, working


class Potential:
    """Immutable sparse coefficient map {k: u_k} with k >= 1.

    Coefficients are parsed once, at `precision` bits, and treated as exact
    binary numbers from then on; every identity downstream holds for the
    parsed values, not for the decimal literals they came from.
    """

    __slots__ = ("_u", "_precision")

    def __init__(self, coefficients, precision=None):
        bits = resolve(precision)
        u = {}
        with working(bits):
            for k, value in dict(coefficients).items():
                k = int(k)
                if k < 0:
                    raise ValueError(f"coefficient index must be >= 0, got {k}")
                if k == 0:
                    continue  # constant shift of V, cancels everywhere
                v = mpf(value) if not isinstance(value, str) else mpf(value.strip())
                if not isfinite(v):
                    raise ValueError(f"coefficient u_{k} is not finite")
                if v != 0:
                    u[k] = v
        self._u = dict(sorted(u.items()))
        self._precision = bits

    # -- basic queries -------------------------------------------------

    @property
    def u(self) -> dict:
        return dict(self._u)

    @property
    def precision(self) -> int:
        return self._precision

    @property
    def degree(self) -> int:
        """Degree of V; 0 for the empty potential."""
        return max(self._u) if self._u else 0

    @property
    def vprime_degree(self) -> int:
        """d = deg V', the bandwidth scale of everything downstream."""
        return max(self.degree - 1, 0)

    def coefficient(self, k: int):
        return self._u.get(int(k), mpf(0))

    def is_confining(self) -> bool:
        """True when exp(-V) is normalizable: even top degree, positive leading."""
        if not self._u:
            return False
        top = max(self._u)
        return top % 2 == 0 and self._u[top] > 0

    def is_even(self) -> bool:
        """True when V(-x) = V(x); forces beta_n = 0 for every n."""
        return all(k % 2 == 0 for k in self._u)

    def require_confining(self):
        if not self.is_confining():
            raise ValueError(
                "potential is not confining: need even top degree with a "
                f"positive leading coefficient, got {self.to_text() or 'V=0'}"
            )
        return self

    # -- evaluation ----------------------------------------------------

    def eval_V(self, x):
        """V(x) = sum (u_k / k) x^k at ambient working precision."""
        x = mpf(x)
        acc = mpf(0)
        # Horner over the dense range; the map is sparse but degrees are tiny.
        for k in range(self.degree, 0, -1):
            acc = acc * x
            uk = self._u.get(k)
            if uk is not None:
                acc += uk / k
        return acc * x if self._u else mpf(0)

    def eval_Vprime(self, x):
        """V'(x) = sum u_k x^(k-1)."""
        x = mpf(x)
        c = self.vprime_coeffs()
        acc = mpf(0)
        for coeff in reversed(c):
            acc = acc * x + coeff
        return acc

    def vprime_coeffs(self) -> tuple:
        """Ascending coefficients of V': entry j is u_{j+1}. Length deg V' + 1."""
        if not self._u:
            return (mpf(0),)
        d = self.degree - 1
        return tuple(self._u.get(j + 1, mpf(0)) for j in range(d + 1))

    # -- deformation ---------------------------------------------------

    def perturb(self, k: int, delta) -> "Potential":
        """Return the potential with u_k shifted by delta, exactly.

        The sum is carried out without rounding so that
        perturb(k, delta) followed by perturb(k, -delta) round-trips to the
        original coefficients bit for bit.
        """
        k = int(k)
        if k < 1:
            raise ValueError(f"deformation index must be >= 1, got {k}")
        with working(self._precision):
            delta = mpf(delta) if not isinstance(delta, str) else mpf(delta.strip())
        new_u = dict(self._u)
        shifted = fadd(new_u.get(k, mpf(0)), delta, exact=True)
        if shifted == 0:
            new_u.pop(k, None)
        else:
            new_u[k] = shifted
        out = object.__new__(Potential)
        out._u = dict(sorted(new_u.items()))
        out._precision = self._precision
        if not out.is_confining():
            raise PerturbationBreaksConvergence(
                k, delta, "top degree must stay even with positive coefficient"
            )
        return out

    # -- serialization -------------------------------------------------

    def to_text(self) -> str:
        """Canonical 'k=value' pairs, ascending k, full-precision decimals."""
        return ",".join(
            f"{k}={to_str(v, self._precision)}" for k, v in self._u.items()
        )

    def to_json_obj(self) -> dict:
        return {
            "u": {str(k): to_str(v, self._precision) for k, v in self._u.items()},
            "precision": self._precision,
        }

    @classmethod
    def from_text(cls, text: str, precision=None) -> "Potential":
        """Parse '2=1.0,4=0.25' or a JSON object with a 'u' field."""
        text = text.strip()
        if not text:
            return cls({}, precision=precision)
        if text.startswith("{"):
            obj = json.loads(text)
            u = obj.get("u", obj)
            return cls(u, precision=precision)
        pairs = {}
        for item in text.split(","):
            if not item.strip():
                continue
            try:
                key, _, value = item.partition("=")
                k = int(key.strip())
            except ValueError as exc:
                raise ValueError(f"bad potential term {item!r}") from exc
            if not value.strip():
                raise ValueError(f"bad potential term {item!r}")
            if k in pairs:
                raise ValueError(f"duplicate coefficient index {k}")
            pairs[k] = value.strip()
        return cls(pairs, precision=precision)

    # -- dunder --------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Potential):
            return NotImplemented
        return self._u == other._u

    def __hash__(self):
        return hash(tuple(self._u.items()))

    def __repr__(self):
        body = self.to_text() or "0"
        return f"Potential({body})"


def hermite_potential(u2="2", precision=None) -> Potential:
    """Gaussian weight exp(-(u2/2) x^2); the default u2=2 gives exp(-x^2)."""
    return Potential({2: u2}, precision=precision)


def quartic_potential(u4="1", precision=None) -> Potential:
    """Pure quartic weight exp(-(u4/4) x^4)."""
    return Potential({4: u4}, precision=precision)
