"""Exact scalar arithmetic for the expansion engine.

Three layers, each closed under + and *:

* :class:`QI` -- Gaussian rationals a + b*i with ``Fraction`` parts.
* :class:`PiLaurent` -- Laurent polynomials in a formal symbol ``pi``
  with QI coefficients.  ``pi`` is never evaluated except when a float
  shadow is requested explicitly.
* :class:`LambdaRational` -- rational functions of the contour variable
  ``lam`` whose denominator is a product of factors ``(lam - 4*pi*k)``
  with k a nonnegative integer.  The pole locations are stored as a
  multiset {k: multiplicity}; no general polynomial gcd is ever needed
  because only these poles can occur.

Mixed arithmetic promotes upward (QI < PiLaurent < LambdaRational) and
plain ints / Fractions coerce into QI.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

__all__ = [
    "QI",
    "PiLaurent",
    "LambdaRational",
    "PI",
    "INV_PI",
    "ONE",
    "ZERO",
    "LAMBDA_INV",
    "qi",
    "pil",
    "pi_pow",
    "lam_pole_factor",
    "residue_at_origin",
    "scalar_conj",
    "scalar_is_zero",
    "scalar_to_json",
    "as_pilaurent",
]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


class QI:
    """Gaussian rational re + im*i, exact."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    # -- basics -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def conj(self) -> "QI":
        return QI(self.re, -self.im)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QI(other)
        if isinstance(other, QI):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (PiLaurent, LambdaRational)):
            return other == self
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        if self.im == 0:
            return f"{self.re}"
        if self.re == 0:
            return f"{self.im}i"
        return f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}i)"

    # -- ring ops -----------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QI(other)
        if isinstance(other, QI):
            return QI(self.re + other.re, self.im + other.im)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QI(other)
        if isinstance(other, QI):
            return QI(self.re - other.re, self.im - other.im)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QI(other)
        if isinstance(other, QI):
            return QI(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "QI":
        d = self.re * self.re + self.im * self.im
        if d == 0:
            raise ZeroDivisionError("inverse of zero Gaussian rational")
        return QI(self.re / d, -self.im / d)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QI(other)
        if isinstance(other, QI):
            return self * other.inverse()
        return NotImplemented

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)


def qi(re=0, im=0) -> QI:
    """Shorthand constructor for Gaussian rationals."""
    return QI(re, im)


def _as_qi(x) -> QI:
    if isinstance(x, QI):
        return x
    if isinstance(x, (int, Fraction)):
        return QI(x)
    raise TypeError(f"cannot coerce {x!r} to QI")


class PiLaurent:
    """Laurent polynomial in the formal symbol pi over QI.

    Stored sparsely as {exponent: QI}; zero coefficients are never kept.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        cc = {}
        if coeffs:
            for k, v in coeffs.items():
                v = _as_qi(v)
                if not v.is_zero():
                    cc[int(k)] = v
        self.coeffs = cc

    # -- constructors -------------------------------------------------
    @classmethod
    def const(cls, v) -> "PiLaurent":
        return cls({0: _as_qi(v)})

    # -- basics -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monomial(self) -> bool:
        return len(self.coeffs) == 1

    def conj(self) -> "PiLaurent":
        return PiLaurent({k: v.conj() for k, v in self.coeffs.items()})

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QI)):
            other = PiLaurent.const(other)
        if isinstance(other, PiLaurent):
            return self.coeffs == other.coeffs
        if isinstance(other, LambdaRational):
            return other == self
        return NotImplemented

    def __repr__(self):
        if self.is_zero():
            return "0"
        bits = []
        for k in sorted(self.coeffs):
            c = self.coeffs[k]
            if k == 0:
                bits.append(f"{c!r}")
            elif k == 1:
                bits.append(f"{c!r}*pi")
            else:
                bits.append(f"{c!r}*pi^{k}")
        return " + ".join(bits)

    # -- ring ops -----------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, Fraction, QI)):
            other = PiLaurent.const(other)
        if isinstance(other, PiLaurent):
            out = dict(self.coeffs)
            for k, v in other.coeffs.items():
                w = out.get(k)
                if w is None:
                    out[k] = v
                else:
                    w = w + v
                    if w.is_zero():
                        del out[k]
                    else:
                        out[k] = w
            res = PiLaurent.__new__(PiLaurent)
            res.coeffs = out
            return res
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return PiLaurent({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, QI)):
            other = PiLaurent.const(other)
        if isinstance(other, PiLaurent):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QI)):
            c = _as_qi(other)
            if c.is_zero():
                return PiLaurent()
            return PiLaurent({k: v * c for k, v in self.coeffs.items()})
        if isinstance(other, PiLaurent):
            out = {}
            for k1, v1 in self.coeffs.items():
                for k2, v2 in other.coeffs.items():
                    k = k1 + k2
                    p = v1 * v2
                    w = out.get(k)
                    out[k] = p if w is None else w + p
            return PiLaurent(out)
        return NotImplemented

    __rmul__ = __mul__

    def inverse(self) -> "PiLaurent":
        if not self.is_monomial():
            raise ValueError("only monomials q*pi^m are invertible in PiLaurent")
        ((k, v),) = self.coeffs.items()
        return PiLaurent({-k: v.inverse()})

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, QI)):
            return self * _as_qi(other).inverse()
        if isinstance(other, PiLaurent):
            return self * other.inverse()
        return NotImplemented

    def to_complex(self, pi_val: float) -> complex:
        return sum(v.to_complex() * pi_val**k for k, v in self.coeffs.items())


PI = PiLaurent({1: QI(1)})
INV_PI = PiLaurent({-1: QI(1)})
ONE = PiLaurent({0: QI(1)})
ZERO = PiLaurent()


def pil(v, pi_exp: int = 0) -> PiLaurent:
    """Scalar v * pi**pi_exp as a PiLaurent."""
    return PiLaurent({pi_exp: _as_qi(v)})


def pi_pow(k: int) -> PiLaurent:
    return PiLaurent({k: QI(1)})


def as_pilaurent(x) -> PiLaurent:
    if isinstance(x, PiLaurent):
        return x
    if isinstance(x, LambdaRational):
        return x.as_pilaurent()
    return PiLaurent.const(_as_qi(x))


# ---------------------------------------------------------------------------
# lambda-rational layer
# ---------------------------------------------------------------------------


def _poly_norm(num: dict) -> dict:
    return {k: v for k, v in num.items() if not v.is_zero()}


def _poly_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        w = out.get(k)
        w = v if w is None else w + v
        if w.is_zero():
            out.pop(k, None)
        else:
            out[k] = w
    return out


def _poly_mul(a: dict, b: dict) -> dict:
    out = {}
    for k1, v1 in a.items():
        for k2, v2 in b.items():
            k = k1 + k2
            p = v1 * v2
            w = out.get(k)
            out[k] = p if w is None else w + p
    return _poly_norm(out)


def _poly_eval(a: dict, mu: PiLaurent) -> PiLaurent:
    """Evaluate the lambda-polynomial at lambda = mu (a PiLaurent)."""
    if not a:
        return PiLaurent()
    deg = max(a.keys())
    acc = PiLaurent()
    for k in range(deg, -1, -1):
        acc = acc * mu + a.get(k, PiLaurent())
    return acc


def _poly_divide_root(a: dict, mu: PiLaurent) -> dict:
    """Divide by (lambda - mu); caller guarantees mu is a root."""
    deg = max(a.keys())
    out = {}
    carry = PiLaurent()
    for k in range(deg, 0, -1):
        carry = carry * mu + a.get(k, PiLaurent()) if k != deg else a.get(k, PiLaurent())
        if not carry.is_zero():
            out[k - 1] = carry
    return out


def _mu_of(k: int) -> PiLaurent:
    """The pole location 4*pi*k as a PiLaurent."""
    return PiLaurent({1: QI(4 * k)})


class LambdaRational:
    """N(lam) / prod_k (lam - 4*pi*k)^{m_k} with PiLaurent coefficients.

    ``num`` maps lambda-exponents to PiLaurent coefficients; ``poles``
    maps k >= 0 to multiplicities (k = 0 encodes a pole at lam = 0).
    Construction normalizes: common (lam - 4*pi*k) factors are divided
    out so representation is canonical and equality is dict equality.
    """

    __slots__ = ("num", "poles")

    def __init__(self, num=None, poles=None):
        nn = {}
        if num:
            for k, v in num.items():
                v = as_pilaurent(v)
                if not v.is_zero():
                    nn[int(k)] = v
        pp = {int(k): int(m) for k, m in (poles or {}).items() if m}
        for k, m in pp.items():
            if k < 0 or m < 0:
                raise ValueError("poles live on 4*pi*N with positive multiplicity")
        self.num = nn
        self.poles = pp
        self._normalize()

    def _normalize(self):
        if not self.num:
            self.poles = {}
            return
        for k in list(self.poles):
            mu = _mu_of(k)
            while self.poles.get(k, 0) > 0 and _poly_eval(self.num, mu).is_zero():
                self.num = _poly_divide_root(self.num, mu)
                self.poles[k] -= 1
                if not self.num:
                    self.poles = {}
                    return
            if self.poles.get(k) == 0:
                del self.poles[k]

    # -- constructors -------------------------------------------------
    @classmethod
    def const(cls, v) -> "LambdaRational":
        v = as_pilaurent(v)
        return cls({0: v} if not v.is_zero() else {}, {})

    # -- basics -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def is_lambda_free(self) -> bool:
        return not self.poles and set(self.num) <= {0}

    def as_pilaurent(self) -> PiLaurent:
        if not self.is_lambda_free():
            raise ValueError(f"{self!r} still depends on lambda")
        return self.num.get(0, PiLaurent())

    def conj(self) -> "LambdaRational":
        # i -> -i; pi and lam are fixed (lam is treated as a real
        # contour parameter, legitimate because every identity we use
        # is rational in lam and checked on the real axis).
        out = LambdaRational.__new__(LambdaRational)
        out.num = {k: v.conj() for k, v in self.num.items()}
        out.poles = dict(self.poles)
        return out

    def __eq__(self, other):
        other = _as_lambda(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.poles == other.poles

    def __repr__(self):
        if self.is_zero():
            return "0"
        nbits = " + ".join(
            f"({v!r})*lam^{k}" if k else f"({v!r})" for k, v in sorted(self.num.items())
        )
        if not self.poles:
            return nbits
        dbits = "*".join(
            ("lam" if k == 0 else f"(lam-4pi*{k})") + (f"^{m}" if m > 1 else "")
            for k, m in sorted(self.poles.items())
        )
        return f"[{nbits}] / [{dbits}]"

    # -- ring ops -----------------------------------------------------
    def __add__(self, other):
        other = _as_lambda(other)
        if other is NotImplemented:
            return NotImplemented
        # common denominator: max multiplicity per pole
        poles = dict(self.poles)
        for k, m in other.poles.items():
            poles[k] = max(poles.get(k, 0), m)
        a = self.num
        for k, m in poles.items():
            need = m - self.poles.get(k, 0)
            for _ in range(need):
                a = _poly_mul(a, {1: ONE, 0: -_mu_of(k)})
        b = other.num
        for k, m in poles.items():
            need = m - other.poles.get(k, 0)
            for _ in range(need):
                b = _poly_mul(b, {1: ONE, 0: -_mu_of(k)})
        return LambdaRational(_poly_add(a, b), poles)

    __radd__ = __add__

    def __neg__(self):
        out = LambdaRational.__new__(LambdaRational)
        out.num = {k: -v for k, v in self.num.items()}
        out.poles = dict(self.poles)
        return out

    def __sub__(self, other):
        other = _as_lambda(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_lambda(other)
        if other is NotImplemented:
            return NotImplemented
        poles = dict(self.poles)
        for k, m in other.poles.items():
            poles[k] = poles.get(k, 0) + m
        return LambdaRational(_poly_mul(self.num, other.num), poles)

    __rmul__ = __mul__

    def eval_numeric(self, lam: complex, pi_val: float) -> complex:
        n = sum(v.to_complex(pi_val) * lam**k for k, v in self.num.items())
        d = 1.0 + 0.0j
        for k, m in self.poles.items():
            d *= (lam - 4.0 * pi_val * k) ** m
        return n / d


def _as_lambda(x):
    if isinstance(x, LambdaRational):
        return x
    if isinstance(x, (int, Fraction, QI, PiLaurent)):
        return LambdaRational.const(x)
    return NotImplemented


#: 1/lam, the P^N channel factor.
LAMBDA_INV = LambdaRational({0: ONE}, {0: 1})


def lam_pole_factor(k: int) -> LambdaRational:
    """The N-perp resolvent factor 1/(lam - 4*pi*k), k >= 1."""
    if k < 1:
        raise ValueError("N-perp factors need k >= 1")
    return LambdaRational({0: ONE}, {k: 1})


def residue_at_origin(f: LambdaRational) -> PiLaurent:
    """Coefficient of lam^{-1} in the Laurent expansion of f at 0.

    Equals (2*pi*i)^{-1} times the contour integral of f over the unit
    circle, because every other pole sits at 4*pi*k with k >= 1, far
    outside.
    """
    f = _as_lambda(f)
    m0 = f.poles.get(0, 0)
    if m0 == 0:
        return PiLaurent()
    order = m0 - 1
    # Taylor coefficients (up to lam^order) of num / prod_{k>=1}(lam-mu_k)^m
    series = [f.num.get(t, PiLaurent()) for t in range(order + 1)]
    for k, m in f.poles.items():
        if k == 0:
            continue
        mu = _mu_of(k)
        sign = QI(-1 if m % 2 else 1)
        inv = mu.inverse()
        base = inv
        for _ in range(m - 1):
            base = base * inv
        # (lam-mu)^{-m} = sign*mu^{-m} * sum_t C(m-1+t,t) (lam/mu)^t
        fac = [pil(comb(m - 1 + t, t)) * base * sign for t in range(order + 1)]
        invp = ONE
        for t in range(order + 1):
            fac[t] = fac[t] * invp
            invp = invp * inv
        series = [
            sum((series[s] * fac[t - s] for s in range(t + 1)), PiLaurent())
            for t in range(order + 1)
        ]
    return series[order]


# ---------------------------------------------------------------------------
# generic helpers usable on any scalar layer
# ---------------------------------------------------------------------------


def scalar_conj(x):
    if isinstance(x, (int, Fraction)):
        return x
    return x.conj()


def scalar_is_zero(x) -> bool:
    if isinstance(x, (int, Fraction)):
        return x == 0
    return x.is_zero()


def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else f"{f.numerator}"


def scalar_to_json(x):
    """Stable JSON form: QI as [re, im] strings, pi powers explicit."""
    if isinstance(x, (int, Fraction)):
        x = QI(x)
    if isinstance(x, QI):
        return [_frac_str(x.re), _frac_str(x.im)]
    if isinstance(x, PiLaurent):
        return {"pi": {str(k): scalar_to_json(v) for k, v in sorted(x.coeffs.items())}}
    if isinstance(x, LambdaRational):
        return {
            "numerator": {str(k): scalar_to_json(v) for k, v in sorted(x.num.items())},
            "poles": {str(k): m for k, m in sorted(x.poles.items())},
        }
    raise TypeError(f"not a scalar: {x!r}")
