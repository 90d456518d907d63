"""Exact coefficient fields with canonical element representations.

Every element is stored in a canonical form so that equality of elements is
literal equality of the underlying data:

* ``Rationals`` — `fractions.Fraction`;
* ``PrimeField(p)`` — ints in ``range(p)``;
* ``ExtensionField(base, a, minpoly)`` — dense coefficient tuples in the
  power basis ``1, a, ..., a^(d-1)``, reduced modulo the monic minimal
  polynomial;
* ``FunctionField(p, s)`` — rational functions over F_p, stored as a reduced
  fraction of dense coefficient tuples with monic denominator.  These exist
  solely to realize imperfect-field phenomena; they cannot be extended.

Minimal polynomials are checked for irreducibility: over the rationals via
sympy, over finite fields by exhaustive search for a monic factor.  Degrees
above 8 are rejected — the whole library is sized for exact desk-scale work.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterator, Optional, Union

from . import expr

MAX_MINPOLY_DEGREE = 8


class FieldError(ValueError):
    pass


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class FieldElem:
    """An element of one of the fields below; thin wrapper over (field, rep)."""

    __slots__ = ("field", "rep")

    def __init__(self, field: "Field", rep):
        self.field = field
        self.rep = rep

    def _coerce(self, other):
        if isinstance(other, FieldElem):
            if other.field != self.field:
                raise FieldError(
                    f"elements of different fields: {self.field} vs {other.field}"
                )
            return other
        if isinstance(other, int):
            return self.field.from_int(other)
        if isinstance(other, Fraction) and isinstance(self.field, Rationals):
            return FieldElem(self.field, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return FieldElem(self.field, self.field._add(self.rep, other.rep))

    __radd__ = __add__

    def __neg__(self):
        return FieldElem(self.field, self.field._neg(self.rep))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return FieldElem(self.field, self.field._mul(self.rep, other.rep))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return FieldElem(self.field, self.field._inv(self.rep))

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def is_zero(self) -> bool:
        return self.field._is_zero(self.rep)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            coerced = self._coerce(other)
            if coerced is None:
                return NotImplemented
            other = coerced
        if not isinstance(other, FieldElem):
            return NotImplemented
        return self.field == other.field and self.rep == other.rep

    def __hash__(self):
        return hash((self.field, self._hashable_rep()))

    def _hashable_rep(self):
        rep = self.rep
        if isinstance(rep, tuple) and rep and isinstance(rep[0], FieldElem):
            return tuple(c._hashable_rep() for c in rep)
        return rep

    def key(self):
        """Deterministic sort key (ints/Fractions only, recursively)."""
        return self.field._key(self.rep)

    def __str__(self):
        return self.field._fmt(self.rep)

    def __repr__(self):
        return f"<{self.field._fmt(self.rep)} in {self.field}>"


class Field:
    """Common interface: canonical arithmetic on raw representations."""

    char: int = 0

    @property
    def zero(self) -> FieldElem:
        return self.from_int(0)

    @property
    def one(self) -> FieldElem:
        return self.from_int(1)

    def from_int(self, n: int) -> FieldElem:
        raise NotImplementedError

    def is_finite(self) -> bool:
        return False

    def size(self) -> int:
        raise FieldError(f"{self} is not finite")

    def elements(self) -> Iterator[FieldElem]:
        raise FieldError(f"{self} is not finite; cannot enumerate")

    def generator_env(self) -> dict:
        """Named scalars (extension generators etc.) usable in expressions."""
        return {}

    def embed_base(self, c: FieldElem) -> FieldElem:
        # coefficient-domain protocol shared with polynomial domains
        if not isinstance(c, FieldElem) or c.field != self:
            raise FieldError(f"scalar of {getattr(c, 'field', type(c))} used over {self}")
        return c

    def parse(self, text: str) -> FieldElem:
        value = expr.eval_str(text, self.generator_env(), self.from_int)
        if not isinstance(value, FieldElem) or value.field != self:
            raise FieldError(f"not a scalar of {self}: {text!r}")
        return value


class Rationals(Field):
    char = 0

    def from_int(self, n):
        return FieldElem(self, Fraction(n))

    def _add(self, a, b):
        return a + b

    def _neg(self, a):
        return -a

    def _mul(self, a, b):
        return a * b

    def _inv(self, a):
        return 1 / a

    def _is_zero(self, a):
        return a == 0

    def _key(self, a):
        return a

    def _fmt(self, a):
        return str(a)

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("Q")

    def __repr__(self):
        return "Q"


class PrimeField(Field):
    def __init__(self, p: int):
        if not _is_prime(p):
            raise FieldError(f"{p} is not prime")
        self.char = p
        self.p = p

    def from_int(self, n):
        return FieldElem(self, n % self.p)

    def is_finite(self):
        return True

    def size(self):
        return self.p

    def elements(self):
        for n in range(self.p):
            yield FieldElem(self, n)

    def _add(self, a, b):
        return (a + b) % self.p

    def _neg(self, a):
        return (-a) % self.p

    def _mul(self, a, b):
        return (a * b) % self.p

    def _inv(self, a):
        return pow(a, self.p - 2, self.p)

    def _is_zero(self, a):
        return a == 0

    def _key(self, a):
        return a

    def _fmt(self, a):
        return str(a)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("F", self.p))

    def __repr__(self):
        return f"F{self.p}"


# Dense univariate polynomial helpers over an arbitrary Field.  Coefficient
# lists are ascending and trimmed; the zero polynomial is the empty tuple.

def poly_trim(coeffs) -> tuple:
    coeffs = list(coeffs)
    while coeffs and coeffs[-1].is_zero():
        coeffs.pop()
    return tuple(coeffs)


def poly_add(a, b, field: Field) -> tuple:
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else field.zero
        y = b[i] if i < len(b) else field.zero
        out.append(x + y)
    return poly_trim(out)


def poly_neg(a) -> tuple:
    return tuple(-c for c in a)


def poly_mul(a, b, field: Field) -> tuple:
    if not a or not b:
        return ()
    out = [field.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return poly_trim(out)


def poly_divmod(a, b, field: Field):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    quot = [field.zero] * max(0, len(a) - len(b) + 1)
    inv_lead = b[-1].inverse()
    while len(rem) >= len(b):
        c = rem[-1] * inv_lead
        k = len(rem) - len(b)
        quot[k] = c
        for i, bc in enumerate(b):
            rem[k + i] = rem[k + i] - c * bc
        while rem and rem[-1].is_zero():
            rem.pop()
    return poly_trim(quot), poly_trim(rem)


def poly_gcd(a, b, field: Field) -> tuple:
    a, b = poly_trim(a), poly_trim(b)
    while b:
        _, r = poly_divmod(a, b, field)
        a, b = b, r
    if a:
        inv = a[-1].inverse()
        a = tuple(c * inv for c in a)
    return a


def poly_xgcd(a, b, field: Field):
    """Return (g, u, v) with u*a + v*b = g, g monic (or zero)."""
    r0, r1 = poly_trim(a), poly_trim(b)
    u0, u1 = (field.one,), ()
    v0, v1 = (), (field.one,)
    while r1:
        q, r = poly_divmod(r0, r1, field)
        r0, r1 = r1, r
        u0, u1 = u1, poly_add(u0, poly_neg(poly_mul(q, u1, field)), field)
        v0, v1 = v1, poly_add(v0, poly_neg(poly_mul(q, v1, field)), field)
    if r0:
        inv = r0[-1].inverse()
        r0 = tuple(c * inv for c in r0)
        u0 = tuple(c * inv for c in u0)
        v0 = tuple(c * inv for c in v0)
    return r0, u0, v0


def _poly_fmt(coeffs, var: str, coeff_fmt) -> str:
    if not coeffs:
        return "0"
    parts = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if c.is_zero():
            continue
        cs = coeff_fmt(c)
        if i == 0:
            parts.append(cs)
        else:
            power = var if i == 1 else f"{var}^{i}"
            if cs == "1":
                parts.append(power)
            else:
                if any(op in cs[1:] for op in "+-") or "/" in cs:
                    cs = f"({cs})"
                parts.append(f"{cs}*{power}")
    return "+".join(parts).replace("+-", "-")


class ExtensionField(Field):
    """Simple extension base[a]/(minpoly), elements in the power basis."""

    def __init__(self, base: Field, var: str, minpoly: tuple):
        if isinstance(base, FunctionField):
            raise FieldError("rational function fields cannot be extended")
        if len(minpoly) - 1 < 1 or len(minpoly) - 1 > MAX_MINPOLY_DEGREE:
            raise FieldError(
                f"minimal polynomial degree must be 1..{MAX_MINPOLY_DEGREE}"
            )
        if minpoly[-1] != base.one:
            raise FieldError("minimal polynomial must be monic")
        if not _is_irreducible(minpoly, base):
            raise FieldError(f"minimal polynomial {_poly_fmt(minpoly, var, str)} is reducible")
        self.base = base
        self.var = var
        self.minpoly = tuple(minpoly)
        self.degree = len(minpoly) - 1
        self.char = base.char

    @property
    def generator(self) -> FieldElem:
        rep = [self.base.zero] * self.degree
        if self.degree == 1:
            # a = -c0 in a degree-one extension
            return FieldElem(self, (-self.minpoly[0],))
        rep[1] = self.base.one
        return FieldElem(self, tuple(rep))

    def _pad(self, coeffs) -> tuple:
        out = list(coeffs) + [self.base.zero] * (self.degree - len(coeffs))
        return tuple(out[: self.degree])

    def from_int(self, n):
        return FieldElem(self, self._pad([self.base.from_int(n)]))

    def embed(self, c: FieldElem) -> FieldElem:
        if c.field != self.base:
            raise FieldError("embed: element not in the base field")
        return FieldElem(self, self._pad([c]))

    def is_finite(self):
        return self.base.is_finite()

    def size(self):
        return self.base.size() ** self.degree

    def elements(self):
        base_elems = list(self.base.elements())
        for combo in itertools.product(base_elems, repeat=self.degree):
            yield FieldElem(self, tuple(combo))

    def generator_env(self):
        env = {self.var: self.generator}
        for name, val in self.base.generator_env().items():
            env[name] = self.embed(val)
        return env

    def _add(self, a, b):
        return self._pad(poly_add(a, b, self.base))

    def _neg(self, a):
        return tuple(-c for c in a)

    def _mul(self, a, b):
        prod = poly_mul(poly_trim(a), poly_trim(b), self.base)
        _, rem = poly_divmod(prod, self.minpoly, self.base)
        return self._pad(rem)

    def _inv(self, a):
        g, u, _ = poly_xgcd(poly_trim(a), self.minpoly, self.base)
        if len(g) != 1:
            raise FieldError("element not invertible; minimal polynomial not irreducible?")
        inv_g = g[0].inverse()
        _, rem = poly_divmod(tuple(c * inv_g for c in u), self.minpoly, self.base)
        return self._pad(rem)

    def _is_zero(self, a):
        return all(c.is_zero() for c in a)

    def _key(self, a):
        return tuple(c.key() for c in a)

    def _fmt(self, a):
        return _poly_fmt(poly_trim(a), self.var, lambda c: str(c))

    def minpoly_str(self) -> str:
        """The defining polynomial as parseable text, e.g. ``b^2+1``."""
        return _poly_fmt(self.minpoly, self.var, str)

    def __eq__(self, other):
        return (
            isinstance(other, ExtensionField)
            and other.base == self.base
            and other.var == self.var
            and other.minpoly == self.minpoly
        )

    def __hash__(self):
        return hash(("ext", self.base, self.var, len(self.minpoly)))

    def __repr__(self):
        base = "Q" if isinstance(self.base, Rationals) else repr(self.base)
        return f"{base}[{self.var}]/({_poly_fmt(self.minpoly, self.var, str)})"


# F_p[s] helpers on plain int tuples (ascending, trimmed).

def _ipoly_trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _ipoly_add(a, b, p):
    n = max(len(a), len(b))
    return _ipoly_trim(
        [((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % p for i in range(n)]
    )


def _ipoly_mul(a, b, p):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _ipoly_trim(out)

def _ipoly_divmod(a, b, p):
    rem = list(a)
    quot = [0] * max(0, len(a) - len(b) + 1)
    inv_lead = pow(b[-1], p - 2, p)
    while len(rem) >= len(b):
        c = rem[-1] * inv_lead % p
        k = len(rem) - len(b)
        quot[k] = c
        for i, bc in enumerate(b):
            rem[k + i] = (rem[k + i] - c * bc) % p
        while rem and rem[-1] == 0:
            rem.pop()
    return _ipoly_trim(quot), _ipoly_trim(rem)


def _ipoly_gcd(a, b, p):
    a, b = _ipoly_trim(a), _ipoly_trim(b)
    while b:
        _, r = _ipoly_divmod(a, b, p)
        a, b = b, r
    if a:
        inv = pow(a[-1], p - 2, p)
        a = tuple(c * inv % p for c in a)
    return a


class FunctionField(Field):
    """Rational functions F_p(s), reduced with monic denominator."""

    def __init__(self, p: int, var: str):
        if not _is_prime(p):
            raise FieldError(f"{p} is not prime")
        self.char = p
        self.p = p
        self.var = var

    def _canon(self, num, den):
        num, den = _ipoly_trim(num), _ipoly_trim(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            return ((), (1,))
        g = _ipoly_gcd(num, den, self.p)
        if len(g) > 1:
            num, _ = _ipoly_divmod(num, g, self.p)
            den, _ = _ipoly_divmod(den, g, self.p)
        inv_lead = pow(den[-1], self.p - 2, self.p)
        num = tuple(c * inv_lead % self.p for c in num)
        den = tuple(c * inv_lead % self.p for c in den)
        return (num, den)

    @property
    def generator(self) -> FieldElem:
        return FieldElem(self, ((0, 1), (1,)))

    def from_int(self, n):
        n %= self.p
        return FieldElem(self, ((n,) if n else (), (1,)))

    def generator_env(self):
        return {self.var: self.generator}

    def _add(self, a, b):
        (na, da), (nb, db) = a, b
        num = _ipoly_add(
            _ipoly_mul(na, db, self.p), _ipoly_mul(nb, da, self.p), self.p
        )
        return self._canon(num, _ipoly_mul(da, db, self.p))

    def _neg(self, a):
        num, den = a
        return (tuple((-c) % self.p for c in num), den)

    def _mul(self, a, b):
        (na, da), (nb, db) = a, b
        return self._canon(_ipoly_mul(na, nb, self.p), _ipoly_mul(da, db, self.p))

    def _inv(self, a):
        num, den = a
        return self._canon(den, num)

    def _is_zero(self, a):
        return not a[0]

    def _key(self, a):
        return a

    def _fmt(self, a):
        num, den = a
        wrap = lambda c: str(c)  # noqa: E731
        num_s = _poly_fmt(
            tuple(FieldElem(PrimeField(self.p), c) for c in num), self.var, wrap
        )
        if den == (1,):
            return num_s
        den_s = _poly_fmt(
            tuple(FieldElem(PrimeField(self.p), c) for c in den), self.var, wrap
        )
        return f"({num_s})/({den_s})"

    def __eq__(self, other):
        return (
            isinstance(other, FunctionField)
            and other.p == self.p
            and other.var == self.var
        )

    def __hash__(self):
        return hash(("ratfun", self.p, self.var))

    def __repr__(self):
        return f"F{self.p}({self.var})"


def _is_irreducible(minpoly: tuple, base: Field) -> bool:
    deg = len(minpoly) - 1
    if deg == 1:
        return True
    if isinstance(base, Rationals):
        import sympy

        x = sympy.Symbol("x")
        poly = sum(
            sympy.Rational(c.rep.numerator, c.rep.denominator) * x**i
            for i, c in enumerate(minpoly)
        )
        return sympy.Poly(poly, x, domain="QQ").is_irreducible
    if base.is_finite():
        # A monic polynomial of degree d is reducible iff it has a monic
        # factor of degree 1..d//2; the base is small enough to enumerate.
        elems = list(base.elements())
        for fdeg in range(1, deg // 2 + 1):
            for combo in itertools.product(elems, repeat=fdeg):
                factor = poly_trim(list(combo) + [base.one])
                _, rem = poly_divmod(minpoly, factor, base)
                if not rem:
                    return False
        return True
    raise FieldError(f"cannot test irreducibility over {base}")


class _UPoly:
    """Throwaway univariate polynomial used only to evaluate minpoly text."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        self.field = field
        self.coeffs = poly_trim(coeffs)

    def _coerce(self, other):
        if isinstance(other, _UPoly):
            return other
        if isinstance(other, int):
            return _UPoly(self.field, (self.field.from_int(other),))
        if isinstance(other, FieldElem) and other.field == self.field:
            return _UPoly(self.field, (other,))
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return _UPoly(self.field, poly_add(self.coeffs, other.coeffs, self.field))

    __radd__ = __add__

    def __neg__(self):
        return _UPoly(self.field, poly_neg(self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return _UPoly(self.field, poly_mul(self.coeffs, other.coeffs, self.field))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if len(other.coeffs) > 1:
            raise FieldError("cannot divide by a non-constant polynomial")
        if not other.coeffs:
            raise ZeroDivisionError("division by zero")
        inv = other.coeffs[0].inverse()
        return _UPoly(self.field, tuple(c * inv for c in self.coeffs))

    def __pow__(self, n):
        result = _UPoly(self.field, (self.field.one,))
        for _ in range(n):
            result = result * self
        return result


def _parse_upoly(field: Field, text: str, var: Optional[str] = None):
    """Parse univariate polynomial text over ``field``; returns (var, coeffs)."""
    ast = expr.parse(text)
    reserved = field.generator_env()
    names = [n for n in expr.names_in(ast) if n not in reserved]
    if var is None:
        if len(names) != 1:
            raise FieldError(
                f"expected exactly one new variable in {text!r}, found {names}"
            )
        var = names[0]
    elif names and names != [var]:
        raise FieldError(f"unexpected names {names} in {text!r}")
    env = {name: _UPoly(field, (value,)) for name, value in reserved.items()}
    env[var] = _UPoly(field, (field.zero, field.one))
    value = expr.evaluate(ast, env, lambda n: _UPoly(field, (field.from_int(n),)))
    if isinstance(value, FieldElem):
        value = _UPoly(field, (value,))
    if not isinstance(value, _UPoly):
        raise FieldError(f"not a polynomial: {text!r}")
    return var, value.coeffs


class Extension:
    """A simple extension k ⊂ K with its power basis bookkeeping."""

    __slots__ = ("base", "top")

    def __init__(self, base: Field, top: ExtensionField):
        if top.base != base:
            raise FieldError("extension mismatch")
        self.base = base
        self.top = top

    @property
    def degree(self) -> int:
        return self.top.degree

    def embed(self, c: FieldElem) -> FieldElem:
        return self.top.embed(c)

    def coordinates(self, e: FieldElem) -> tuple:
        """Coordinates of e in the basis 1, a, ..., a^(deg-1), over the base."""
        if e.field != self.top:
            raise FieldError("coordinates: element not in the extension field")
        return tuple(e.rep)

    def descend(self, e: FieldElem) -> Optional[FieldElem]:
        """The base-field element equal to e, or None if e is not rational."""
        coords = self.coordinates(e)
        if any(not c.is_zero() for c in coords[1:]):
            return None
        return coords[0]

    def __repr__(self):
        return f"{self.base} in {self.top}"


def make_extension(base: Field, minpoly: Union[str, tuple], var: Optional[str] = None) -> Extension:
    if isinstance(base, FunctionField):
        raise FieldError("rational function fields cannot be extended")
    if isinstance(base, ExtensionField) and not base.is_finite():
        raise FieldError("towers over a number field are not supported")
    if isinstance(minpoly, str):
        var, coeffs = _parse_upoly(base, minpoly, var)
    else:
        coeffs = tuple(minpoly)
        if var is None:
            raise FieldError("variable name required with explicit coefficients")
    if var in base.generator_env():
        raise FieldError(f"generator name {var!r} already in use")
    return Extension(base, ExtensionField(base, var, coeffs))


def make_field(text: str) -> Field:
    """Build a field from its textual description.

    Accepted forms: ``Q``, ``F<p>``, ``F<p>[v]/(poly)``, ``Q[v]/(poly)``,
    ``F<p>(v)``.
    """
    text = text.strip()
    if text == "Q":
        return Rationals()
    if text.startswith("Q[") or (text.startswith("F") and "[" in text):
        head, _, rest = text.partition("[")
        var, _, polypart = rest.partition("]")
        var = var.strip()
        polypart = polypart.strip()
        if not polypart.startswith("/(") or not polypart.endswith(")"):
            raise FieldError(f"malformed field description: {text!r}")
        poly_text = polypart[2:-1]
        base = make_field(head.strip())
        return make_extension(base, poly_text, var).top
    if text.startswith("F") and "(" in text:
        head, _, rest = text.partition("(")
        var = rest.rstrip(")").strip()
        if not rest.endswith(")") or not var.isidentifier():
            raise FieldError(f"malformed field description: {text!r}")
        try:
            p = int(head[1:])
        except ValueError:
            raise FieldError(f"malformed field description: {text!r}") from None
        return FunctionField(p, var)
    if text.startswith("F"):
        try:
            p = int(text[1:])
        except ValueError:
            raise FieldError(f"malformed field description: {text!r}") from None
        return PrimeField(p)
    raise FieldError(f"malformed field description: {text!r}")


def is_pth_power(e: FieldElem, p: int) -> Optional[FieldElem]:
    """A p-th root of e in its own field, or None if none exists.

    Only fields of characteristic p qualify.  Over a finite field the
    Frobenius is bijective, so a root always exists; over F_p(s) the element
    must be a p-th power of a rational function.
    """
    field = e.field
    if field.char == 0:
        raise FieldError("is_pth_power requires positive characteristic")
    if field.char != p:
        raise FieldError(f"field has characteristic {field.char}, not {p}")
    if field.is_finite():
        root = e ** (field.size() // p)
        assert root**p == e
        return root
    if isinstance(field, FunctionField):
        num, den = e.rep

        def poly_root(c):
            if any(v and (i % p) for i, v in enumerate(c)):
                return None
            return _ipoly_trim([c[i] for i in range(0, len(c), p)])

        rnum = poly_root(num)
        rden = poly_root(den)
        if rnum is None or rden is None:
            return None
        root = FieldElem(field, field._canon(rnum, rden))
        assert root**p == e
        return root
    raise FieldError(f"is_pth_power not supported over {field}")


def coordinates(e: FieldElem, ext: Extension) -> tuple:
    return ext.coordinates(e)


def descend_scalar(e: FieldElem, ext: Extension) -> Optional[FieldElem]:
    return ext.descend(e)
