"""Exact arithmetic and linear algebra over localized principal ideal domains.

The coefficient rings are the integers, univariate polynomials over the
rationals or a prime field, and localizations of these at finitely many
normalized primes (positive prime integers, monic irreducible polynomials).
Elements are kept in a canonical reduced form: the denominator is a formal
product of powers of inverted primes, coprime to the numerator, and the
numerator carries the sign (resp. the leading field scalar).  All identities
are exact; the Smith normal form stores invertible transforms together with
their inverses so every decomposition is certified.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import sympy


class NotACover(Exception):
    """gcd of the two candidate cover elements is not a unit."""


class NotAUnit(Exception):
    pass


class ZeroElement(Exception):
    pass


class DimensionMismatch(Exception):
    pass


# ---------------------------------------------------------------------------
# coefficient fields for polynomial bases
# ---------------------------------------------------------------------------


class Rationals:
    name = "Q"

    zero = Fraction(0)
    one = Fraction(1)

    def from_int(self, n):
        return Fraction(n)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError
        return 1 / Fraction(a)

    def fmt(self, a):
        return str(a)

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("Q")

    def __repr__(self):
        return "Q"


class PrimeField:
    def __init__(self, p):
        if not sympy.isprime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.name = f"F{p}"
        self.zero = 0
        self.one = 1 % p

    def from_int(self, n):
        return n % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError
        return pow(a, -1, self.p)

    def fmt(self, a):
        return str(a % self.p)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("F", self.p))

    def __repr__(self):
        return self.name


# ---------------------------------------------------------------------------
# polynomial helpers: tuples of coefficients, ascending degree, no trailing 0
# ---------------------------------------------------------------------------


def pnormalize(F, cs):
    cs = list(cs)
    while cs and cs[-1] == F.zero:
        cs.pop()
    return tuple(cs)


def padd(F, a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else F.zero
        y = b[i] if i < len(b) else F.zero
        out.append(F.add(x, y))
    return pnormalize(F, out)


def pneg(F, a):
    return tuple(F.neg(c) for c in a)


def psub(F, a, b):
    return padd(F, a, pneg(F, b))


def pmul(F, a, b):
    if not a or not b:
        return ()
    out = [F.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == F.zero:
            continue
        for j, y in enumerate(b):
            out[i + j] = F.add(out[i + j], F.mul(x, y))
    return pnormalize(F, out)


def pdivmod(F, a, b):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(a)
    q = [F.zero] * max(len(a) - len(b) + 1, 0)
    inv_lead = F.inv(b[-1])
    while len(r) >= len(b):
        while r and r[-1] == F.zero:
            r.pop()
        if len(r) < len(b):
            break
        c = F.mul(r[-1], inv_lead)
        d = len(r) - len(b)
        q[d] = c
        for i, bc in enumerate(b):
            r[d + i] = F.sub(r[d + i], F.mul(c, bc))
    return pnormalize(F, q), pnormalize(F, r)


def pmonic(F, a):
    """Return (leading coefficient, monic part); zero maps to (one, zero)."""
    if not a:
        return F.one, ()
    lead = a[-1]
    inv = F.inv(lead)
    return lead, tuple(F.mul(inv, c) for c in a)


def pgcd(F, a, b):
    while b:
        _, a, b = None, b, pdivmod(F, a, b)[1]
    return pmonic(F, a)[1]


def pgcdext(F, a, b):
    """Extended gcd; returns monic g and s, t with s*a + t*b = g."""
    r0, r1 = a, b
    s0, s1 = (F.one,), ()
    t0, t1 = (), (F.one,)
    while r1:
        q, r = pdivmod(F, r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, psub(F, s0, pmul(F, q, s1))
        t0, t1 = t1, psub(F, t0, pmul(F, q, t1))
    lead, g = pmonic(F, r0)
    if not g:
        return (), (F.one,), ()
    inv = F.inv(lead)
    scale = (inv,)
    return g, pmul(F, scale, s0), pmul(F, scale, t0)


# ---------------------------------------------------------------------------
# base rings
# ---------------------------------------------------------------------------


class IntegerRing:
    kind = "Z"
    zero = 0
    one = 1

    def from_int(self, n):
        return n

    def canon(self, a):
        if not isinstance(a, int):
            raise TypeError(f"integer base element expected, got {a!r}")
        return a

    def is_zero(self, a):
        return a == 0

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def divmod(self, a, b):
        return divmod(a, b)

    def mod(self, a, b):
        return a % b

    def divides(self, a, b):
        if a == 0:
            return b == 0
        return b % a == 0

    def exact_div(self, a, b):
        q, r = divmod(a, b)
        if r != 0:
            raise ArithmeticError(f"{b} does not divide {a}")
        return q

    def gcd(self, a, b):
        while b:
            a, b = b, a % b
        return abs(a)

    def gcdext(self, a, b):
        s0, s1, t0, t1 = 1, 0, 0, 1
        r0, r1 = a, b
        while r1:
            q, r = divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, s0 - q * s1
            t0, t1 = t1, t0 - q * t1
        if r0 < 0:
            r0, s0, t0 = -r0, -s0, -t0
        return r0, s0, t0

    def normalize_unit(self, a):
        """a = torsion * normal with normal >= 0; torsion in {1, -1}."""
        if a < 0:
            return -1, -a
        return 1, a

    def const(self, c):
        return c

    def is_const_unit(self, a):
        return a in (1, -1)

    def const_part(self, a):
        # inverse of const() on constants; None when a is not a unit constant
        return a if a in (1, -1) else None

    def size(self, a):
        return abs(a)

    def factor(self, a):
        if a == 0:
            raise ZeroElement("cannot factor zero")
        sign = -1 if a < 0 else 1
        return sign, dict(sympy.factorint(abs(a)))

    def is_prime_elem(self, a):
        return a > 1 and sympy.isprime(a)

    def fmt(self, a):
        return str(a)

    def fmt_prime(self, p):
        return str(p)

    def sort_key(self, a):
        return (abs(a), a)

    def __eq__(self, other):
        return isinstance(other, IntegerRing)

    def __hash__(self):
        return hash("Z")

    def __repr__(self):
        return "Z"


class PolynomialRing:
    kind = "poly"

    def __init__(self, field, var="x"):
        self.field = field
        self.var = var
        self.zero = ()
        self.one = (field.one,)

    def from_int(self, n):
        c = self.field.from_int(n)
        return (c,) if c != self.field.zero else ()

    def canon(self, a):
        F = self.field
        out = []
        for c in a:
            if isinstance(F, Rationals):
                out.append(c if isinstance(c, Fraction) else Fraction(c))
            else:
                out.append(int(c) % F.p)
        return pnormalize(F, out)

    def is_zero(self, a):
        return a == ()

    def add(self, a, b):
        return padd(self.field, a, b)

    def sub(self, a, b):
        return psub(self.field, a, b)

    def mul(self, a, b):
        return pmul(self.field, a, b)

    def neg(self, a):
        return pneg(self.field, a)

    def divmod(self, a, b):
        return pdivmod(self.field, a, b)

    def mod(self, a, b):
        return pdivmod(self.field, a, b)[1]

    def divides(self, a, b):
        if not a:
            return not b
        return pdivmod(self.field, b, a)[1] == ()

    def exact_div(self, a, b):
        q, r = pdivmod(self.field, a, b)
        if r != ():
            raise ArithmeticError("inexact polynomial division")
        return q

    def gcd(self, a, b):
        return pgcd(self.field, a, b)

    def gcdext(self, a, b):
        return pgcdext(self.field, a, b)

    def normalize_unit(self, a):
        """a = torsion * normal with normal monic; torsion a field scalar."""
        if not a:
            return self.field.one, ()
        return pmonic(self.field, a)

    def const(self, c):
        return (c,) if c != self.field.zero else ()

    def is_const_unit(self, a):
        return len(a) == 1

    def const_part(self, a):
        return a[0] if len(a) == 1 else None

    def size(self, a):
        return len(a)  # degree + 1; enough for Euclidean comparisons

    def factor(self, a):
        if not a:
            raise ZeroElement("cannot factor zero")
        return _poly_factor(self, a)

    def is_prime_elem(self, a):
        if len(a) < 2 or a[-1] != self.field.one:
            return False
        _, factors = self.factor(a)
        return factors == {a: 1}

    def fmt(self, a):
        if not a:
            return "0"
        terms = []
        for i in range(len(a) - 1, -1, -1):
            c = a[i]
            if c == self.field.zero:
                continue
            cs = self.field.fmt(c)
            if i == 0:
                terms.append(cs)
            else:
                xs = self.var if i == 1 else f"{self.var}^{i}"
                if cs == "1":
                    terms.append(xs)
                elif cs == "-1":
                    terms.append(f"-{xs}")
                else:
                    terms.append(f"{cs}{xs}")
        out = terms[0]
        for t in terms[1:]:
            out += f"+{t}" if not t.startswith("-") else t
        return out

    def fmt_prime(self, p):
        return self.fmt(p)

    def sort_key(self, a):
        return (len(a), tuple(str(c) for c in a))

    def __eq__(self, other):
        return isinstance(other, PolynomialRing) and other.field == self.field

    def __hash__(self):
        return hash(("poly", self.field))

    def __repr__(self):
        return f"{self.field!r}[{self.var}]"


_SYMPY_X = sympy.Symbol("x")


def _poly_to_sympy(ring, a):
    F = ring.field
    if isinstance(F, Rationals):
        dom = sympy.QQ
        coeffs = [sympy.Rational(c.numerator, c.denominator) for c in reversed(a)]
    else:
        dom = sympy.GF(F.p)
        coeffs = [int(c) for c in reversed(a)]
    return sympy.Poly(coeffs, _SYMPY_X, domain=dom)


def _poly_from_sympy(ring, poly):
    F = ring.field
    cs = poly.all_coeffs()  # descending
    out = []
    for c in reversed(cs):
        if isinstance(F, Rationals):
            out.append(Fraction(int(c.numerator), int(c.denominator))
                       if hasattr(c, "numerator") else Fraction(int(c)))
        else:
            out.append(int(c) % F.p)
    return pnormalize(F, out)


@lru_cache(maxsize=None)
def _poly_factor_cached(field_key, a_key):
    field = Rationals() if field_key == "Q" else PrimeField(int(field_key[1:]))
    ring = PolynomialRing(field)
    poly = _poly_to_sympy(ring, a_key)
    coeff, factors = poly.factor_list()
    if field_key == "Q":
        c = sympy.Rational(coeff)
        unit = Fraction(int(c.p), int(c.q))
    else:
        unit = int(coeff) % field.p
    out = {}
    for f, e in factors:
        mono = _poly_from_sympy(ring, f)
        lead, mono = pmonic(field, mono)
        for _ in range(e):
            unit = field.mul(unit, lead)
        out[mono] = out.get(mono, 0) + e
    return unit, out


def _poly_factor(ring, a):
    lead, monic = pmonic(ring.field, a)
    unit, factors = _poly_factor_cached(ring.field.name, monic)
    return ring.field.mul(lead, unit), dict(factors)


@lru_cache(maxsize=None)
def _int_factor_cached(n):
    return dict(sympy.factorint(n))


# ---------------------------------------------------------------------------
# ring specs and elements
# ---------------------------------------------------------------------------


class RingSpec:
    """A base PID together with a finite set of inverted normalized primes."""

    def __init__(self, base, inverted=()):
        self.base = base
        primes = []
        for p in inverted:
            if not base.is_prime_elem(p):
                raise ValueError(f"{base.fmt(p)} is not a normalized prime")
            if p not in primes:
                primes.append(p)
        self.inverted = frozenset(primes)
        self._sorted_primes = tuple(sorted(primes, key=base.sort_key))

    def sorted_primes(self):
        return self._sorted_primes

    def el(self, num, den=None):
        return RingElement(self, num, den)

    def zero(self):
        return self.el(self.base.zero)

    def one(self):
        return self.el(self.base.one)

    def from_int(self, n):
        return self.el(self.base.from_int(n))

    def prime_power(self, p, e):
        if e >= 0:
            out = self.base.one
            for _ in range(e):
                out = self.base.mul(out, p)
            return self.el(out)
        return self.el(self.base.one, {p: -e})

    def coerce(self, x):
        if isinstance(x, RingElement):
            if x.spec == self:
                return x
            if x.spec.base == self.base and x.spec.inverted <= self.inverted:
                return RingElement(self, x.num, dict(x.den))
            raise ValueError("cannot coerce element between unrelated ring specs")
        if isinstance(x, int):
            return self.from_int(x)
        return self.el(x)

    def __eq__(self, other):
        return (isinstance(other, RingSpec) and other.base == self.base
                and other.inverted == self.inverted)

    def __hash__(self):
        return hash((self.base, self.inverted))

    def __repr__(self):
        if not self.inverted:
            return f"RingSpec({self.base!r})"
        ps = ",".join(self.base.fmt_prime(p) for p in self._sorted_primes)
        return f"RingSpec({self.base!r}; 1/{{{ps}}})"


class RingElement:
    """num / prod(p^e) in reduced form; den primes never divide num."""

    __slots__ = ("spec", "num", "den")

    def __init__(self, spec, num, den=None):
        base = spec.base
        num = base.canon(num)
        dd = {}
        if den:
            for p, e in (den.items() if isinstance(den, dict) else den):
                if e:
                    if p not in spec.inverted:
                        raise ValueError("denominator prime is not inverted")
                    dd[p] = dd.get(p, 0) + e
        if base.is_zero(num):
            dd = {}
        else:
            for p in list(dd):
                while dd[p] > 0 and base.divides(p, num):
                    num = base.exact_div(num, p)
                    dd[p] -= 1
                if dd[p] == 0:
                    del dd[p]
                elif dd[p] < 0:
                    # negative exponents fold into the numerator
                    for _ in range(-dd[p]):
                        num = base.mul(num, p)
                    del dd[p]
        self.spec = spec
        self.num = num
        self.den = tuple(sorted(dd.items(), key=lambda kv: base.sort_key(kv[0])))

    # -- basic structure ----------------------------------------------------

    def den_dict(self):
        return dict(self.den)

    def den_value(self):
        base = self.spec.base
        out = base.one
        for p, e in self.den:
            for _ in range(e):
                out = base.mul(out, p)
        return out

    def is_zero(self):
        return self.spec.base.is_zero(self.num)

    def __bool__(self):
        return not self.is_zero()

    def sfree(self):
        """Split self = w * n0 with w a unit and n0 the normalized S-free part."""
        spec, base = self.spec, self.spec.base
        if self.is_zero():
            return spec.one(), base.zero
        num = self.num
        exps = {}
        for p in spec.inverted:
            e = 0
            while base.divides(p, num):
                num = base.exact_div(num, p)
                e += 1
            if e:
                exps[p] = e
        torsion, n0 = base.normalize_unit(num)
        wnum = base.const(torsion)
        for p, e in exps.items():
            for _ in range(e):
                wnum = base.mul(wnum, p)
        w = RingElement(spec, wnum, dict(self.den))
        return w, n0

    def sfree_part(self):
        return self.sfree()[1]

    def is_unit(self):
        return (not self.is_zero()) and self.spec.base.is_const_unit(self.sfree_part())

    def inverse(self):
        spec, base = self.spec, self.spec.base
        if self.is_zero():
            raise NotAUnit("zero is not invertible")
        # peel inverted primes off the numerator; the rest must be a constant unit
        num = self.num
        exps = {}
        for p in spec.inverted:
            e = 0
            while base.divides(p, num):
                num = base.exact_div(num, p)
                e += 1
            if e:
                exps[p] = e
        if base.kind == "Z":
            if num not in (1, -1):
                raise NotAUnit(f"{self!r} is not invertible")
            inv_num = num
        else:
            cval = base.const_part(num)
            if cval is None:
                raise NotAUnit(f"{self!r} is not invertible")
            inv_num = base.const(base.field.inv(cval))
        for p, e in self.den:
            for _ in range(e):
                inv_num = base.mul(inv_num, p)
        return RingElement(spec, inv_num, exps)

    # -- arithmetic -----------------------------------------------------------

    def _coerced(self, other):
        if isinstance(other, RingElement):
            if other.spec != self.spec:
                raise ValueError("ring spec mismatch")
            return other
        if isinstance(other, int):
            return self.spec.from_int(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerced(other)
        if other is NotImplemented:
            return NotImplemented
        base = self.spec.base
        dd = dict(self.den)
        for p, e in other.den:
            dd[p] = max(dd.get(p, 0), e)
        # common denominator prod p^dd
        def lift(el):
            num = el.num
            eld = dict(el.den)
            for p, e in dd.items():
                gap = e - eld.get(p, 0)
                for _ in range(gap):
                    num = base.mul(num, p)
            return num
        return RingElement(self.spec, base.add(lift(self), lift(other)), dd)

    __radd__ = __add__

    def __neg__(self):
        return RingElement(self.spec, self.spec.base.neg(self.num), dict(self.den))

    def __sub__(self, other):
        other = self._coerced(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerced(other)
        if other is NotImplemented:
            return NotImplemented
        base = self.spec.base
        dd = dict(self.den)
        for p, e in other.den:
            dd[p] = dd.get(p, 0) + e
        return RingElement(self.spec, base.mul(self.num, other.num), dd)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerced(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.spec.one()
        for _ in range(n):
            out = out * self
        return out

    def divides(self, other):
        """True when other lies in the ideal generated by self."""
        other = self._coerced(other)
        if self.is_zero():
            return other.is_zero()
        return self.spec.base.divides(self.sfree_part(), other.sfree_part())

    def exact_div(self, other):
        """self / other for other a (possibly non-unit) exact divisor."""
        other = self._coerced(other)
        w, b0 = other.sfree()
        base = self.spec.base
        q = base.exact_div(self.num, b0)
        return RingElement(self.spec, q, dict(self.den)) / w

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.spec.from_int(other)
        if not isinstance(other, RingElement):
            return NotImplemented
        return (self.spec == other.spec and self.num == other.num
                and self.den == other.den)

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        base = self.spec.base
        s = base.fmt(self.num)
        if self.den:
            ds = "*".join(
                base.fmt_prime(p) if e == 1 else f"{base.fmt_prime(p)}^{e}"
                for p, e in self.den)
            s = f"({s})/({ds})"
        return s


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


class Matrix:
    """Immutable matrix over a RingSpec; explicit dims allow 0xn and nx0."""

    __slots__ = ("spec", "rows", "cols", "entries")

    def __init__(self, spec, entries, rows=None, cols=None):
        self.spec = spec
        ents = []
        width = None
        for row in entries:
            r = tuple(spec.coerce(x) for x in row)
            if width is None:
                width = len(r)
            elif len(r) != width:
                raise DimensionMismatch("ragged matrix rows")
            ents.append(r)
        self.entries = tuple(ents)
        self.rows = len(ents) if rows is None else rows
        if cols is not None:
            self.cols = cols
        else:
            self.cols = width if width is not None else 0
        if ents and (len(ents) != self.rows or width != self.cols):
            raise DimensionMismatch("explicit shape contradicts entries")

    @staticmethod
    def zero(spec, rows, cols):
        z = spec.zero()
        return Matrix(spec, [[z] * cols for _ in range(rows)], rows=rows, cols=cols)

    @staticmethod
    def identity(spec, n):
        z, o = spec.zero(), spec.one()
        return Matrix(spec, [[o if i == j else z for j in range(n)] for i in range(n)])

    @staticmethod
    def diagonal(spec, diag, rows=None, cols=None):
        diag = [spec.coerce(d) for d in diag]
        rows = rows if rows is not None else len(diag)
        cols = cols if cols is not None else len(diag)
        z = spec.zero()
        return Matrix(spec, [[diag[i] if (i == j and i < len(diag)) else z
                              for j in range(cols)] for i in range(rows)],
                      rows=rows, cols=cols)

    def e(self, i, j):
        return self.entries[i][j]

    def row(self, i):
        return list(self.entries[i])

    def col(self, j):
        return [self.entries[i][j] for i in range(self.rows)]

    def to_lists(self):
        return [list(r) for r in self.entries]

    def __add__(self, other):
        if self.rows != other.rows or self.cols != other.cols:
            raise DimensionMismatch("matrix addition shape mismatch")
        return Matrix(self.spec, [[self.entries[i][j] + other.entries[i][j]
                                   for j in range(self.cols)] for i in range(self.rows)],
                      rows=self.rows, cols=self.cols)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Matrix(self.spec, [[-x for x in row] for row in self.entries],
                      rows=self.rows, cols=self.cols)

    def __mul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise DimensionMismatch(
                    f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
            z = self.spec.zero()
            out = []
            for i in range(self.rows):
                row = []
                for j in range(other.cols):
                    acc = z
                    for k in range(self.cols):
                        a = self.entries[i][k]
                        if a.is_zero():
                            continue
                        b = other.entries[k][j]
                        if b.is_zero():
                            continue
                        acc = acc + a * b
                    row.append(acc)
                out.append(row)
            return Matrix(self.spec, out, rows=self.rows, cols=other.cols)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, scalar):
        scalar = self.spec.coerce(scalar)
        return Matrix(self.spec, [[scalar * x for x in row] for row in self.entries],
                      rows=self.rows, cols=self.cols)

    def transpose(self):
        return Matrix(self.spec, [[self.entries[i][j] for i in range(self.rows)]
                                  for j in range(self.cols)],
                      rows=self.cols, cols=self.rows)

    def is_zero(self):
        return all(x.is_zero() for row in self.entries for x in row)

    def apply_vec(self, vec):
        if len(vec) != self.cols:
            raise DimensionMismatch("vector length mismatch")
        vec = [self.spec.coerce(v) for v in vec]
        out = []
        for i in range(self.rows):
            acc = self.spec.zero()
            for j in range(self.cols):
                if not self.entries[i][j].is_zero() and not vec[j].is_zero():
                    acc = acc + self.entries[i][j] * vec[j]
            out.append(acc)
        return out

    @staticmethod
    def hstack(blocks):
        rows = blocks[0].rows
        spec = blocks[0].spec
        for b in blocks:
            if b.rows != rows:
                raise DimensionMismatch("hstack row mismatch")
        cols = sum(b.cols for b in blocks)
        return Matrix(spec, [[x for b in blocks for x in
                              (b.entries[i] if b.entries else ())]
                             for i in range(rows)], rows=rows, cols=cols)

    @staticmethod
    def vstack(blocks):
        cols = blocks[0].cols
        spec = blocks[0].spec
        for b in blocks:
            if b.cols != cols:
                raise DimensionMismatch("vstack column mismatch")
        rows = sum(b.rows for b in blocks)
        return Matrix(spec, [row for b in blocks for row in b.to_lists()],
                      rows=rows, cols=cols)

    @staticmethod
    def block(grid):
        return Matrix.vstack([Matrix.hstack(row) for row in grid])

    @staticmethod
    def direct_sum(a, b):
        za = Matrix.zero(a.spec, a.rows, b.cols)
        zb = Matrix.zero(a.spec, b.rows, a.cols)
        return Matrix.block([[a, za], [zb, b]])

    def submatrix(self, row_idx, col_idx):
        row_idx, col_idx = list(row_idx), list(col_idx)
        return Matrix(self.spec, [[self.entries[i][j] for j in col_idx] for i in row_idx],
                      rows=len(row_idx), cols=len(col_idx))

    def change_spec(self, spec):
        return Matrix(spec, [[spec.coerce(x) for x in row] for row in self.entries],
                      rows=self.rows, cols=self.cols)

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self):
        return "[" + "; ".join(", ".join(repr(x) for x in row) for row in self.entries) + "]"


# ---------------------------------------------------------------------------
# Euclidean division and extended gcd in the localized ring
# ---------------------------------------------------------------------------


def local_divmod(a, b):
    """q, r with a = q*b + r and the S-free size of r below that of b."""
    spec, base = a.spec, a.spec.base
    if b.is_zero():
        raise ZeroDivisionError("division by zero ring element")
    if a.is_zero():
        return spec.zero(), spec.zero()
    w, b0 = b.sfree()
    if base.is_const_unit(b0):
        return a / b, spec.zero()
    na, da = a.num, a.den_value()
    g, s, _t = base.gcdext(da, b0)
    # da is a product of inverted primes, b0 is S-free: they are coprime
    if not base.is_const_unit(g):
        raise ArithmeticError("denominator not invertible modulo the divisor")
    if base.kind == "Z":
        s = base.exact_div(s, g)
    else:
        s = base.mul(s, base.const(base.field.inv(base.const_part(g))))
    r0 = base.mod(base.mul(na, s), b0)
    r = spec.el(r0)
    qnum = base.exact_div(base.sub(na, base.mul(r0, da)), b0)
    q = spec.el(qnum) / (spec.el(da) * w)
    return q, r


def gcdex_local(a, b):
    """(g, s, t, u, v): s*a+t*b = g normalized S-free, u*a+v*b = 0, s*v-t*u = 1."""
    spec = a.spec
    one, zero = spec.one(), spec.zero()
    r0, r1 = a, b
    s0, s1, t0, t1 = one, zero, zero, one
    while not r1.is_zero():
        q, r = local_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if r0.is_zero():
        return zero, one, zero, zero, one
    w, g0 = r0.sfree()
    g = spec.el(g0)
    winv = w.inverse()
    s, t = s0 * winv, t0 * winv
    u = -(b.exact_div(g))
    v = a.exact_div(g)
    return g, s, t, u, v


def bezout_cover_certificate(f, g):
    """alpha, beta with alpha*f + beta*g = 1; NotACover when gcd is a non-unit."""
    if not isinstance(f, RingElement) or not isinstance(g, RingElement):
        raise TypeError("bezout_cover_certificate expects RingElements")
    d, s, t, _u, _v = gcdex_local(f, g)
    if not d.is_unit():
        raise NotACover(f"gcd {d!r} of {f!r} and {g!r} is not a unit")
    dinv = d.inverse()
    return s * dinv, t * dinv


def powered_bezout(f, g, n):
    """alpha, beta with alpha*f^n + beta*g^n = 1 for coprime f, g."""
    return bezout_cover_certificate(f ** n, g ** n)


# ---------------------------------------------------------------------------
# Smith normal form with certified transforms
# ---------------------------------------------------------------------------


@dataclass
class SmithDecomposition:
    left: Matrix
    right: Matrix
    diagonal: list
    left_inv: Matrix
    right_inv: Matrix

    def diag_matrix(self, rows, cols):
        spec = self.left.spec
        return Matrix.diagonal(spec, self.diagonal, rows, cols)

    def verify(self, m):
        spec = m.spec
        d = self.diag_matrix(m.rows, m.cols)
        if (self.left * m * self.right) != d:
            return False
        if self.left * self.left_inv != Matrix.identity(spec, m.rows):
            return False
        if self.right * self.right_inv != Matrix.identity(spec, m.cols):
            return False
        for i in range(len(self.diagonal) - 1):
            if not self.diagonal[i].divides(self.diagonal[i + 1]):
                return False
        return True


class _Transformer:
    """Mutable matrix with left/right transforms and their inverses."""

    def __init__(self, m):
        self.spec = m.spec
        self.m = m.to_lists()
        self.rows, self.cols = m.rows, m.cols
        eye_r = Matrix.identity(m.spec, m.rows).to_lists()
        eye_c = Matrix.identity(m.spec, m.cols).to_lists()
        self.L = [row[:] for row in eye_r]
        self.Li = [row[:] for row in eye_r]
        self.R = [row[:] for row in eye_c]
        self.Ri = [row[:] for row in eye_c]

    def row_op(self, i, j, s, t, u, v):
        # rows (i, j) <- (s*ri + t*rj, u*ri + v*rj); needs s*v - t*u = 1
        for M in (self.m, self.L):
            ri, rj = M[i], M[j]
            M[i] = [s * a + t * b for a, b in zip(ri, rj)]
            M[j] = [u * a + v * b for a, b in zip(ri, rj)]
        Li = self.Li
        for r in range(len(Li)):
            a, b = Li[r][i], Li[r][j]
            Li[r][i] = a * v + b * (-u)
            Li[r][j] = a * (-t) + b * s

    def col_op(self, i, j, s, t, u, v):
        # cols (i, j) <- (s*ci + t*cj, u*ci + v*cj)
        for M in (self.m, self.R):
            for r in range(len(M)):
                a, b = M[r][i], M[r][j]
                M[r][i] = s * a + t * b
                M[r][j] = u * a + v * b
        Ri = self.Ri
        ri, rj = Ri[i], Ri[j]
        Ri[i] = [v * a + (-u) * b for a, b in zip(ri, rj)]
        Ri[j] = [(-t) * a + s * b for a, b in zip(ri, rj)]

    def row_swap(self, i, j):
        one, zero = self.spec.one(), self.spec.zero()
        if i != j:
            # [0 1; 1 0] has determinant -1; compose with a sign flip
            self.row_op(i, j, zero, one, -one, zero)

    def col_swap(self, i, j):
        one, zero = self.spec.one(), self.spec.zero()
        if i != j:
            self.col_op(i, j, zero, one, -one, zero)

    def row_scale(self, i, unit):
        inv = unit.inverse()
        self.m[i] = [unit * a for a in self.m[i]]
        self.L[i] = [unit * a for a in self.L[i]]
        for r in range(len(self.Li)):
            self.Li[r][i] = self.Li[r][i] * inv

    def add_col_multiple(self, j, i, c):
        # col j += c * col i
        one, zero = self.spec.one(), self.spec.zero()
        # [1 0; c 1] acting on (ci, cj): ci' = ci, cj' = c*ci + cj
        self.col_op(i, j, one, zero, c, one)

    def add_row_multiple(self, j, i, c):
        # row j += c * row i
        one, zero = self.spec.one(), self.spec.zero()
        self.row_op(i, j, one, zero, c, one)


def smith_normal_form(m):
    """Smith decomposition over the (localized) PID of the matrix entries."""
    spec = m.spec
    base = spec.base
    t = _Transformer(m)
    M = t.m
    nmin = min(m.rows, m.cols)

    def sfree_size(x):
        return base.size(x.sfree_part())

    for k in range(nmin):
        # choose the pivot with the smallest S-free part
        best = None
        for i in range(k, m.rows):
            for j in range(k, m.cols):
                if not M[i][j].is_zero():
                    sz = sfree_size(M[i][j])
                    if best is None or sz < best[0]:
                        best = (sz, i, j)
        if best is None:
            break
        _, bi, bj = best
        t.row_swap(k, bi)
        t.col_swap(k, bj)
        while True:
            # clear column k
            for i in range(k + 1, m.rows):
                if M[i][k].is_zero():
                    continue
                piv = M[k][k]
                if piv.divides(M[i][k]):
                    t.add_row_multiple(i, k, -(M[i][k].exact_div(piv)))
                else:
                    g, s, tt, u, v = gcdex_local(piv, M[i][k])
                    t.row_op(k, i, s, tt, u, v)
            # clear row k
            dirty = False
            for j in range(k + 1, m.cols):
                if M[k][j].is_zero():
                    continue
                piv = M[k][k]
                if piv.divides(M[k][j]):
                    t.add_col_multiple(j, k, -(M[k][j].exact_div(piv)))
                else:
                    g, s, tt, u, v = gcdex_local(piv, M[k][j])
                    t.col_op(k, j, s, tt, u, v)
                    dirty = True
            if not dirty:
                # recheck the column: column clearing may have refilled it
                if all(M[i][k].is_zero() for i in range(k + 1, m.rows)):
                    break

    # normalize pivots to their S-free parts
    for k in range(nmin):
        d = M[k][k]
        if d.is_zero():
            continue
        w, d0 = d.sfree()
        if not (w == spec.one()):
            t.row_scale(k, w.inverse())

    # enforce the divisibility chain; the first clause also pushes zeros last
    changed = True
    while changed:
        changed = False
        for i in range(nmin - 1):
            a, b = M[i][i], M[i + 1][i + 1]
            if a.is_zero() and not b.is_zero():
                t.row_swap(i, i + 1)
                t.col_swap(i, i + 1)
                changed = True
                continue
            if a.is_zero() or b.is_zero():
                continue
            if a.divides(b):
                continue
            t.add_col_multiple(i, i + 1, spec.one())
            g, s, tt, u, v = gcdex_local(a, b)
            t.row_op(i, i + 1, s, tt, u, v)
            extra = M[i][i + 1]
            if not extra.is_zero():
                t.add_col_multiple(i + 1, i, -(extra.exact_div(M[i][i])))
            changed = True

    for k in range(nmin):
        d = M[k][k]
        if d.is_zero():
            continue
        w, _d0 = d.sfree()
        if not (w == spec.one()):
            t.row_scale(k, w.inverse())

    diagonal = [M[k][k] for k in range(nmin)]
    return SmithDecomposition(
        left=Matrix(spec, t.L),
        right=Matrix(spec, t.R),
        diagonal=diagonal,
        left_inv=Matrix(spec, t.Li),
        right_inv=Matrix(spec, t.Ri),
    )


# ---------------------------------------------------------------------------
# linear algebra built on the Smith form
# ---------------------------------------------------------------------------


def solve_linear(m, b):
    """Some x with m*x = b, or None; solvability decided exactly."""
    if isinstance(b, Matrix):
        b = b.col(0)
    if len(b) != m.rows:
        raise DimensionMismatch("right-hand side length mismatch")
    spec = m.spec
    b = [spec.coerce(x) for x in b]
    snf = smith_cached(m)
    lb = snf.left.apply_vec(b)
    nmin = len(snf.diagonal)
    y = [spec.zero()] * m.cols
    for i in range(m.rows):
        d = snf.diagonal[i] if i < nmin else spec.zero()
        if d.is_zero():
            if not lb[i].is_zero():
                return None
        else:
            if not d.divides(lb[i]):
                return None
            y[i] = lb[i].exact_div(d)
    return snf.right.apply_vec(y)


def matrix_solve(m, b):
    """Matrix X with m*X = b (columnwise solve), or None."""
    cols = []
    for j in range(b.cols):
        x = solve_linear(m, b.col(j))
        if x is None:
            return None
        cols.append(x)
    return Matrix(m.spec, [[cols[j][i] for j in range(b.cols)]
                           for i in range(m.cols)])


def kernel_basis(m):
    """Matrix whose columns generate (in fact form a basis of) ker(m)."""
    snf = smith_cached(m)
    idx = [j for j in range(m.cols)
           if j >= len(snf.diagonal) or snf.diagonal[j].is_zero()]
    if not idx:
        return Matrix.zero(m.spec, m.cols, 0)
    return snf.right.submatrix(range(m.cols), idx)


def cokernel_invariants(m):
    """(free_rank, invariant_factors) of coker(m) over the matrix spec."""
    snf = smith_cached(m)
    factors = []
    rank = 0
    for d in snf.diagonal:
        if d.is_zero():
            continue
        rank += 1
        if not d.is_unit():
            factors.append(d)
    return m.rows - rank, factors


_SMITH_CACHE = {}


def smith_cached(m):
    key = (m.spec, m.entries)
    hit = _SMITH_CACHE.get(key)
    if hit is None:
        hit = smith_normal_form(m)
        if len(_SMITH_CACHE) > 4096:
            _SMITH_CACHE.clear()
        _SMITH_CACHE[key] = hit
    return hit


class PresentedModule:
    """Finitely generated module given by generators and a relation matrix.

    Relations are the columns of `rel`; the module is coker(rel).  The class
    keeps the Smith data so elements (integer vectors over the generators)
    can be reduced to canonical coordinates and compared exactly.
    """

    def __init__(self, spec, rel):
        self.spec = spec
        self.rel = rel
        self.ngens = rel.rows
        self.snf = smith_cached(rel) if rel.cols else None

    @staticmethod
    def free(spec, n):
        return PresentedModule(spec, Matrix.zero(spec, n, 0))

    def descriptor(self):
        from .complexes import ModuleDescriptor
        if self.snf is None:
            return ModuleDescriptor(self.spec, self.ngens, ())
        free, factors = cokernel_invariants(self.rel)
        return ModuleDescriptor(self.spec, free, tuple(factors))

    def reduce(self, vec):
        """Canonical coordinates of an element, in the Smith-aligned basis."""
        vec = [self.spec.coerce(v) for v in vec]
        if len(vec) != self.ngens:
            raise DimensionMismatch("element length mismatch")
        if self.snf is None:
            return vec
        w = self.snf.left.apply_vec(vec)
        out = []
        for i, x in enumerate(w):
            if i < len(self.snf.diagonal):
                d = self.snf.diagonal[i]
                if d.is_unit():
                    out.append(self.spec.zero())
                    continue
                if not d.is_zero():
                    _q, r = local_divmod(x, d)
                    out.append(r)
                    continue
            out.append(x)
        return out

    def is_zero_element(self, vec):
        return all(x.is_zero() for x in self.reduce(vec))

    def elements_equal(self, v, w):
        diff = [a - b for a, b in zip(v, w)]
        return self.is_zero_element(diff)

    def in_span(self, span, vec):
        """Solve span*x = vec modulo the relations; returns x or None."""
        if self.rel.cols:
            m = Matrix.hstack([span, self.rel])
        else:
            m = span
        sol = solve_linear(m, vec)
        if sol is None:
            return None
        return sol[:span.cols]


# ---------------------------------------------------------------------------
# localization, unit groups
# ---------------------------------------------------------------------------


def localize(spec, f):
    """Enlarge the inverted set by the prime factors of f."""
    f = spec.coerce(f)
    if f.is_zero():
        raise ZeroElement("cannot invert zero")
    _unit, factors = spec.base.factor(f.num)
    return RingSpec(spec.base, set(spec.inverted) | set(factors))


@dataclass(frozen=True)
class UnitDescriptor:
    """unit = torsion * prod p^e over the inverted primes of a RingSpec."""

    torsion: object
    exponents: tuple  # sorted ((prime, exp), ...) with nonzero exps

    @staticmethod
    def make(spec, torsion, exps):
        items = tuple(sorted(((p, e) for p, e in exps.items() if e),
                             key=lambda kv: spec.base.sort_key(kv[0])))
        return UnitDescriptor(torsion, items)

    def exps(self):
        return dict(self.exponents)

    def mul(self, other, spec):
        base = spec.base
        if base.kind == "Z":
            tor = self.torsion * other.torsion
        else:
            tor = base.field.mul(self.torsion, other.torsion)
        exps = self.exps()
        for p, e in other.exponents:
            exps[p] = exps.get(p, 0) + e
        return UnitDescriptor.make(spec, tor, exps)

    def inv(self, spec):
        base = spec.base
        if base.kind == "Z":
            tor = self.torsion
        else:
            tor = base.field.inv(self.torsion)
        return UnitDescriptor.make(spec, tor, {p: -e for p, e in self.exponents})

    def to_element(self, spec):
        base = spec.base
        num = base.const(self.torsion) if base.kind != "Z" else self.torsion
        den = {}
        for p, e in self.exponents:
            if e > 0:
                for _ in range(e):
                    num = base.mul(num, p)
            else:
                den[p] = -e
        return spec.el(num, den)


def unit_decompose(u, spec):
    """Factor a unit as torsion times a product of inverted primes."""
    u = spec.coerce(u)
    base = spec.base
    if u.is_zero():
        raise NotAUnit("zero is not a unit")
    exps = {p: -e for p, e in u.den}
    num = u.num
    for p in spec.inverted:
        while base.divides(p, num):
            num = base.exact_div(num, p)
            exps[p] = exps.get(p, 0) + 1
    if base.kind == "Z":
        if num not in (1, -1):
            raise NotAUnit(f"{u!r} is not a unit of {spec!r}")
        torsion = num
    else:
        c = base.const_part(num)
        if c is None:
            raise NotAUnit(f"{u!r} is not a unit of {spec!r}")
        torsion = c
    return UnitDescriptor.make(spec, torsion, exps)


# convenient shared spec constructors

def ZZ(*inverted):
    return RingSpec(IntegerRing(), inverted)


def QQx(*inverted):
    return RingSpec(PolynomialRing(Rationals()), inverted)


def GFx(p, *inverted):
    return RingSpec(PolynomialRing(PrimeField(p)), inverted)
