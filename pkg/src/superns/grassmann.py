"""Exact arithmetic in finite-generator Grassmann algebras.

Elements live in the algebra on anticommuting generators z1..zL over the
Gaussian rationals.  Terms are keyed by bitmasks (bit i-1 set means zi is a
factor), so the empty mask holds the body and every other mask is soul.
All operations are pure; elements are immutable by convention.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable


class GrassmannError(ValueError):
    pass


class DimensionMismatch(GrassmannError):
    pass


class NotInvertible(GrassmannError):
    pass


class NotExact(GrassmannError):
    """Raised when a result (e.g. a square root) leaves the exact field."""


class QQi:
    """A Gaussian rational re + im*i with exact Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    def __add__(self, other):
        other = as_qqi(other)
        return QQi(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_qqi(other)
        return QQi(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return as_qqi(other) - self

    def __mul__(self, other):
        other = as_qqi(other)
        return QQi(self.re * other.re - self.im * other.im,
                   self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_qqi(other)
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division by zero in QQi")
        return QQi((self.re * other.re + self.im * other.im) / d,
                   (self.im * other.re - self.re * other.im) / d)

    def __rtruediv__(self, other):
        return as_qqi(other) / self

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.re == other and self.im == 0
        if isinstance(other, QQi):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __pow__(self, n: int):
        if n < 0:
            return (QQi(1) / self) ** (-n)
        out = QQi(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self):
        return QQi(self.re, -self.im)

    def abs2(self):
        return self.re * self.re + self.im * self.im

    def __repr__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"

    def sqrt(self):
        """Principal square root, exact or NotExact.

        Principal means the argument of the result lies in (-pi/2, pi/2],
        matching the branch cut arg in (-pi, pi].
        """
        if not self:
            return QQi(0)
        if self.im == 0:
            if self.re > 0:
                return QQi(_frac_sqrt(self.re))
            return QQi(0, _frac_sqrt(-self.re))
        # solve (a+bi)^2 = re+im*i:  a^2 = (|q|+re)/2, b = im/(2a)
        mod2 = self.abs2()
        mod = _frac_sqrt(mod2)
        a2 = (mod + self.re) / 2
        a = _frac_sqrt(a2)
        if a == 0:
            raise NotExact(f"no exact square root for {self!r}")
        b = self.im / (2 * a)
        # principal branch: real part > 0 (a > 0 already by _frac_sqrt)
        return QQi(a, b)


ZERO = QQi(0)
ONE = QQi(1)
I = QQi(0, 1)


def as_qqi(x) -> QQi:
    if isinstance(x, QQi):
        return x
    if isinstance(x, (int, Fraction)):
        return QQi(x)
    if isinstance(x, complex):
        if x.imag == int(x.imag) and x.real == int(x.real):
            return QQi(int(x.real), int(x.imag))
        raise NotExact(f"refusing inexact complex {x}")
    raise TypeError(f"cannot coerce {type(x).__name__} to QQi")


def _frac_sqrt(q: Fraction) -> Fraction:
    if q < 0:
        raise NotExact(f"negative radicand {q}")
    pn = _isqrt_exact(q.numerator)
    pd = _isqrt_exact(q.denominator)
    return Fraction(pn, pd)


def _isqrt_exact(n: int) -> int:
    import math

    r = math.isqrt(n)
    if r * r != n:
        raise NotExact(f"{n} is not a perfect square")
    return r


def _merge_sign(a: int, b: int) -> int:
    """Parity sign from sorting the concatenation of index sets a, b.

    Counts pairs (i in a, j in b) with i > j; each is one transposition.
    """
    sign = 1
    bb = b
    while bb:
        low = bb & -bb
        # generators of a strictly above this bit of b
        if bin(a & ~(low | (low - 1))).count("1") & 1:
            sign = -sign
        bb ^= low
    return sign


class GrassmannElement:
    """A finite QQi-linear combination of products of generators.

    terms maps bitmask -> QQi with no stored zeros; num_generators bounds
    the admissible bits.
    """

    __slots__ = ("L", "terms")

    def __init__(self, num_generators: int, terms: dict[int, QQi] | None = None):
        self.L = num_generators
        self.terms = terms if terms is not None else {}

    # -- constructors -------------------------------------------------

    @classmethod
    def scalar(cls, L: int, value) -> "GrassmannElement":
        v = as_qqi(value)
        return cls(L, {0: v} if v else {})

    @classmethod
    def generator(cls, L: int, i: int) -> "GrassmannElement":
        if not 1 <= i <= L:
            raise GrassmannError(f"generator index {i} outside 1..{L}")
        return cls(L, {1 << (i - 1): ONE})

    @classmethod
    def monomial(cls, L: int, indices: Iterable[int], coeff=1) -> "GrassmannElement":
        mask = 0
        for i in indices:
            if not 1 <= i <= L:
                raise GrassmannError(f"generator index {i} outside 1..{L}")
            bit = 1 << (i - 1)
            if mask & bit:
                return cls(L, {})
            mask |= bit
        v = as_qqi(coeff)
        return cls(L, {mask: v} if v else {})

    # -- structure ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def body(self) -> QQi:
        return self.terms.get(0, ZERO)

    def soul(self) -> "GrassmannElement":
        return GrassmannElement(self.L, {m: c for m, c in self.terms.items() if m})

    def split(self) -> tuple[QQi, "GrassmannElement"]:
        return self.body(), self.soul()

    def even_part(self) -> "GrassmannElement":
        return GrassmannElement(
            self.L, {m: c for m, c in self.terms.items() if bin(m).count("1") % 2 == 0})

    def odd_part(self) -> "GrassmannElement":
        return GrassmannElement(
            self.L, {m: c for m, c in self.terms.items() if bin(m).count("1") % 2 == 1})

    def parity(self) -> int | None:
        """0 for even, 1 for odd, None for mixed or zero-with-no-terms."""
        if not self.terms:
            return 0
        ps = {bin(m).count("1") & 1 for m in self.terms}
        return ps.pop() if len(ps) == 1 else None

    def parity_twist(self) -> "GrassmannElement":
        """even part minus odd part (the sign picked up passing one odd symbol)."""
        return GrassmannElement(
            self.L,
            {m: (c if bin(m).count("1") % 2 == 0 else -c) for m, c in self.terms.items()})

    # -- ring operations ----------------------------------------------

    def _check(self, other: "GrassmannElement"):
        if self.L != other.L:
            raise DimensionMismatch(f"generator counts differ: {self.L} vs {other.L}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, QQi)):
            other = GrassmannElement.scalar(self.L, other)
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return GrassmannElement(self.L, out)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement(self.L, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, QQi)):
            other = GrassmannElement.scalar(self.L, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QQi)):
            v = as_qqi(other)
            if not v:
                return GrassmannElement(self.L, {})
            return GrassmannElement(self.L, {m: c * v for m, c in self.terms.items()})
        self._check(other)
        out: dict[int, QQi] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                if ma & mb:
                    continue
                c = ca * cb
                if _merge_sign(ma, mb) < 0:
                    c = -c
                m = ma | mb
                s = out.get(m)
                if s is None:
                    out[m] = c
                else:
                    s = s + c
                    if s:
                        out[m] = s
                    else:
                        del out[m]
        return GrassmannElement(self.L, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, QQi)):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QQi)):
            other = GrassmannElement.scalar(self.L, other)
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        return self.L == other.L and self.terms == other.terms

    def __hash__(self):
        return hash((self.L, frozenset(self.terms.items())))

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = GrassmannElement.scalar(self.L, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inverse(self) -> "GrassmannElement":
        """Exact inverse via the terminating geometric series in the soul."""
        b, s = self.split()
        if not b:
            raise NotInvertible("zero body")
        binv = ONE / b
        u = s * binv  # nilpotent
        acc = GrassmannElement.scalar(self.L, 1)
        term = GrassmannElement.scalar(self.L, 1)
        for k in range(1, self.L + 1):
            term = term * u
            if term.is_zero():
                break
            acc = acc + (-term if k % 2 else term)
        return acc * binv

    def sqrt(self, branch: int = 1) -> "GrassmannElement":
        """Square root of an even element with invertible body.

        branch +1 takes the principal body root, -1 its negative.  The soul
        part comes from the terminating binomial series.
        """
        if self.parity() != 0:
            raise GrassmannError("square root needs an even element")
        b, s = self.split()
        if not b:
            raise NotInvertible("zero body has no invertible square root")
        r = b.sqrt()
        if branch < 0:
            r = -r
        u = s * (ONE / b)  # nilpotent, even
        # (1+u)^(1/2) = sum C(1/2, k) u^k, terminates
        acc = GrassmannElement.scalar(self.L, 1)
        term = GrassmannElement.scalar(self.L, 1)
        coeff = Fraction(1)
        half = Fraction(1, 2)
        for k in range(1, self.L + 1):
            coeff = coeff * (half - (k - 1)) / k
            term = term * u
            if term.is_zero():
                break
            acc = acc + term * QQi(coeff)
        return acc * r

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms):
            c = self.terms[m]
            if m == 0:
                parts.append(repr(c))
            else:
                gens = "".join(f"z{i+1}" for i in range(self.L) if m >> i & 1)
                parts.append(f"{c!r}*{gens}")
        return " + ".join(parts)


# Spec-facing functional aliases ---------------------------------------


def gr_mul(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    return a * b


def gr_split(a: GrassmannElement) -> tuple[QQi, GrassmannElement]:
    return a.split()


def gr_inverse(a: GrassmannElement) -> GrassmannElement:
    return a.inverse()


def gr_sqrt(a: GrassmannElement, branch: int = 1) -> GrassmannElement:
    return a.sqrt(branch)


# ----------------------------------------------------------------------
# Graded polynomial ring with a distinguished Laurent symbol
# ----------------------------------------------------------------------


class SchemaMismatch(GrassmannError):
    pass


class ParamSpec:
    """Declaration of the formal symbols of a GradedPoly ring.

    Each symbol carries a parity (0 even, 1 odd) and a capped flag; the
    total degree of capped symbols in any monomial is bounded by
    degree_cap.  Uncapped symbols (central charge, highest weight) are
    exempt from truncation.  The distinguished Laurent symbol alpha0 is
    tracked separately with half-integer exponents.
    """

    __slots__ = ("names", "parity", "capped", "index", "degree_cap")

    def __init__(self, symbols: list[tuple[str, int, bool]], degree_cap: int):
        self.names = tuple(s[0] for s in symbols)
        self.parity = tuple(s[1] for s in symbols)
        self.capped = tuple(s[2] for s in symbols)
        self.index = {n: i for i, n in enumerate(self.names)}
        self.degree_cap = degree_cap
        if len(self.index) != len(self.names):
            raise SchemaMismatch("duplicate symbol names")

    def __eq__(self, other):
        return (isinstance(other, ParamSpec)
                and self.names == other.names
                and self.parity == other.parity
                and self.capped == other.capped
                and self.degree_cap == other.degree_cap)

    def __hash__(self):
        return hash((self.names, self.parity, self.capped, self.degree_cap))


# a monomial is a tuple of (symbol_index, exponent), sorted by index;
# a term key is (monomial, alpha0_half_exponent)
Monomial = tuple[tuple[int, int], ...]
TermKey = tuple[Monomial, int]


class GradedPoly:
    """Sparse polynomial over QQi in graded symbols times alpha0^(k/2).

    Odd symbols square to zero and anticommute (Koszul signs); capped
    symbols are truncated at spec.degree_cap total degree.
    """

    __slots__ = ("spec", "terms")

    def __init__(self, spec: ParamSpec, terms: dict[TermKey, QQi] | None = None):
        self.spec = spec
        self.terms = terms if terms is not None else {}

    @classmethod
    def scalar(cls, spec: ParamSpec, value, alpha_half: int = 0) -> "GradedPoly":
        v = as_qqi(value)
        return cls(spec, {((), alpha_half): v} if v else {})

    @classmethod
    def symbol(cls, spec: ParamSpec, name: str, coeff=1) -> "GradedPoly":
        i = spec.index[name]
        v = as_qqi(coeff)
        return cls(spec, {(((i, 1),), 0): v} if v else {})

    @classmethod
    def alpha(cls, spec: ParamSpec, half_exponent: int, coeff=1) -> "GradedPoly":
        v = as_qqi(coeff)
        return cls(spec, {((), half_exponent): v} if v else {})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _capped_degree(self, mono: Monomial) -> int:
        cap = self.spec.capped
        return sum(e for i, e in mono if cap[i])

    def monomial_parity(self, mono: Monomial) -> int:
        par = self.spec.parity
        return sum(e * par[i] for i, e in mono) & 1

    def parity(self) -> int | None:
        if not self.terms:
            return 0
        ps = {self.monomial_parity(m) for m, _ in self.terms}
        return ps.pop() if len(ps) == 1 else None

    def parity_twist(self) -> "GradedPoly":
        """even part minus odd part (sign from passing one odd symbol)."""
        return GradedPoly(
            self.spec,
            {k: (-c if self.monomial_parity(k[0]) else c) for k, c in self.terms.items()})

    def _check(self, other: "GradedPoly"):
        if self.spec != other.spec:
            raise SchemaMismatch("incompatible parameter tables")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, QQi)):
            other = GradedPoly.scalar(self.spec, other)
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k)
            if s is None:
                out[k] = c
            else:
                s = s + c
                if s:
                    out[k] = s
                else:
                    del out[k]
        return GradedPoly(self.spec, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedPoly(self.spec, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, QQi)):
            other = GradedPoly.scalar(self.spec, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _mul_mono(self, m1: Monomial, m2: Monomial) -> tuple[Monomial, int] | None:
        """Merge two monomials; returns (monomial, sign) or None if it dies."""
        par = self.spec.parity
        odd1 = [i for i, e in m1 if par[i]]
        odd2 = [i for i, e in m2 if par[i]]
        sign = 1
        if odd1 and odd2:
            if set(odd1) & set(odd2):
                return None  # odd square
            # inversions: odd letters of m2 passing greater-indexed odds of m1
            for j in odd2:
                crossings = sum(1 for i in odd1 if i > j)
                if crossings & 1:
                    sign = -sign
        d: dict[int, int] = {}
        for i, e in m1:
            d[i] = d.get(i, 0) + e
        for i, e in m2:
            d[i] = d.get(i, 0) + e
        for i, e in d.items():
            if par[i] and e > 1:
                return None
        mono = tuple(sorted(d.items()))
        return mono, sign

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QQi)):
            v = as_qqi(other)
            if not v:
                return GradedPoly(self.spec, {})
            return GradedPoly(self.spec, {k: c * v for k, c in self.terms.items()})
        self._check(other)
        cap = self.spec.degree_cap
        out: dict[TermKey, QQi] = {}
        for (m1, a1), c1 in self.terms.items():
            for (m2, a2), c2 in other.terms.items():
                merged = self._mul_mono(m1, m2)
                if merged is None:
                    continue
                mono, sign = merged
                if self._capped_degree(mono) > cap:
                    continue
                c = c1 * c2
                if sign < 0:
                    c = -c
                key = (mono, a1 + a2)
                s = out.get(key)
                if s is None:
                    out[key] = c
                else:
                    s = s + c
                    if s:
                        out[key] = s
                    else:
                        del out[key]
        return GradedPoly(self.spec, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, QQi)):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QQi)):
            other = GradedPoly.scalar(self.spec, other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return self.spec == other.spec and self.terms == other.terms

    def __hash__(self):
        return hash((self.spec, frozenset(self.terms.items())))

    def truncate(self, cap: int | None = None) -> "GradedPoly":
        cap = self.spec.degree_cap if cap is None else cap
        return GradedPoly(
            self.spec,
            {k: c for k, c in self.terms.items() if self._capped_degree(k[0]) <= cap})

    def degree_part(self, d: int) -> "GradedPoly":
        """Terms whose capped-symbol total degree is exactly d."""
        return GradedPoly(
            self.spec,
            {k: c for k, c in self.terms.items() if self._capped_degree(k[0]) == d})

    def coefficient(self, assignments: dict[str, int]) -> "GradedPoly":
        """Extract the coefficient of prod(sym^exp); other symbols untouched."""
        idx = {self.spec.index[n]: e for n, e in assignments.items()}
        out: dict[TermKey, QQi] = {}
        for (mono, a), c in self.terms.items():
            d = dict(mono)
            if all(d.get(i, 0) == e for i, e in idx.items()):
                rest = tuple((i, e) for i, e in mono if i not in idx)
                out[(rest, a)] = c
        return GradedPoly(self.spec, out)

    def substitute(self, values: dict[str, GrassmannElement],
                   alpha_value: GrassmannElement | None = None,
                   alpha_branch: int = 1) -> GrassmannElement:
        """Evaluate at Grassmann values; symbols not listed must be absent.

        alpha0 needs an invertible even value whose square root is exact when
        half-exponents occur.
        """
        some = next(iter(values.values()), None)
        if some is None and alpha_value is None:
            raise GrassmannError("no values supplied")
        L = some.L if some is not None else alpha_value.L
        total = GrassmannElement(L, {})
        root = None
        inv = None
        for (mono, a), c in self.terms.items():
            acc = GrassmannElement.scalar(L, c)
            for i, e in mono:
                name = self.spec.names[i]
                if name not in values:
                    raise GrassmannError(f"no value for symbol {name}")
                acc = acc * (values[name] ** e)
            if a != 0:
                if alpha_value is None:
                    raise GrassmannError("alpha0 exponent present but no value")
                if a % 2:
                    if root is None:
                        root = alpha_value.sqrt(alpha_branch)
                    acc = acc * (root ** a)
                else:
                    if a > 0:
                        acc = acc * (alpha_value ** (a // 2))
                    else:
                        if inv is None:
                            inv = alpha_value.inverse()
                        acc = acc * (inv ** (-a // 2))
            total = total + acc
        return total

    def __repr__(self):
        if not self.terms:
            return "0"
        names = self.spec.names
        parts = []
        for (mono, a) in sorted(self.terms, key=lambda k: (len(k[0]), k)):
            c = self.terms[(mono, a)]
            bits = [repr(c)]
            if a:
                bits.append(f"a0^({a}/2)" if a % 2 else f"a0^{a//2}")
            for i, e in mono:
                bits.append(names[i] if e == 1 else f"{names[i]}^{e}")
            parts.append("*".join(bits))
        return " + ".join(parts)


def poly_mul(p: GradedPoly, q: GradedPoly) -> GradedPoly:
    return p * q
