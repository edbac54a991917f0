"""Formal (1,1)-variable superfunction calculus.

A map H(z, theta) = (zt, tht) is stored as a pair of SFun components,
each a finite Laurent table p(z) + theta*q(z) with Grassmann
coefficients and theta written on the left.  The module provides the
square-root derivative D, composition and inversion, the superconformal
test D zt = tht * D tht, and the exponential coordinate flows that
parametrize superconformal maps vanishing at zero and at infinity.

Window convention: every SFun is exact on [lo, hi] (None meaning
unbounded); coefficients outside that range are unknown, not zero.
Operations compute the largest window they can guarantee and raise
TruncationError when it becomes empty.
"""

from __future__ import annotations

from fractions import Fraction

from .grassmann import (
    GrassmannElement,
    NotInvertible,
    QQi,
    as_qqi,
)

NEG_INF = object()
POS_INF = object()

DEFAULT_WINDOW = (-12, 12)


class TruncationError(ValueError):
    pass


class DomainError(ValueError):
    pass


class ShapeError(ValueError):
    """Input series does not have the required leading shape."""


def binom(n, k: int) -> Fraction:
    """Generalized binomial coefficient for integer or Fraction n."""
    n = Fraction(n)
    out = Fraction(1)
    for i in range(k):
        out *= (n - i) / (i + 1)
    return out


def _lo_key(v):
    return float("-inf") if v is None else v


def _hi_key(v):
    return float("inf") if v is None else v


def _max_lo(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _min_hi(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class SFun:
    """One component of a (1,1)-variable map: p(z) + theta*q(z).

    terms maps (z_order, theta_exponent) -> GrassmannElement.
    """

    __slots__ = ("L", "terms", "lo", "hi")

    def __init__(self, L: int, terms=None, lo=None, hi=None):
        self.L = L
        self.terms = {}
        self.lo = lo
        self.hi = hi
        if terms:
            for (n, e), c in terms.items():
                if not c:
                    continue
                if lo is not None and n < lo:
                    continue
                if hi is not None and n > hi:
                    continue
                self.terms[(n, e)] = c

    # -- constructors --------------------------------------------------

    @classmethod
    def zero(cls, L: int) -> "SFun":
        return cls(L)

    @classmethod
    def const(cls, L: int, value) -> "SFun":
        c = value if isinstance(value, GrassmannElement) else GrassmannElement.scalar(L, value)
        return cls(L, {(0, 0): c})

    @classmethod
    def z_power(cls, L: int, n: int, coeff=1) -> "SFun":
        c = coeff if isinstance(coeff, GrassmannElement) else GrassmannElement.scalar(L, coeff)
        return cls(L, {(n, 0): c})

    @classmethod
    def theta_term(cls, L: int, n: int, coeff=1) -> "SFun":
        c = coeff if isinstance(coeff, GrassmannElement) else GrassmannElement.scalar(L, coeff)
        return cls(L, {(n, 1): c})

    # -- inspection ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, n: int, e: int) -> GrassmannElement:
        return self.terms.get((n, e), GrassmannElement(self.L))

    def support_min(self):
        """Lowest order at which a nonzero term may exist (NEG_INF if unknown)."""
        if self.lo is not None:
            return NEG_INF
        if not self.terms:
            return POS_INF
        return min(n for n, _ in self.terms)

    def support_max(self):
        if self.hi is not None:
            return POS_INF
        if not self.terms:
            return NEG_INF
        return max(n for n, _ in self.terms)

    def value_parity(self) -> int | None:
        """Parity of the values: 0 if even-valued, 1 if odd-valued, None mixed.

        theta itself is odd, so a theta-sector coefficient of parity p makes
        an overall contribution of parity p+1.
        """
        ps = set()
        for (n, e), c in self.terms.items():
            p = c.parity()
            if p is None:
                return None
            ps.add((p + e) & 1)
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    def __eq__(self, other):
        if not isinstance(other, SFun):
            return NotImplemented
        return self.L == other.L and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for (n, e) in sorted(self.terms):
            c = self.terms[(n, e)]
            t = "theta*" if e else ""
            bits.append(f"{t}({c!r})*z^{n}")
        w = f" on [{self.lo},{self.hi}]" if (self.lo is not None or self.hi is not None) else ""
        return " + ".join(bits) + w

    # -- linear operations ----------------------------------------------

    def with_window(self, lo, hi) -> "SFun":
        return SFun(self.L, self.terms, _max_lo(self.lo, lo), _min_hi(self.hi, hi))

    def __add__(self, other: "SFun") -> "SFun":
        lo = _max_lo(self.lo, other.lo)
        hi = _min_hi(self.hi, other.hi)
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
        return SFun(self.L, out, lo, hi)

    def __neg__(self) -> "SFun":
        return SFun(self.L, {k: -c for k, c in self.terms.items()}, self.lo, self.hi)

    def __sub__(self, other: "SFun") -> "SFun":
        return self + (-other)

    def scale_left(self, s: GrassmannElement | QQi | int | Fraction) -> "SFun":
        """Multiply by a scalar written to the left of theta."""
        if not isinstance(s, GrassmannElement):
            s = GrassmannElement.scalar(self.L, as_qqi(s))
        st = s.parity_twist()
        out = {}
        for (n, e), c in self.terms.items():
            v = (st if e else s) * c
            if v:
                out[(n, e)] = v
        return SFun(self.L, out, self.lo, self.hi)

    def scale_right(self, s) -> "SFun":
        if not isinstance(s, GrassmannElement):
            s = GrassmannElement.scalar(self.L, as_qqi(s))
        out = {}
        for (n, e), c in self.terms.items():
            v = c * s
            if v:
                out[(n, e)] = v
        return SFun(self.L, out, self.lo, self.hi)

    def shift(self, d: int) -> "SFun":
        lo = None if self.lo is None else self.lo + d
        hi = None if self.hi is None else self.hi + d
        return SFun(self.L, {(n + d, e): c for (n, e), c in self.terms.items()}, lo, hi)

    # -- product ---------------------------------------------------------

    def _support_bounds(self):
        """(smin, smax) as floats: orders where terms may exist."""
        inf = float("inf")
        if self.lo is None:
            smin = min((n for n, _ in self.terms), default=inf)
        else:
            smin = -inf
        if self.hi is None:
            smax = max((n for n, _ in self.terms), default=-inf)
        else:
            smax = inf
        return smin, smax

    def __mul__(self, other: "SFun") -> "SFun":
        if not isinstance(other, SFun):
            return NotImplemented
        # exactness window from unknown-tail contamination
        inf = float("inf")
        smin_f, smax_f = self._support_bounds()
        smin_g, smax_g = other._support_bounds()
        hi_res = min(inf if self.hi is None else self.hi + smin_g,
                     inf if other.hi is None else other.hi + smin_f)
        lo_res = max(-inf if self.lo is None else self.lo + smax_g,
                     -inf if other.lo is None else other.lo + smax_f)
        if lo_res > hi_res:
            raise TruncationError("product window is empty")
        lo = None if lo_res == -inf else int(lo_res)
        hi = None if hi_res == inf else int(hi_res)
        out: dict[tuple[int, int], GrassmannElement] = {}
        for (n1, e1), c1 in self.terms.items():
            for (n2, e2), c2 in other.terms.items():
                if e1 and e2:
                    continue
                n = n1 + n2
                if lo is not None and n < lo:
                    continue
                if hi is not None and n > hi:
                    continue
                if e1 == 0 and e2 == 1:
                    v = c1.parity_twist() * c2
                else:
                    v = c1 * c2
                if not v:
                    continue
                k = (n, e1 | e2)
                s = out.get(k)
                if s is None:
                    out[k] = v
                else:
                    s = s + v
                    if s:
                        out[k] = s
                    else:
                        del out[k]
        return SFun(self.L, out, lo, hi)

    # -- calculus ---------------------------------------------------------

    def d_z(self) -> "SFun":
        lo = None if self.lo is None else self.lo - 1
        hi = None if self.hi is None else self.hi - 1
        out = {}
        for (n, e), c in self.terms.items():
            if n == 0:
                continue
            out[(n - 1, e)] = c * n
        return SFun(self.L, out, lo, hi)

    def d_theta(self) -> "SFun":
        """Left derivative: d/dtheta (p + theta q) = q."""
        out = {(n, 0): c for (n, e), c in self.terms.items() if e == 1}
        return SFun(self.L, out, self.lo, self.hi)

    def D(self) -> "SFun":
        """D = d/dtheta + theta d/dz, so D(D(F)) = dF/dz."""
        out = {}
        for (n, e), c in self.terms.items():
            if e == 1:
                k, v = (n, 0), c
            else:
                if n == 0:
                    continue
                k, v = (n - 1, 1), c * n
            s = out.get(k)
            out[k] = v if s is None else s + v
        lo = None if self.lo is None else self.lo
        hi = None if self.hi is None else self.hi - 1
        return SFun(self.L, {k: v for k, v in out.items() if v}, lo, hi)

    # -- powers of an even-valued component --------------------------------

    def leading_invertible_order(self) -> int:
        """Lowest z-order whose theta-free coefficient has a nonzero body."""
        orders = [n for (n, e), c in self.terms.items() if e == 0 and c.body()]
        if not orders:
            raise NotInvertible("no invertible leading coefficient")
        return min(orders)

    def power(self, n, clip_lo=None, clip_hi=None) -> "SFun":
        """self**n for integer or half-integer n via leading-term factoring.

        Requires an invertible leading coefficient.  The expansion in the
        remainder terminates by window clipping (orders grow) and by
        nilpotency (soul and odd coefficients).
        """
        n = Fraction(n)
        if n.denominator == 1 and n >= 0:
            out = SFun.const(self.L, 1)
            for _ in range(int(n)):
                out = out * self
            return out
        k = self.leading_invertible_order()
        ck = self.terms[(k, 0)]
        if n.denominator == 1:
            kn = k * int(n)
            lead = ck ** int(n)
        else:
            if n.denominator != 2:
                raise ValueError("only integer and half-integer powers supported")
            if k % 2:
                raise DomainError("odd leading order under a half-integer power")
            kn = k * n
            if kn.denominator != 1:
                raise DomainError("fractional output order")
            kn = int(kn)
            root = ck.sqrt(1)
            lead = root ** n.numerator if n.numerator >= 0 else root.inverse() ** (-n.numerator)
        rest = SFun(self.L, {key: c for key, c in self.terms.items() if key != (k, 0)},
                    self.lo, self.hi)
        u = rest.scale_left(ck.inverse()).shift(-k)
        rhi = None if clip_hi is None else clip_hi - kn
        u0 = SFun(self.L, {key: c for key, c in u.terms.items() if key[0] <= 0}, u.lo, u.hi)
        up = SFun(self.L, {key: c for key, c in u.terms.items() if key[0] > 0}, u.lo, u.hi)
        # (1 + u0 + up)^n = sum_p C(n,p) u0^p (1+up)^(n-p); the u0 series
        # terminates by nilpotency, the up series by order growth.
        up_pows = [SFun.const(self.L, 1)]
        cut = False
        if not up.is_zero():
            if rhi is None:
                raise TruncationError("unbounded expansion needs a window")
            max_up = max(0, rhi + _reach_down(u0, self.L))
            while len(up_pows) <= max_up:
                p = up_pows[-1] * up
                if p.is_zero():
                    break
                up_pows.append(p)
            else:
                cut = True
        acc = SFun.zero(self.L)
        u0_pow = SFun.const(self.L, 1)
        p = 0
        while True:
            cp = binom(n, p)
            if cp != 0 or p == 0:
                inner = SFun.zero(self.L)
                for m, upm in enumerate(up_pows):
                    cm = binom(n - p, m)
                    if cm:
                        inner = inner + upm.scale_left(QQi(cm))
                acc = acc + (u0_pow * inner).scale_left(QQi(cp))
            p += 1
            u0_pow = u0_pow * u0
            if u0_pow.is_zero():
                break
            if p > 2 * self.L + 4:
                break
        out = acc.shift(kn).scale_left(lead)
        hi = _min_hi(out.hi, clip_hi) if cut else out.hi
        return SFun(self.L, out.terms, out.lo, hi)

    def sqrt(self, branch: int = 1, clip_lo=None, clip_hi=None) -> "SFun":
        h = self.power(Fraction(1, 2), clip_lo, clip_hi)
        return h if branch > 0 else -h

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, z: GrassmannElement, theta: GrassmannElement) -> GrassmannElement:
        """Exact evaluation via the body/soul Taylor split.

        Requires the series to be exactly supported (no unknown tails) or the
        caller to accept the stored window as the whole function.
        """
        body, soul = z.split()
        if not body and any(n < 0 for n, _ in self.terms):
            raise DomainError("evaluation at zero body with negative orders")
        powers: dict[int, GrassmannElement] = {}

        def zpow(n: int) -> GrassmannElement:
            if n in powers:
                return powers[n]
            if not soul:
                base = GrassmannElement.scalar(z.L, body ** n if n >= 0 else (QQi(1) / body) ** (-n))
                powers[n] = base
                return base
            acc = GrassmannElement(z.L)
            spow = GrassmannElement.scalar(z.L, 1)
            for k in range(0, z.L + 1):
                cb = binom(n, k)
                if cb:
                    bp = body ** (n - k) if n - k >= 0 else (QQi(1) / body) ** (k - n)
                    acc = acc + spow * QQi(cb) * bp
                spow = spow * soul
                if spow.is_zero():
                    break
            powers[n] = acc
            return acc

        total = GrassmannElement(z.L)
        for (n, e), c in self.terms.items():
            term = c * zpow(n)
            if e:
                term = theta * term
            total = total + term
        return total


def _reach_down(u0: SFun, L: int) -> int:
    """How far repeated powers of a nilpotent tail can reach below order 0."""
    if u0.is_zero():
        return 0
    d = max(0, -min(n for n, _ in u0.terms))
    return d * (L + 1)


class SuperSeries:
    """A formal map H(z,theta) = (zt, tht) with even zt and odd tht."""

    __slots__ = ("L", "ev", "od")

    def __init__(self, L: int, ev: SFun, od: SFun):
        self.L = L
        self.ev = ev
        self.od = od

    @classmethod
    def identity(cls, L: int) -> "SuperSeries":
        return cls(L, SFun.z_power(L, 1), SFun.theta_term(L, 0))

    @classmethod
    def inversion(cls, L: int) -> "SuperSeries":
        """I(z,theta) = (1/z, i*theta/z), the sewing boundary involution."""
        return cls(L, SFun.z_power(L, -1),
                   SFun.theta_term(L, -1, GrassmannElement.scalar(L, QQi(0, 1))))

    @classmethod
    def inversion_inverse(cls, L: int) -> "SuperSeries":
        """I^(-1)(z,theta) = (1/z, -i*theta/z)."""
        return cls(L, SFun.z_power(L, -1),
                   SFun.theta_term(L, -1, GrassmannElement.scalar(L, QQi(0, -1))))

    @classmethod
    def theta_flip(cls, L: int) -> "SuperSeries":
        """J(z,theta) = (z, -theta)."""
        return cls(L, SFun.z_power(L, 1), SFun.theta_term(L, 0, -1))

    def window(self):
        return (_max_lo(self.ev.lo, self.od.lo), _min_hi(self.ev.hi, self.od.hi))

    def __eq__(self, other):
        if not isinstance(other, SuperSeries):
            return NotImplemented
        return self.ev == other.ev and self.od == other.od

    def __repr__(self):
        return f"SuperSeries(zt={self.ev!r}, tht={self.od!r})"

    def check_parities(self) -> bool:
        return self.ev.value_parity() in (0, None) and self.od.value_parity() in (1, None)

    def negate_theta_output(self) -> "SuperSeries":
        """Postcompose with J: (zt, tht) -> (zt, -tht)."""
        return SuperSeries(self.L, self.ev, -self.od)


# ----------------------------------------------------------------------
# spec operations
# ----------------------------------------------------------------------


def ss_D(component: SFun) -> SFun:
    return component.D()


def ss_is_superconformal(H: SuperSeries) -> tuple[bool, SFun]:
    """Test D zt = tht * D tht; returns (flag, residual on its window)."""
    residual = H.ev.D() - H.od * H.od.D()
    return residual.is_zero(), residual


def ss_compose(H1: SuperSeries, H2: SuperSeries,
               clip: tuple[int, int] | None = None) -> SuperSeries:
    """Substitute H2 into H1 componentwise."""
    lo, hi = (clip if clip is not None else (None, None))
    Z, T = H2.ev, H2.od
    k = Z.leading_invertible_order()
    zpows: dict[int, SFun] = {}

    def zp(n: int) -> SFun:
        if n not in zpows:
            zpows[n] = Z.power(n, lo, hi)
        return zpows[n]

    reach = _reach_down_z(Z, H1.L)
    umax = max(0, max((n - k for (n, e) in Z.terms), default=0))

    def subst(C: SFun) -> SFun:
        acc = SFun.zero(H1.L)
        for (n, e), c in sorted(C.terms.items()):
            piece = zp(n).scale_left(c)
            if e:
                piece = T * piece
            acc = acc + piece
        # contamination from H1's unknown tails fed through powers of Z
        a, b = acc.lo, acc.hi
        if k > 0:
            if C.lo is not None:
                raise TruncationError(
                    "cannot compose an unknown low tail into a regular target")
            if C.hi is not None:
                b = _min_hi(b, k * (C.hi + 1) - 1 - reach)
        else:
            if C.hi is not None:
                if k + umax >= 0:
                    raise TruncationError(
                        "cannot compose an unknown high tail into this target")
                a = _max_lo(a, (C.hi + 1) * (k + umax) + 1)
            if C.lo is not None:
                b = _min_hi(b, k * (C.lo - 1) - 1 - reach)
        if (a is not None and b is not None and a > b):
            raise TruncationError("composition window is empty")
        return SFun(H1.L, acc.terms, a, b)

    if k == 0:
        raise TruncationError("composition target has order-zero leading term")
    return SuperSeries(H1.L, subst(H1.ev), subst(H1.od))


def _reach_down_z(Z: SFun, L: int) -> int:
    """How far nilpotent sub-leading terms of Z can pull orders back down."""
    k = Z.leading_invertible_order()
    d = max((k - n for (n, e) in Z.terms), default=0)
    return max(0, d) * (L + 1)


def ss_invert(H: SuperSeries, window: tuple[int, int] = DEFAULT_WINDOW,
              max_rounds: int = 200) -> SuperSeries:
    """Compositional inverse: ss_compose(H, result) = id on the window.

    Maps with leading order +1 are inverted by a linear-step iteration;
    leading order -1 is routed through the closed-form inversion I.
    """
    lo, hi = window
    k = H.ev.leading_invertible_order()
    if k == -1:
        G = ss_compose(H, SuperSeries.inversion(H.L), clip=window)
        Ginv = ss_invert(G, window, max_rounds)
        return ss_compose(SuperSeries.inversion(H.L), Ginv, clip=window)
    if k != 1:
        raise NotInvertible(f"leading order {k} is not invertible")
    a = H.ev.coeff(1, 0)
    p = H.ev.coeff(1, 1)  # theta-coefficient sitting at z^1 does not enter linear part
    b = H.od.coeff(0, 1)
    q0 = H.od.coeff(0, 0)
    # linear part at the origin: zt ~ a z + (theta z ... higher), tht ~ q0 + b theta
    if not a.body() or not b.body():
        raise NotInvertible("degenerate linear part")
    ainv = a.inverse()
    binv = b.inverse()
    K = SuperSeries(H.L, SFun.z_power(H.L, 1, ainv),
                    SFun.theta_term(H.L, 0, binv) + SFun.const(H.L, -(binv * q0)))
    ident = SuperSeries.identity(H.L)
    for _ in range(max_rounds):
        E = ss_compose(H, K, clip=window)
        rev = E.ev - ident.ev
        rod = E.od - ident.od
        if rev.is_zero() and rod.is_zero():
            return K
        dv = rev.scale_left(ainv)
        do = rod.scale_left(binv)
        K = SuperSeries(H.L, K.ev - dv, K.od - do)
    raise NotInvertible("inverse iteration did not terminate")


def ss_from_components(f: SFun, psi: SFun, branch: int = 1,
                       window: tuple[int, int] = DEFAULT_WINDOW) -> SuperSeries:
    """Superconformal map built from an even f and odd psi.

    Returns (f + theta*psi*r, psi + theta*r) with r*r = f' + psi*psi',
    the branch choosing the sign of the leading body root.
    """
    L = f.L
    if any(e for (_, e) in f.terms) or any(e for (_, e) in psi.terms):
        raise DomainError("components must be theta-free (1,0)-functions")
    S = f.d_z() + psi * psi.d_z()
    r = S.sqrt(branch, window[0], window[1])
    ev = f + _attach_theta(psi * r)
    od = psi + _attach_theta(r)
    H = SuperSeries(L, ev, od)
    return H


def _attach_theta(g: SFun) -> SFun:
    """Reinterpret a theta-free function g as theta*g."""
    out = {}
    for (n, e), c in g.terms.items():
        if e:
            raise ValueError("argument already carries theta")
        out[(n, 1)] = c
    return SFun(g.L, out, g.lo, g.hi)


# -- coordinate data ----------------------------------------------------


class CoordData:
    """Local superconformal coordinate data vanishing at zero.

    a0 even with nonzero body; A maps j >= 1 to even values (weight-j flow);
    M maps j >= 1 to the odd value attached to the half-index j - 1/2.
    """

    __slots__ = ("L", "a0", "A", "M", "branch")

    def __init__(self, L: int, a0: GrassmannElement, A=None, M=None, branch: int = 1):
        self.L = L
        self.a0 = a0
        self.A = dict(A or {})
        self.M = dict(M or {})
        self.branch = branch
        if not a0.body():
            raise DomainError("a0 needs a nonzero body")
        for j, v in self.A.items():
            if j < 1 or (v and v.parity() != 0):
                raise DomainError(f"A[{j}] must be even with j >= 1")
        for j, v in self.M.items():
            if j < 1 or (v and v.parity() != 1):
                raise DomainError(f"M[{j}] must be odd with j >= 1")

    def __eq__(self, other):
        return (isinstance(other, CoordData) and self.a0 == other.a0
                and _clean(self.A) == _clean(other.A)
                and _clean(self.M) == _clean(other.M)
                and self.branch == other.branch)

    def __repr__(self):
        return f"CoordData(a0={self.a0!r}, A={self.A!r}, M={self.M!r}, branch={self.branch:+d})"


class InfCoordData:
    """Coordinate data vanishing at infinity: (B, N) families, j >= 1."""

    __slots__ = ("L", "B", "N", "sk0_constraint")

    def __init__(self, L: int, B=None, N=None, sk0_constraint: bool = False):
        self.L = L
        self.B = dict(B or {})
        self.N = dict(N or {})
        self.sk0_constraint = sk0_constraint
        for j, v in self.B.items():
            if j < 1 or (v and v.parity() != 0):
                raise DomainError(f"B[{j}] must be even with j >= 1")
        for j, v in self.N.items():
            if j < 1 or (v and v.parity() != 1):
                raise DomainError(f"N[{j}] must be odd with j >= 1")
        if sk0_constraint:
            if self.B.get(1) or self.N.get(1):
                raise DomainError("one-tube constraint needs (B_1, N_1/2) = (0, 0)")

    def __eq__(self, other):
        return (isinstance(other, InfCoordData)
                and _clean(self.B) == _clean(other.B)
                and _clean(self.N) == _clean(other.N))

    def __repr__(self):
        return f"InfCoordData(B={self.B!r}, N={self.N!r})"


def _clean(d):
    return {k: v for k, v in d.items() if v}


# -- derivation actions (t = 1, s = 1 realizations) ----------------------


def _L_action(m: int, F: SFun) -> SFun:
    """The weight-m even superconformal derivation applied to one component."""
    out = {}
    half = Fraction(m + 1, 2)
    for (n, e), c in F.terms.items():
        if e == 0:
            if n == 0:
                continue
            v = c * (-n)
        else:
            v = c * QQi(-(n + half))
        if not v:
            continue
        k = (n + m, e)
        s = out.get(k)
        out[k] = v if s is None else s + v
    lo = None if F.lo is None else F.lo + m
    hi = None if F.hi is None else F.hi + m
    return SFun(F.L, {k: v for k, v in out.items() if v}, lo, hi)


def _G_action(m: int, F: SFun) -> SFun:
    """The odd derivation with half-index m + 1/2 applied to one component."""
    out = {}
    for (n, e), c in F.terms.items():
        if e == 0:
            if n == 0:
                continue
            k, v = (n + m, 1), c * n
        else:
            k, v = (n + m + 1, 0), -c
        if not v:
            continue
        s = out.get(k)
        out[k] = v if s is None else s + v
    lo = None if F.lo is None else F.lo + m
    hi = None if F.hi is None else F.hi + m
    return SFun(F.L, {k: v for k, v in out.items() if v}, lo, hi)


def _apply_flow(H: SuperSeries, terms: list, window, max_steps: int = 2000) -> SuperSeries:
    """exp of a sum of coefficient-weighted derivations, applied to H.

    terms is a list of (kind, m, coeff) with kind "L" or "G"; every listed
    derivation must move z-orders in one direction (all m >= 1 at zero, all
    m <= -1 at infinity), so window truncation plus nilpotency of the odd
    coefficients terminates the series exactly.
    """
    lo, hi = window

    def X(pair):
        ev, od = pair
        aev = SFun.zero(H.L)
        aod = SFun.zero(H.L)
        for kind, m, coeff in terms:
            act = _L_action if kind == "L" else _G_action
            aev = aev + act(m, ev).scale_left(coeff)
            aod = aod + act(m, od).scale_left(coeff)
        return (SFun(H.L, aev.terms, _max_lo(aev.lo, lo), _min_hi(aev.hi, hi)),
                SFun(H.L, aod.terms, _max_lo(aod.lo, lo), _min_hi(aod.hi, hi)))

    cur = (SFun(H.L, H.ev.terms, _max_lo(H.ev.lo, lo), _min_hi(H.ev.hi, hi)),
           SFun(H.L, H.od.terms, _max_lo(H.od.lo, lo), _min_hi(H.od.hi, hi)))
    acc = cur
    for k in range(1, max_steps + 1):
        nxt = X(cur)
        w = QQi(Fraction(1, k))
        cur = (nxt[0].scale_left(w), nxt[1].scale_left(w))
        if cur[0].is_zero() and cur[1].is_zero():
            return SuperSeries(H.L, acc[0], acc[1])
        acc = (acc[0] + cur[0], acc[1] + cur[1])
    raise TruncationError("flow exponential did not terminate on the window")


def ss_exp_zero(c: CoordData, window: tuple[int, int] = DEFAULT_WINDOW) -> SuperSeries:
    """Superconformal map vanishing at zero from its flow coordinates.

    First the scaling (z, theta) -> (a0 z, sqrt(a0) theta), then the single
    exponential of the combined weight-j flows, truncated to the window.
    The negative branch postcomposes with the theta flip.
    """
    lo, hi = window
    if hi < 1 or (lo is not None and lo > 0):
        raise TruncationError("window cannot hold the leading terms at zero")
    L = c.L
    root = c.a0.sqrt(1)
    base = SuperSeries(L, SFun.z_power(L, 1, c.a0), SFun.theta_term(L, 0, root))
    terms = []
    for j, v in sorted(c.A.items()):
        if v:
            terms.append(("L", j, v))
    for j, v in sorted(c.M.items()):
        if v:
            terms.append(("G", j - 1, v))  # half-index j - 1/2
    H = _apply_flow(base, terms, (None, hi)) if terms else base
    ev = SFun(L, H.ev.terms, None, hi)   # flows only raise orders: exact below
    od = SFun(L, H.od.terms, None, hi)
    H = SuperSeries(L, ev, od)
    if c.branch < 0:
        H = H.negate_theta_output()
    return H


def ss_exp_infinity(c: InfCoordData, window: tuple[int, int] = DEFAULT_WINDOW) -> SuperSeries:
    """Superconformal map vanishing at infinity from its flow coordinates.

    The exponential of minus the combined weight-(-j) flows applied to the
    base point (1/z, i theta / z).
    """
    lo, hi = window
    if lo > -1:
        raise TruncationError("window cannot hold the leading terms at infinity")
    L = c.L
    base = SuperSeries.inversion(L)
    terms = []
    for j, v in sorted(c.B.items()):
        if v:
            terms.append(("L", -j, -v))
    for j, v in sorted(c.N.items()):
        if v:
            terms.append(("G", -j, -v))  # half-index -j + 1/2
    H = _apply_flow(base, terms, (lo, None)) if terms else base
    ev = SFun(L, H.ev.terms, lo, None)   # flows only lower orders: exact above
    od = SFun(L, H.od.terms, lo, None)
    return SuperSeries(L, ev, od)


def ss_extract_zero(H: SuperSeries, j_max: int | None = None,
                    window: tuple[int, int] | None = None) -> CoordData:
    """Order-by-order read-off inverting ss_exp_zero on the window.

    The unknowns are solved in increasing flow order, interleaving the odd
    family at half-integer steps; each step is a linear read against the
    invertible leading coefficient.
    """
    L = H.L
    ok, residual = ss_is_superconformal(H)
    if not ok:
        raise ShapeError(f"input is not superconformal; residual {residual!r}")
    for (n, e) in H.ev.terms:
        if n < 1:
            raise ShapeError("series does not vanish at zero")
    for (n, e) in H.od.terms:
        if n < 0 or (n == 0 and e == 0):
            raise ShapeError("odd component has the wrong leading shape")
    a0 = H.ev.coeff(1, 0)
    if not a0.body():
        raise NotInvertible("leading coefficient has zero body")
    root = a0.sqrt(1)
    g0 = H.od.coeff(0, 1)
    if g0 == root:
        branch = 1
        W = H
    elif g0 == -root:
        branch = -1
        W = H.negate_theta_output()
    else:
        raise ShapeError("leading theta coefficient is not a branch of sqrt(a0)")
    hi = window[1] if window else _hi_key(H.ev.hi)
    if hi == float("inf"):
        hi = DEFAULT_WINDOW[1]
    hi = int(hi)
    if j_max is None:
        j_max = hi - 1
    a0_inv = a0.inverse()
    root_inv = root.inverse()
    A: dict[int, GrassmannElement] = {}
    M: dict[int, GrassmannElement] = {}
    wwin = (0, hi)
    for j in range(1, j_max + 1):
        cur = ss_exp_zero(CoordData(L, a0, A, M, 1), wwin)
        # odd unknown at half step j - 1/2: read the theta-free slot z^j of tht
        r = W.od.coeff(j, 0) - cur.od.coeff(j, 0)
        if r:
            M[j] = -(r * root_inv)  # responds as -sqrt(a0) * M_(j-1/2)
            cur = ss_exp_zero(CoordData(L, a0, A, M, 1), wwin)
        # even unknown at step j: read slot z^(j+1) of zt
        r = W.ev.coeff(j + 1, 0) - cur.ev.coeff(j + 1, 0)
        if r:
            A[j] = -(r * a0_inv)  # responds as -a0 * A_j
    out = CoordData(L, a0, _clean(A), _clean(M), branch)
    # confirm the read-off reproduces the normalized input on the window
    back = ss_exp_zero(CoordData(L, a0, _clean(A), _clean(M), 1), wwin)
    for (n, e), c in W.ev.terms.items():
        if 0 <= n <= hi and back.ev.coeff(n, e) != c:
            raise ShapeError(f"read-off failed to reproduce slot z^{n} of zt")
    for (n, e), c in W.od.terms.items():
        if 0 <= n <= hi and back.od.coeff(n, e) != c:
            raise ShapeError(f"read-off failed to reproduce slot z^{n} of tht")
    return out


def ss_evaluate(H: SuperSeries, z: GrassmannElement,
                theta: GrassmannElement) -> tuple[GrassmannElement, GrassmannElement]:
    if theta and theta.parity() != 1:
        raise DomainError("theta value must be odd")
    if z.parity() not in (0,):
        raise DomainError("z value must be even")
    return H.ev.evaluate(z, theta), H.od.evaluate(z, theta)
