"""The Neveu-Schwarz Lie superalgebra and its truncated representations.

Generators are tagged tuples: ("L", n) with integer n, ("G", r) with
half-odd-integer r (a Fraction), and ("c",).  Coefficients live in a
GradedPoly ring so the central charge and highest weight can stay formal.
"""

from __future__ import annotations

from fractions import Fraction

from .grassmann import GradedPoly, GrassmannElement, ParamSpec, QQi, as_qqi
from .superseries import SFun

LGen = tuple
HALF = Fraction(1, 2)


class CapError(ValueError):
    pass


def L(n: int):
    return ("L", int(n))


def G(r):
    r = Fraction(r)
    if r.denominator != 2:
        raise ValueError(f"G index must be half-odd, got {r}")
    return ("G", r)


C_GEN = ("c",)


def gen_parity(g) -> int:
    return 1 if g[0] == "G" else 0


def gen_weight(g) -> Fraction:
    """L(0)-eigenvalue shift: L(-j) raises by j, G(-r) by r."""
    if g[0] == "c":
        return Fraction(0)
    return Fraction(-g[1])


def gen_rank(g):
    """Total PBW order: raising block (G then L, magnitude decreasing),
    diagonal L(0) and c, lowering block mirrored."""
    if g[0] == "c":
        return (1, 1, Fraction(0))
    idx = Fraction(g[1])
    if idx < 0:
        return (0, 0 if g[0] == "G" else 1, idx if g[0] == "G" else idx)
    if idx == 0:
        return (1, 0, Fraction(0))
    return (2, 0 if g[0] == "L" else 1, idx)


class NSExpression:
    """Finite combination of basis generators with GradedPoly coefficients."""

    __slots__ = ("spec", "terms")

    def __init__(self, spec: ParamSpec, terms=None):
        self.spec = spec
        self.terms = {}
        if terms:
            for g, p in terms.items():
                if p:
                    self.terms[g] = p

    @classmethod
    def single(cls, spec: ParamSpec, g, coeff=1) -> "NSExpression":
        p = coeff if isinstance(coeff, GradedPoly) else GradedPoly.scalar(spec, coeff)
        return cls(spec, {g: p})

    def __add__(self, other):
        out = dict(self.terms)
        for g, p in other.terms.items():
            s = out.get(g)
            q = p if s is None else s + p
            if q:
                out[g] = q
            elif s is not None:
                del out[g]
        return NSExpression(self.spec, out)

    def __neg__(self):
        return NSExpression(self.spec, {g: -p for g, p in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, coeff) -> "NSExpression":
        p = coeff if isinstance(coeff, GradedPoly) else GradedPoly.scalar(self.spec, coeff)
        return NSExpression(self.spec, {g: p * q for g, q in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, NSExpression) and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({p!r})*{g}" for g, p in sorted(self.terms.items(),
                                                            key=lambda t: gen_rank(t[0])))


def _basis_bracket(spec: ParamSpec, a, b) -> NSExpression:
    if a[0] == "c" or b[0] == "c":
        return NSExpression(spec)
    if a[0] == "L" and b[0] == "L":
        m, n = a[1], b[1]
        out = NSExpression.single(spec, L(m + n), m - n) if m != n else NSExpression(spec)
        if m + n == 0:
            cc = Fraction(m ** 3 - m, 12)
            if cc:
                out = out + NSExpression.single(spec, C_GEN, cc)
        return out
    if a[0] == "G" and b[0] == "L":
        r, n = a[1], b[1]
        coeff = r - Fraction(n, 2)
        if coeff:
            return NSExpression.single(spec, G(r + n), coeff)
        return NSExpression(spec)
    if a[0] == "L" and b[0] == "G":
        return -_basis_bracket(spec, b, a)
    # G with G: symmetric bracket
    r, s = a[1], b[1]
    out = NSExpression.single(spec, L(r + s), 2)
    if r + s == 0:
        cc = (r * r - Fraction(1, 4)) / 3
        if cc:
            out = out + NSExpression.single(spec, C_GEN, cc)
    return out


def ns_bracket(X: NSExpression, Y: NSExpression) -> NSExpression:
    """Bilinear superbracket; odd coefficients pick up Koszul signs when
    they move past odd generators."""
    spec = X.spec
    out = NSExpression(spec)
    for a, p in X.terms.items():
        for b, q in Y.terms.items():
            qp = q.parity()
            if qp is None:
                raise ValueError("coefficient of mixed parity in bracket")
            sign = -1 if (qp and gen_parity(a)) else 1
            coeff = p * q
            if sign < 0:
                coeff = -coeff
            br = _basis_bracket(spec, a, b)
            out = out + br.scaled(coeff)
    return out


# ----------------------------------------------------------------------
# differential-operator representation on the span of theta^m z^n
# ----------------------------------------------------------------------


class DiffOp:
    """One of the displayed superderivations, or a signed composition."""

    def __init__(self, kind: str, index, t=1, s=1):
        self.kind = kind
        self.t = Fraction(t)
        self.s = as_qqi(s)
        if self.kind == "G":
            r = Fraction(index)
            if r.denominator != 2:
                raise ValueError("G index must be half-odd")
            self.n = int(r - HALF)
            if self.t.denominator != 1:
                raise ValueError("non-integer t leaves the Laurent span")
        else:
            self.n = int(index)
        if not self.s:
            raise ValueError("s must be nonzero")

    def parity(self) -> int:
        return 1 if self.kind == "G" else 0

    def apply(self, F: SFun) -> SFun:
        out = {}
        if self.kind == "L":
            n, t = self.n, self.t
            for (k, e), c in F.terms.items():
                if e == 0:
                    if k == 0:
                        continue
                    key, v = (k + n, 0), c * (-k)
                else:
                    key, v = (k + n, 1), c * QQi(-(k + Fraction(n - 1, 2) + t))
                if v:
                    s = out.get(key)
                    out[key] = v if s is None else s + v
        else:
            n, t, s_ = self.n, int(self.t), self.s
            s_inv = QQi(1) / s_
            for (k, e), c in F.terms.items():
                if e == 0:
                    if k == 0:
                        continue
                    key, v = (k + n - t + 1, 1), c * (s_inv * k)
                else:
                    key, v = (k + n + t, 0), c * (-s_)
                if v:
                    s = out.get(key)
                    out[key] = v if s is None else s + v
        return SFun(F.L, {k: v for k, v in out.items() if v})


def ns_diffop(kind: str, index, t=1, s=1) -> DiffOp:
    return DiffOp(kind, index, t, s)


def diffop_commutator_matches(op1: DiffOp, op2: DiffOp, target: NSExpression,
                              t=1, s=1, L_gen: int = 0, k_range=range(-5, 6)) -> bool:
    """Check [op1, op2] = target as operators on basis monomials.

    The target expression must have numeric coefficients and no central
    term (the representation has c = 0).
    """
    ops = []
    for g, p in target.terms.items():
        if g == C_GEN:
            continue  # the representation has c = 0
        coeff = p.terms.get(((), 0), QQi(0))
        if len(p.terms) > (1 if coeff else 0):
            raise ValueError("target must be numeric")
        ops.append((coeff, DiffOp(g[0], g[1], t, s)))
    sign = -1 if (op1.parity() and op2.parity()) else 1
    for k in k_range:
        for e in (0, 1):
            F = SFun(L_gen, {(k, e): GrassmannElement.scalar(L_gen, 1)})
            lhs = op1.apply(op2.apply(F)) - op2.apply(op1.apply(F)).scale_left(QQi(sign))
            rhs = SFun.zero(L_gen)
            for coeff, op in ops:
                rhs = rhs + op.apply(F).scale_left(coeff)
            if lhs != rhs:
                return False
    return True


# ----------------------------------------------------------------------
# enveloping algebra words and PBW normal ordering
# ----------------------------------------------------------------------


class EnvelopingElement:
    """Combination of PBW-ordered generator words with GradedPoly coefficients.

    Words whose raising or lowering weight exceeds weight_cap are dropped
    and the drop is counted, never silent.
    """

    __slots__ = ("spec", "weight_cap", "terms", "dropped")

    def __init__(self, spec: ParamSpec, weight_cap, terms=None, dropped: int = 0):
        self.spec = spec
        self.weight_cap = Fraction(weight_cap)
        self.terms = {}
        self.dropped = dropped
        if terms:
            for w, p in terms.items():
                if not p:
                    continue
                if self._exceeds(w):
                    self.dropped += 1
                    continue
                self.terms[w] = p

    def _exceeds(self, word) -> bool:
        up = sum((-gen_weight(g) for g in word if gen_weight(g) < 0), Fraction(0))
        down = sum((gen_weight(g) for g in word if gen_weight(g) > 0), Fraction(0))
        return max(up, down) > self.weight_cap

    def __add__(self, other):
        out = dict(self.terms)
        for w, p in other.terms.items():
            s = out.get(w)
            q = p if s is None else s + p
            if q:
                out[w] = q
            elif s is not None:
                del out[w]
        return EnvelopingElement(self.spec, self.weight_cap, out,
                                 self.dropped + other.dropped)

    def __eq__(self, other):
        return isinstance(other, EnvelopingElement) and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({p!r})*{'.'.join(map(str, w))  or '1'}"
                          for w, p in self.terms.items())


def _is_pbw(word) -> bool:
    for a, b in zip(word, word[1:]):
        ra, rb = gen_rank(a), gen_rank(b)
        if ra > rb:
            return False
        if ra == rb and a[0] == "G":
            return False
    return True


def ns_normal_order(word, coeff, spec: ParamSpec, weight_cap=Fraction(10 ** 6)) -> EnvelopingElement:
    """Rewrite a generator word to PBW order by repeated bracket insertion.

    word is a tuple of generators, coeff a GradedPoly (or scalar).  Equal
    odd generators square to the bracket half, L(2r).
    """
    if not isinstance(coeff, GradedPoly):
        coeff = GradedPoly.scalar(spec, coeff)
    pending = [(tuple(word), coeff)]
    done = EnvelopingElement(spec, weight_cap)
    while pending:
        w, p = pending.pop()
        if not p:
            continue
        if _is_pbw(w):
            done = done + EnvelopingElement(spec, weight_cap, {w: p})
            continue
        for i in range(len(w) - 1):
            a, b = w[i], w[i + 1]
            ra, rb = gen_rank(a), gen_rank(b)
            if ra > rb or (ra == rb and a[0] == "G"):
                head, tail = w[:i], w[i + 2:]
                if a == b:
                    # G(r)G(r) = L(2r): half the symmetric bracket, never central
                    pending.append((head + (L(int(2 * a[1])),) + tail, p))
                    break
                sign = -1 if (gen_parity(a) and gen_parity(b)) else 1
                pending.append((head + (b, a) + tail, p * sign))
                br = _basis_bracket(spec, a, b)
                for g, q in br.terms.items():
                    pending.append((head + (g,) + tail, p * q))
                break
    return done


# ----------------------------------------------------------------------
# weight-truncated Verma modules
# ----------------------------------------------------------------------


def word_level(word) -> Fraction:
    return sum((gen_weight(g) for g in word), Fraction(0))


def word_max_raise(word) -> Fraction:
    """Highest intermediate weight gain when the word acts right-to-left.

    A column of level l is acted on exactly by the truncated module iff
    l + word_max_raise(word) stays within the weight cap.
    """
    running = Fraction(0)
    peak = Fraction(0)
    for g in reversed(word):
        running += gen_weight(g)
        if running > peak:
            peak = running
    return peak


class VermaModule:
    """Verma module with (possibly formal) central charge and highest weight.

    Basis: PBW raising words of level <= weight_cap applied to the
    highest-weight vector.  Vectors are maps word -> GradedPoly; the action
    of any generator is computed by bracket recursion and memoized.
    """

    def __init__(self, spec: ParamSpec, c_value: GradedPoly, h_value: GradedPoly,
                 weight_cap):
        self.spec = spec
        self.c_value = c_value
        self.h_value = h_value
        self.cap = Fraction(weight_cap)
        self.one = GradedPoly.scalar(spec, 1)
        self._memo: dict = {}
        self.basis = self._enumerate_basis()

    def _raising_gens(self):
        gens = []
        j = 1
        while j <= self.cap:
            gens.append(L(-j))
            j += 1
        r = HALF
        while r <= self.cap:
            gens.append(G(-r))
            r += 1
        return sorted(gens, key=gen_rank)

    def _enumerate_basis(self):
        gens = self._raising_gens()
        out = []

        def extend(word, level, start):
            out.append(word)
            for i in range(start, len(gens)):
                g = gens[i]
                lv = level + gen_weight(g)
                if lv > self.cap:
                    continue
                extend(word + (g,), lv, i if g[0] == "L" else i + 1)

        extend((), Fraction(0), 0)
        return sorted(out, key=lambda w: (word_level(w), w))

    def level(self, word) -> Fraction:
        return word_level(word)

    def basis_at(self, level) -> list:
        level = Fraction(level)
        return [w for w in self.basis if self.level(w) == level]

    def apply_gen(self, g, word) -> dict:
        key = (g, word)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        out: dict = {}
        if g == C_GEN:
            out = {word: self.c_value}
        elif not word:
            kind, idx = g[0], g[1]
            if idx > 0:
                out = {}
            elif kind == "L" and idx == 0:
                out = {(): self.h_value}
            elif self.level((g,)) <= self.cap:
                out = {(g,): self.one}
        else:
            b, rest = word[0], word[1:]
            if gen_weight(g) > 0 and gen_rank(g) <= gen_rank(b):
                if g == b and g[0] == "G":
                    # odd square: g g rest = L(2r) rest
                    out = self.apply_gen(L(int(2 * g[1])), rest)
                else:
                    new = (g,) + word
                    out = {new: self.one} if self.level(new) <= self.cap else {}
            else:
                sign = -1 if (gen_parity(g) and gen_parity(b)) else 1
                acc: dict = {}
                inner = self.apply_gen(g, rest)
                for w2, p in inner.items():
                    ps = p if sign > 0 else -p
                    for w3, q in self.apply_gen(b, w2).items():
                        _vec_add(acc, w3, q * ps)
                br = _basis_bracket(self.spec, g, b)
                for g2, q in br.terms.items():
                    for w3, p in self.apply_gen(g2, rest).items():
                        _vec_add(acc, w3, p * q)
                out = {w: p for w, p in acc.items() if p}
        self._memo[key] = out
        return out

    def act(self, g, vec: dict) -> dict:
        out: dict = {}
        for w, p in vec.items():
            for w2, q in self.apply_gen(g, w).items():
                _vec_add(out, w2, q * p)
        return {w: p for w, p in out.items() if p}

    def act_word(self, gens, vec: dict) -> dict:
        for g in reversed(gens):
            vec = self.act(g, vec)
        return vec

    def highest_weight_vector(self) -> dict:
        return {(): self.one}


def _vec_add(acc: dict, key, val):
    s = acc.get(key)
    v = val if s is None else s + val
    if v:
        acc[key] = v
    elif s is not None:
        del acc[key]


def ns_verma_act(X: EnvelopingElement, M: VermaModule) -> dict:
    """Matrix of X on the weight-truncated basis: maps column word to the
    image vector (word -> GradedPoly)."""
    if X.spec != M.spec:
        raise CapError("enveloping element and module use different rings")
    out = {}
    for col in M.basis:
        img: dict = {}
        for word, p in X.terms.items():
            vec = M.act_word(word, {col: M.one})
            for w, q in vec.items():
                _vec_add(img, w, q * p)
        out[col] = {w: q for w, q in img.items() if q}
    return out
