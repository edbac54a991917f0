import os
import random
from fractions import Fraction

import pytest

from superns.grassmann import (
    DimensionMismatch,
    GradedPoly,
    GrassmannElement,
    NotExact,
    NotInvertible,
    ParamSpec,
    QQi,
    gr_inverse,
    gr_mul,
    gr_split,
    gr_sqrt,
    poly_mul,
)

SEED = int(os.environ.get("SUPERNS_SEED", "20240901"))


def G(L=4):
    return [GrassmannElement.generator(L, i) for i in range(1, L + 1)]


def scalar(v, L=4):
    return GrassmannElement.scalar(L, v)


def random_element(rng, L, max_terms=4, odd_only=False, even_only=False):
    e = GrassmannElement(L, {})
    for _ in range(rng.randint(1, max_terms)):
        size = rng.randint(0, L)
        if odd_only:
            size = size | 1
            if size > L:
                continue
        if even_only:
            size = size & ~1
        idx = rng.sample(range(1, L + 1), size)
        coeff = QQi(Fraction(rng.randint(-5, 5), rng.randint(1, 4)),
                    Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
        e = e + GrassmannElement.monomial(L, sorted(idx), coeff)
    return e


def test_generator_product_is_ordered_monomial():
    z = G()
    assert z[0] * z[1] == GrassmannElement.monomial(4, [1, 2])


def test_generators_anticommute():
    z = G()
    assert z[1] * z[0] == -GrassmannElement.monomial(4, [1, 2])
    assert (z[0] * z[0]).is_zero()


def test_distributive_expansion():
    z = G()
    lhs = (scalar(1) + z[0]) * (scalar(1) + z[1])
    expected = scalar(1) + z[0] + z[1] + GrassmannElement.monomial(4, [1, 2])
    assert lhs == expected


def test_split_body_soul():
    z = G()
    a = scalar(3) + z[0] * z[1]
    body, soul = gr_split(a)
    assert body == QQi(3)
    assert soul == z[0] * z[1]
    assert gr_split(GrassmannElement(4))[0] == QQi(0)
    assert gr_split(z[0]) == (QQi(0), z[0])


def test_soul_nilpotent():
    rng = random.Random(SEED)
    for _ in range(20):
        a = random_element(rng, 4)
        s = a.soul()
        p = s
        for _ in range(4):
            p = p * s
        assert p.is_zero()


def test_inverse_identity_scalar_and_soul():
    z = G()
    assert gr_inverse(scalar(1)) == scalar(1)
    assert gr_inverse(scalar(2)) == scalar(Fraction(1, 2))
    a = scalar(1) + z[0] * z[1]
    assert gr_inverse(a) == scalar(1) - z[0] * z[1]


def test_inverse_times_input_is_one():
    rng = random.Random(SEED + 1)
    for _ in range(25):
        a = random_element(rng, 6)
        if not a.body():
            a = a + 1
        assert gr_mul(a, gr_inverse(a)) == scalar(1, 6)


def test_zero_body_not_invertible():
    z = G()
    with pytest.raises(NotInvertible):
        gr_inverse(z[0] * z[1])


def test_sqrt_branches_of_one():
    assert gr_sqrt(scalar(1), 1) == scalar(1)
    assert gr_sqrt(scalar(1), -1) == scalar(-1)


def test_sqrt_with_soul():
    z = G()
    a = scalar(4) + z[0] * z[1]
    r = gr_sqrt(a, 1)
    assert r == scalar(2) + z[0] * z[1] * QQi(Fraction(1, 4))
    assert r * r == a


def test_sqrt_principal_branch_of_minus_one():
    assert gr_sqrt(scalar(-1), 1) == scalar(QQi(0, 1))


def test_sqrt_squares_back_randomized():
    rng = random.Random(SEED + 2)
    squares = [1, 4, Fraction(9, 4), QQi(0, 2), QQi(3, 4), QQi(-4), Fraction(25, 16)]
    for _ in range(25):
        body = rng.choice(squares)
        a = scalar(body, 6) + random_element(rng, 6, even_only=True).soul()
        for branch in (1, -1):
            r = gr_sqrt(a, branch)
            assert r * r == a


def test_sqrt_rejects_odd_and_bodyless():
    z = G()
    with pytest.raises(Exception):
        gr_sqrt(z[0], 1)
    with pytest.raises(NotInvertible):
        gr_sqrt(z[0] * z[1], 1)


def test_sqrt_inexact_raises():
    with pytest.raises(NotExact):
        gr_sqrt(scalar(2), 1)


def test_graded_commutativity_randomized():
    rng = random.Random(SEED + 3)
    for _ in range(30):
        L = rng.randint(2, 8)
        a = random_element(rng, L, odd_only=rng.random() < 0.5)
        b = random_element(rng, L, odd_only=rng.random() < 0.5)
        pa, pb = a.parity(), b.parity()
        if pa is None or pb is None:
            continue
        sign = -1 if (pa and pb) else 1
        assert gr_mul(a, b) == gr_mul(b, a) * sign


def test_associativity_randomized():
    rng = random.Random(SEED + 4)
    for _ in range(20):
        L = rng.randint(2, 6)
        a, b, c = (random_element(rng, L) for _ in range(3))
        assert (a * b) * c == a * (b * c)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        gr_mul(scalar(1, 2), scalar(1, 3))


# -- GradedPoly ---------------------------------------------------------


def sewing_spec(cap=3):
    symbols = []
    for j in (1, 2, 3):
        symbols.append((f"A{j}", 0, True))
        symbols.append((f"B{j}", 0, True))
        symbols.append((f"M{2*j-1}/2", 1, True))
        symbols.append((f"N{2*j-1}/2", 1, True))
    symbols.append(("c", 0, False))
    return ParamSpec(symbols, cap)


def test_odd_symbol_squares_to_zero():
    spec = sewing_spec()
    m = GradedPoly.symbol(spec, "M3/2")
    assert poly_mul(m, m).is_zero()


def test_even_symbols_commute():
    spec = sewing_spec()
    a = GradedPoly.symbol(spec, "A1")
    b = GradedPoly.symbol(spec, "B2")
    assert poly_mul(a, b) == poly_mul(b, a)


def test_odd_symbols_anticommute():
    spec = sewing_spec()
    n = GradedPoly.symbol(spec, "N3/2")
    m = GradedPoly.symbol(spec, "M3/2")
    assert poly_mul(n, m) == -poly_mul(m, n)


def test_degree_cap_idempotent():
    spec = sewing_spec(cap=2)
    a = GradedPoly.symbol(spec, "A1") + GradedPoly.scalar(spec, 1)
    p = a
    for _ in range(4):
        p = poly_mul(p, a)
    assert p == p.truncate()
    # multiplying then truncating equals truncating then multiplying
    q = poly_mul(a, a)
    assert poly_mul(q, a).truncate(2) == poly_mul(q.truncate(2), a).truncate(2)


def test_poly_mul_associative_randomized():
    rng = random.Random(SEED + 5)
    spec = sewing_spec()
    names = list(spec.names)
    for _ in range(15):
        polys = []
        for _ in range(3):
            p = GradedPoly.scalar(spec, rng.randint(-2, 2))
            for _ in range(rng.randint(1, 3)):
                p = p + GradedPoly.symbol(spec, rng.choice(names), rng.randint(-3, 3))
            polys.append(p)
        a, b, c = polys
        assert poly_mul(poly_mul(a, b), c) == poly_mul(a, poly_mul(b, c))


def test_uncapped_symbol_survives_powers():
    spec = sewing_spec(cap=2)
    c = GradedPoly.symbol(spec, "c")
    p = poly_mul(poly_mul(c, c), poly_mul(c, c))
    assert not p.is_zero()


def test_alpha_exponent_tracking():
    spec = sewing_spec()
    p = GradedPoly.alpha(spec, -3)  # alpha0^(-3/2)
    q = GradedPoly.alpha(spec, 1)
    assert poly_mul(p, q) == GradedPoly.alpha(spec, -2)


def test_substitute_grassmann_values():
    spec = sewing_spec()
    L = 4
    z = G(L)
    p = poly_mul(GradedPoly.symbol(spec, "A1"), GradedPoly.symbol(spec, "B1"))
    vals = {"A1": z[0] * z[1], "B1": z[2] * z[3]}
    got = p.substitute(vals)
    assert got == z[0] * z[1] * z[2] * z[3]


def test_schema_mismatch_rejected():
    s1 = sewing_spec(3)
    s2 = sewing_spec(2)
    with pytest.raises(Exception):
        poly_mul(GradedPoly.scalar(s1, 1), GradedPoly.scalar(s2, 1))
