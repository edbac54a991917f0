import os
import random
from fractions import Fraction

import pytest

from superns.grassmann import GrassmannElement, QQi
from superns.superseries import (
    CoordData,
    InfCoordData,
    SFun,
    ShapeError,
    SuperSeries,
    ss_compose,
    ss_evaluate,
    ss_exp_infinity,
    ss_exp_zero,
    ss_extract_zero,
    ss_from_components,
    ss_invert,
    ss_is_superconformal,
)

SEED = int(os.environ.get("SUPERNS_SEED", "20240901"))
L = 6


def scalar(v):
    return GrassmannElement.scalar(L, v)


def gen(i):
    return GrassmannElement.generator(L, i)


def soul_even(rng):
    i, j = rng.sample(range(1, L + 1), 2)
    return GrassmannElement.monomial(L, sorted([i, j]), rng.randint(1, 3))


def soul_odd(rng):
    ix = rng.sample(range(1, L + 1), rng.choice([1, 3]))
    return GrassmannElement.monomial(L, sorted(ix), Fraction(rng.randint(1, 4), rng.randint(1, 3)))


def random_coord_data(rng, jmax=4):
    a0 = scalar(rng.choice([1, 4, Fraction(9, 4)])) + soul_even(rng)
    A = {j: soul_even(rng) * rng.randint(-2, 2) for j in rng.sample(range(1, jmax + 1), 2)}
    M = {j: soul_odd(rng) for j in rng.sample(range(1, jmax + 1), 2)}
    return CoordData(L, a0, A, M, branch=1)


def random_inf_data(rng, jmax=4):
    B = {j: soul_even(rng) * rng.randint(-2, 2) for j in rng.sample(range(1, jmax + 1), 2)}
    N = {j: soul_odd(rng) for j in rng.sample(range(1, jmax + 1), 2)}
    return InfCoordData(L, B, N)


# -- D operator ---------------------------------------------------------


def test_D_on_theta_and_z():
    th = SFun.theta_term(L, 0)
    assert th.D() == SFun.const(L, 1)
    z = SFun.z_power(L, 1)
    assert z.D() == SFun.theta_term(L, 0)


@pytest.mark.parametrize("n", range(-6, 7))
def test_D_squared_is_ddz_on_basis(n):
    for e in (0, 1):
        F = SFun(L, {(n, e): scalar(1)})
        assert F.D().D() == F.d_z()


# -- composition and inversion ------------------------------------------


def test_compose_with_identity():
    rng = random.Random(SEED)
    H = ss_exp_zero(random_coord_data(rng), (-12, 12))
    K = ss_compose(H, SuperSeries.identity(L), clip=(-12, 12))
    for (n, e), c in H.ev.terms.items():
        assert K.ev.coeff(n, e) == c
    for (n, e), c in H.od.terms.items():
        assert K.od.coeff(n, e) == c


def test_inversion_squared_is_theta_flip():
    I = SuperSeries.inversion(L)
    J = ss_compose(I, I)
    assert J == SuperSeries.theta_flip(L)
    assert ss_compose(J, J) == SuperSeries.identity(L)


def test_invert_identity():
    K = ss_invert(SuperSeries.identity(L), (-8, 8))
    assert K.ev.coeff(1, 0) == scalar(1)
    assert K.od.coeff(0, 1) == scalar(1)
    assert len(K.ev.terms) == 1 and len(K.od.terms) == 1


def test_invert_scaling():
    a = scalar(4)
    H = SuperSeries(L, SFun.z_power(L, 1, a), SFun.theta_term(L, 0, scalar(2)))
    K = ss_invert(H, (-8, 8))
    assert K.ev.coeff(1, 0) == scalar(Fraction(1, 4))
    assert K.od.coeff(0, 1) == scalar(Fraction(1, 2))
    E = ss_compose(H, K, clip=(-6, 6))
    assert E.ev.coeff(1, 0) == scalar(1)
    assert E.od.coeff(0, 1) == scalar(1)


def test_invert_inversion_map():
    I = SuperSeries.inversion(L)
    K = ss_invert(I, (-8, 8))
    assert K.ev.coeff(-1, 0) == scalar(1)
    assert K.od.coeff(-1, 1) == scalar(QQi(0, -1))
    # composition back to the identity on a safe window
    E = ss_compose(I, K, clip=(-4, 4))
    assert E.ev.coeff(1, 0) == scalar(1)
    assert E.od.coeff(0, 1) == scalar(1)
    assert all(c.is_zero() for k, c in E.ev.terms.items() if k != (1, 0))


def test_invert_random_flow_roundtrip():
    rng = random.Random(SEED + 1)
    for _ in range(5):
        H = ss_exp_zero(random_coord_data(rng, jmax=3), (-10, 10))
        K = ss_invert(H, (-10, 10))
        E = ss_compose(H, K, clip=(-5, 5))
        assert E.ev.coeff(1, 0) == scalar(1)
        for (n, e), c in E.ev.terms.items():
            assert ((n, e) == (1, 0)) == (not c.is_zero()) or not c
        for (n, e), c in E.od.terms.items():
            if (n, e) != (0, 1):
                assert not c


# -- superconformality ----------------------------------------------------


def test_identity_is_superconformal():
    ok, _ = ss_is_superconformal(SuperSeries.identity(L))
    assert ok


def test_inversion_is_superconformal():
    ok, _ = ss_is_superconformal(SuperSeries.inversion(L))
    assert ok


def test_bad_scaling_fails_with_residual():
    H = SuperSeries(L, SFun.z_power(L, 1), SFun.theta_term(L, 0, scalar(2)))
    ok, residual = ss_is_superconformal(H)
    assert not ok
    assert residual.coeff(0, 1) == scalar(-3)


def test_compose_preserves_superconformal():
    rng = random.Random(SEED + 2)
    for _ in range(5):
        H1 = ss_exp_zero(random_coord_data(rng, jmax=3), (-12, 12))
        H2 = ss_exp_zero(random_coord_data(rng, jmax=3), (-12, 12))
        K = ss_compose(H1, H2, clip=(-6, 6))
        ok, residual = ss_is_superconformal(K)
        assert ok, residual


# -- from_components -------------------------------------------------------


def test_from_components_identity():
    H = ss_from_components(SFun.z_power(L, 1), SFun.zero(L), 1, (-8, 8))
    assert H.ev.coeff(1, 0) == scalar(1)
    assert H.od.coeff(0, 1) == scalar(1)


def test_from_components_scaling():
    H = ss_from_components(SFun.z_power(L, 1, scalar(4)), SFun.zero(L), 1, (-8, 8))
    assert H.ev.coeff(1, 0) == scalar(4)
    assert H.od.coeff(0, 1) == scalar(2)


def test_from_components_constant_odd():
    mu = gen(1)
    H = ss_from_components(SFun.z_power(L, 1), SFun.const(L, 1).scale_left(mu), 1, (-8, 8))
    # (z + theta*mu, mu + theta)
    assert H.ev.coeff(1, 0) == scalar(1)
    assert H.ev.coeff(0, 1) == mu
    assert H.od.coeff(0, 0) == mu
    assert H.od.coeff(0, 1) == scalar(1)
    ok, residual = ss_is_superconformal(H)
    assert ok, residual


def test_from_components_always_superconformal():
    rng = random.Random(SEED + 3)
    for _ in range(5):
        f = SFun.z_power(L, 1, scalar(rng.choice([1, 4])) + soul_even(rng))
        for n in range(2, 5):
            f = f + SFun.z_power(L, n, soul_even(rng) * rng.randint(-2, 2))
        psi = SFun.zero(L)
        for n in range(1, 4):
            psi = psi + SFun.z_power(L, n, soul_odd(rng))
        H = ss_from_components(f, psi, rng.choice([1, -1]), (-10, 10))
        ok, residual = ss_is_superconformal(H)
        assert ok, residual


# -- exponential flows -----------------------------------------------------


def test_exp_zero_trivial():
    H = ss_exp_zero(CoordData(L, scalar(1)), (-12, 12))
    assert H.ev == SFun.z_power(L, 1).with_window(None, 12)
    assert H.od.coeff(0, 1) == scalar(1)


def test_exp_zero_scaling_rule():
    H = ss_exp_zero(CoordData(L, scalar(4)), (-12, 12))
    assert H.ev.coeff(1, 0) == scalar(4)
    assert H.od.coeff(0, 1) == scalar(2)


def test_exp_zero_is_superconformal_and_shaped():
    rng = random.Random(SEED + 4)
    for _ in range(8):
        H = ss_exp_zero(random_coord_data(rng), (-12, 12))
        ok, residual = ss_is_superconformal(H)
        assert ok, residual
        assert all(n >= 1 for (n, e) in H.ev.terms)
        assert all(n >= 1 or (n, e) == (0, 1) for (n, e) in H.od.terms)


def test_exp_zero_negative_branch_is_theta_flip_postcomposition():
    rng = random.Random(SEED + 5)
    c = random_coord_data(rng)
    plus = ss_exp_zero(c, (-12, 12))
    minus = ss_exp_zero(CoordData(L, c.a0, c.A, c.M, -1), (-12, 12))
    assert minus == plus.negate_theta_output()
    ok, _ = ss_is_superconformal(minus)
    assert ok


def test_exp_infinity_trivial():
    H = ss_exp_infinity(InfCoordData(L), (-12, 12))
    assert H == SuperSeries.inversion(L)


def test_exp_infinity_leading_coefficients():
    rng = random.Random(SEED + 6)
    for _ in range(8):
        H = ss_exp_infinity(random_inf_data(rng), (-12, 12))
        assert H.ev.coeff(-1, 0) == scalar(1)
        assert H.od.coeff(-1, 1) == scalar(QQi(0, 1))
        # displayed shape: zt has orders <= -1, tht theta-free part orders <= -1
        assert all(n <= -1 for (n, e) in H.ev.terms)
        assert all(n <= -1 or (n, e) == (0, 0) for (n, e) in H.od.terms)


def test_exp_infinity_superconformal():
    rng = random.Random(SEED + 7)
    for _ in range(8):
        H = ss_exp_infinity(random_inf_data(rng), (-12, 12))
        ok, residual = ss_is_superconformal(H)
        assert ok, residual


# -- extraction round trip --------------------------------------------------


def test_extract_identity():
    c = ss_extract_zero(SuperSeries.identity(L), j_max=4, window=(-12, 12))
    assert c.a0 == scalar(1)
    assert not c.A and not c.M
    assert c.branch == 1


def test_extract_scaling():
    H = ss_exp_zero(CoordData(L, scalar(4)), (-12, 12))
    c = ss_extract_zero(H, j_max=4)
    assert c.a0 == scalar(4)
    assert not c.A and not c.M


def test_extract_roundtrip_randomized():
    rng = random.Random(SEED + 8)
    for _ in range(8):
        c = random_coord_data(rng)
        H = ss_exp_zero(c, (-12, 12))
        got = ss_extract_zero(H, j_max=5)
        assert got == c


def test_extract_negative_branch():
    rng = random.Random(SEED + 9)
    base = random_coord_data(rng)
    c = CoordData(L, base.a0, base.A, base.M, -1)
    H = ss_exp_zero(c, (-12, 12))
    got = ss_extract_zero(H, j_max=5)
    assert got.branch == -1
    assert got == c


def test_extract_rejects_non_superconformal():
    H = SuperSeries(L, SFun.z_power(L, 1), SFun.theta_term(L, 0, scalar(2)))
    with pytest.raises(ShapeError):
        ss_extract_zero(H)


# -- evaluation ---------------------------------------------------------------


def test_evaluate_identity():
    z0 = scalar(2) + gen(1) * gen(2)
    th0 = gen(3)
    got = ss_evaluate(SuperSeries.identity(L), z0, th0)
    assert got == (z0, th0)


def test_evaluate_square_with_soul():
    H = SuperSeries(L, SFun.z_power(L, 2), SFun.theta_term(L, 0))
    z0 = scalar(1) + gen(1) * gen(2)
    v, _ = ss_evaluate(H, z0, GrassmannElement(L))
    assert v == scalar(1) + gen(1) * gen(2) * 2


def test_evaluate_inversion_at_two():
    v, t = ss_evaluate(SuperSeries.inversion(L), scalar(2), GrassmannElement(L))
    assert v == scalar(Fraction(1, 2))
    assert t.is_zero()
