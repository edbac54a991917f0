import itertools
import os
import random
from fractions import Fraction

import pytest

from superns.grassmann import GradedPoly, GrassmannElement, QQi
from superns.sewing import (
    ModuliElement,
    SewingError,
    sk_J,
    sk_permute,
    solver_spec,
    sw_boundary_map,
    sw_can_sew,
    sw_consistency_check,
    sw_gamma2,
    sw_solve,
    sw_t_series,
)
from superns.superseries import (
    CoordData,
    InfCoordData,
    SuperSeries,
    ss_compose,
    ss_exp_zero,
    ss_is_superconformal,
)

SEED = int(os.environ.get("SUPERNS_SEED", "20240901"))
HALF = Fraction(1, 2)
L_GEN = 6


def scalar(v):
    return GrassmannElement.scalar(L_GEN, v)


def gen(i):
    return GrassmannElement.generator(L_GEN, i)


def trivial_local():
    return CoordData(L_GEN, scalar(1))


def simple_moduli(n=2, z1=2):
    punctures = [(scalar(z1 + k), gen(k + 1)) for k in range(n - 1)]
    return ModuliElement(L_GEN, n, punctures, InfCoordData(L_GEN),
                         [trivial_local() for _ in range(n)])


# -- solver: trivial and closed-form cases --------------------------------


def test_solve_zero_inputs():
    out = sw_solve([], [], [], [], D=2, W=3)
    assert out.gamma.is_zero()
    assert all(p.is_zero() for k, p in out.psi.items() if k < 0)
    # pure lowering inputs would be reflected; with nothing, all slots vanish
    assert all(p.is_zero() for k, p in out.psi.items())


def test_gamma_degree2_A2_B2():
    out = sw_solve([2], [], [2], [], D=2, W=4)
    expected = sw_gamma2([2], [], [2], [], D=2)
    assert out.gamma == expected
    spec = out.gamma.spec
    want = (GradedPoly.symbol(spec, "A2") * GradedPoly.symbol(spec, "B2")
            * QQi(HALF) * GradedPoly.alpha(spec, -4))
    assert out.gamma == want


def test_gamma_degree2_N_M_threehalves():
    out = sw_solve([], [2], [], [2], D=2, W=4)
    spec = out.gamma.spec
    want = (GradedPoly.symbol(spec, "N2") * GradedPoly.symbol(spec, "M2")
            * QQi(Fraction(2, 3)) * GradedPoly.alpha(spec, -3))
    assert out.gamma == want
    assert out.gamma == sw_gamma2([], [2], [], [2], D=2)


def test_gamma_degree2_j1_vanishes():
    out = sw_solve([1], [], [1], [], D=2, W=4)
    assert out.gamma.is_zero()
    outm = sw_solve([], [1], [], [1], D=2, W=4)
    assert outm.gamma.is_zero()


@pytest.mark.parametrize("j", [1, 2, 3, 4])
def test_gamma2_matches_solver_single_modes(j):
    out = sw_solve([j], [], [j], [], D=2, W=max(4, j + 1))
    assert out.gamma.degree_part(2) == sw_gamma2([j], [], [j], [], D=2)
    outg = sw_solve([], [j], [], [j], D=2, W=max(4, j + 1))
    assert outg.gamma.degree_part(2) == sw_gamma2([], [j], [], [j], D=2)


def test_pure_lowering_inputs_reflect():
    out = sw_solve([2], [1], [], [], D=2, W=4)
    spec = out.gamma.spec
    assert out.gamma.is_zero()
    assert out.psi[Fraction(2)] == -GradedPoly.symbol(spec, "A2")
    assert out.psi[Fraction(1, 2)] == -GradedPoly.symbol(spec, "M1")
    assert all(p.is_zero() for k, p in out.psi.items() if k < 0)


def test_pure_raising_inputs_reflect():
    out = sw_solve([], [], [2], [1], D=2, W=4)
    spec = out.gamma.spec
    assert out.gamma.is_zero()
    # alpha conjugation moves the raising block through alpha0^(-L(0))
    assert out.psi[Fraction(-2)] == -GradedPoly.symbol(spec, "B2") * GradedPoly.alpha(spec, -4)
    assert out.psi[-HALF] == -GradedPoly.symbol(spec, "N1") * GradedPoly.alpha(spec, -1)


def test_gamma_multiplies_c_only():
    out = sw_solve([2, 3], [1], [2], [2], D=3, W=5)
    for k, p in out.psi.items():
        for (mono, _), _c in p.terms.items():
            names = {p.spec.names[i] for i, _e in mono}
            assert "c" not in names and "h" not in names


def test_solver_consistency_randomized():
    rng = random.Random(SEED)
    for _ in range(3):
        A = sorted(rng.sample([1, 2, 3], rng.randint(1, 2)))
        M = sorted(rng.sample([1, 2], 1))
        B = sorted(rng.sample([1, 2, 3], rng.randint(1, 2)))
        N = sorted(rng.sample([1, 2], 1))
        series = sw_solve(A, M, B, N, D=3, W=5)
        assert sw_consistency_check(series, A, M, B, N)


def test_t_series_zero_inputs():
    sums = sw_t_series(trivial_local(), InfCoordData(L_GEN), 4)
    assert all(s.is_zero() for s in sums)


def test_t_series_stabilizes_exactly():
    rng = random.Random(SEED + 1)
    for _ in range(3):
        a0 = scalar(rng.choice([1, 4]))
        A = {2: gen(1) * gen(2) * rng.randint(1, 2)}
        M = {1: gen(3)}
        B = {2: gen(4) * gen(5)}
        N = {1: gen(6)}
        local = CoordData(L_GEN, a0, A, M)
        inf = InfCoordData(L_GEN, B, N)
        sums = sw_t_series(local, inf, 8, D=3, W=5)
        assert sums[-1] == sums[-2]
        # the stabilized value matches a direct substitution of Gamma
        series = sw_solve([2], [1], [2], [1], D=3, W=5)
        direct = series.gamma.substitute(
            {"A2": A[2], "M1": M[1], "B2": B[2], "N1": N[1]},
            alpha_value=a0)
        assert sums[-1] == direct


# -- boundary map -----------------------------------------------------------


def test_boundary_map_trivial_collapse():
    ident = SuperSeries.identity(L_GEN)
    I = SuperSeries.inversion(L_GEN)
    out = sw_boundary_map(ident, I, window=(-6, 6))
    assert out.ev.coeff(1, 0) == scalar(1)
    assert out.od.coeff(0, 1) == scalar(1)
    nz = [k for k, c in out.ev.terms.items() if c and k != (1, 0)]
    assert not nz


def test_boundary_map_scaling_collapses_to_local():
    from superns.superseries import SFun

    a = scalar(4)
    H = SuperSeries(L_GEN, SFun.z_power(L_GEN, 1, a),
                    SFun.theta_term(L_GEN, 0, scalar(2)))
    I = SuperSeries.inversion(L_GEN)
    out = sw_boundary_map(H, I, window=(-6, 6))
    # with the trivial chart at infinity, I o I^(-1) cancels
    assert out.ev.coeff(1, 0) == scalar(4)
    assert out.od.coeff(0, 1) == scalar(2)


def test_boundary_map_matches_composition_chain():
    from superns.superseries import ss_exp_infinity, ss_invert

    local = ss_exp_zero(CoordData(L_GEN, scalar(4), {1: gen(1) * gen(2)}, {}), (-10, 10))
    inf = ss_exp_infinity(InfCoordData(L_GEN, {1: gen(3) * gen(4)}, {1: gen(5)}), (-10, 10))
    I = SuperSeries.inversion(L_GEN)
    out = sw_boundary_map(local, inf, window=(-4, 4))
    manual = ss_compose(local, ss_compose(I, ss_invert(inf, (-4, 4)), clip=(-4, 4)),
                        clip=(-4, 4))
    for key in set(out.ev.terms) | set(manual.ev.terms):
        if -4 <= key[0] <= 4:
            assert out.ev.coeff(*key) == manual.ev.coeff(*key)


def test_boundary_map_superconformal():
    rng = random.Random(SEED + 2)
    local = ss_exp_zero(CoordData(L_GEN, scalar(1), {1: gen(1) * gen(2)}, {1: gen(3)}), (-10, 10))
    inf = __import__("superns.superseries", fromlist=["ss_exp_infinity"]).ss_exp_infinity(
        InfCoordData(L_GEN, {1: gen(4) * gen(5)}, {1: gen(6)}), (-10, 10))
    out = sw_boundary_map(local, inf, window=(-4, 4))
    ok, residual = ss_is_superconformal(out)
    assert ok, residual


# -- moduli bookkeeping ------------------------------------------------------


def test_moduli_rejects_coincident_bodies():
    with pytest.raises(SewingError):
        ModuliElement(L_GEN, 3, [(scalar(2), gen(1)), (scalar(2), gen(2))],
                      InfCoordData(L_GEN), [trivial_local()] * 3)


def test_permutation_identity_and_involution():
    Q = ModuliElement(L_GEN, 3, [(scalar(2), gen(1)), (scalar(3), gen(2))],
                      InfCoordData(L_GEN),
                      [CoordData(L_GEN, scalar(1)), CoordData(L_GEN, scalar(4)),
                       CoordData(L_GEN, scalar(9))])
    assert sk_permute((0, 1), Q) == Q
    swapped = sk_permute((1, 0), Q)
    assert swapped.punctures[0] == Q.punctures[1]
    assert swapped.local[0] == Q.local[1]
    assert swapped.local[2] == Q.local[2]
    assert sk_permute((1, 0), swapped) == Q


def test_permutation_group_action():
    rng = random.Random(SEED + 3)
    n = 5
    Q = ModuliElement(
        L_GEN, n,
        [(scalar(k + 2), gen(k + 1)) for k in range(n - 1)],
        InfCoordData(L_GEN),
        [CoordData(L_GEN, scalar(j * j + 1)) for j in range(n)])
    for _ in range(10):
        s1 = list(range(n - 1))
        s2 = list(range(n - 1))
        rng.shuffle(s1)
        rng.shuffle(s2)
        comp = tuple(s1[s2[i]] for i in range(n - 1))
        lhs = sk_permute(tuple(s1), sk_permute(tuple(s2), Q))
        rhs = sk_permute(comp, Q)
        assert lhs == rhs


def test_J_involution_and_flip():
    Q = simple_moduli(3)
    JQ = sk_J(Q)
    assert JQ.branch == -Q.branch
    assert all(jt == -t for (_, t), (_, jt) in zip(Q.punctures, JQ.punctures))
    assert sk_J(JQ) == Q


def test_can_sew_far_punctures():
    Q1 = simple_moduli(2)
    Q2 = simple_moduli(1)
    assert sw_can_sew(Q1, 2, Q2)


def test_can_sew_rejects_crowded():
    # second factor with a movable puncture far outside the reachable disc
    Q2 = ModuliElement(L_GEN, 2, [(scalar(100), gen(1))], InfCoordData(L_GEN),
                       [trivial_local(), trivial_local()])
    Q1 = simple_moduli(2)
    assert not sw_can_sew(Q1, 2, Q2)


def test_can_sew_index_range():
    Q1 = simple_moduli(2)
    with pytest.raises(SewingError):
        sw_can_sew(Q1, 3, simple_moduli(1))
