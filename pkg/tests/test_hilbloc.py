"""Localization layer: partitions, characters, assembly, fixed points,
and the weighted fixed-point integral."""

from fractions import Fraction
from math import comb

import pytest

from nesthilb.surface import p2, p1xp1, f2, k3_profile, vd_beta
from nesthilb.bundles import point_base, projective_bundle, integrate
from nesthilb.ringcore import KClass
from nesthilb.porteous import FormulaExpr as FE, rhom, pushO, o1_line, \
    taut, co_class
from nesthilb import hilbloc as H
from nesthilb.hilbloc import (
    partitions, sub_partitions, cells, conjugate, arm, leg, contains,
    staircase_generators, EquivChar, box_character, ideal_numerator,
    structure_numerator, tangent_character, rhom_character,
    rhom_global_character, rhom_assembled, assemble, chi_line_character,
    enumerate_fixed_points, full_tangent_character, equivariant_integrate,
    nonequivariant_limit, RatFunc, LocalChar,
)


def gottsche_coefficient(e, n):
    """Coefficient of q^n in prod_m (1 - q^m)^(-e)."""
    coefs = [0] * (n + 1)
    coefs[0] = 1
    for m in range(1, n + 1):
        new = [0] * (n + 1)
        for j in range(n // m + 1):
            c = comb(e + j - 1, j)
            for i in range(n + 1 - m * j):
                new[i + m * j] += coefs[i] * c
        coefs = new
    return coefs[n]


def taylor_ideal_numerator(mu):
    """Independent resolution numerator of the monomial ideal: the
    alternating sum of lcm characters over subsets of the staircase
    generators."""
    gens = staircase_generators(mu)
    out = EquivChar()
    for mask in range(1, 1 << len(gens)):
        picked = [g for i, g in enumerate(gens) if mask & (1 << i)]
        a = max(g[0] for g in picked)
        b = max(g[1] for g in picked)
        sign = -1 if bin(mask).count("1") % 2 == 0 else 1
        out = out + EquivChar.monomial(a, b, 0, sign)
    return out


class TestPartitions:
    def test_counts(self):
        assert [len(list(partitions(n))) for n in range(7)] \
            == [1, 1, 2, 3, 5, 7, 11]

    def test_conjugate_involution(self):
        for n in range(6):
            for mu in partitions(n):
                assert conjugate(conjugate(mu)) == mu
                assert sum(conjugate(mu)) == n

    def test_arm_leg(self):
        mu = (4, 2, 1)
        assert arm(mu, (0, 0)) == 3
        assert leg(mu, (0, 0)) == 2
        assert arm(mu, (1, 1)) == 0
        assert leg(mu, (1, 1)) == 0

    def test_sub_partitions(self):
        assert list(sub_partitions((2, 1), 1)) == [(1,)]
        assert sorted(sub_partitions((2, 2), 2)) == [(1, 1), (2,)]
        assert list(sub_partitions((3,), 0)) == [()]
        assert list(sub_partitions((1,), 5)) == []
        for mu in sub_partitions((3, 2, 2), 4):
            assert contains((3, 2, 2), mu) and sum(mu) == 4

    def test_staircase_generators(self):
        assert staircase_generators(()) == [(0, 0)]
        assert staircase_generators((2, 1)) == [(2, 0), (1, 1), (0, 2)]
        assert staircase_generators((3, 3)) == [(3, 0), (0, 2)]


class TestCharacters:
    def test_monomial_algebra(self):
        a = EquivChar.monomial(1, 0)
        b = EquivChar.monomial(0, 1)
        assert (a + b) * (a - b) == a * a - b * b
        assert (a * b).conj() == EquivChar.monomial(-1, -1)
        assert a.shift(2, 3, 1).terms == {(3, 3, 1): 1}

    def test_box_character(self):
        q = box_character((2, 1))
        assert q.terms == {(0, 0, 0): 1, (1, 0, 0): 1, (0, 1, 0): 1}
        assert q.rank() == 3

    def test_tangent_character_single_box(self):
        w = ((1, 0), (0, 1))
        t = tangent_character((1,), w)
        assert t.terms == {(1, 0, 0): 1, (0, 1, 0): 1}

    def test_tangent_character_term_count(self):
        w = ((1, 0), (0, 1))
        for n in range(1, 5):
            for mu in partitions(n):
                assert tangent_character(mu, w).rank() == 2 * n

    def test_tangent_matches_vertex_formula(self):
        # chi(O,O) - chi(I,I) in chart variables equals the arm/leg
        # closed form written in the dual (tangent) weights
        m1, m2 = (1, 0), (0, 1)
        w = ((-1, 0), (0, -1))
        d = (EquivChar.one() - EquivChar.monomial(*m1)) \
            * (EquivChar.one() - EquivChar.monomial(*m2))
        dbar = d.conj()
        for n in range(1, 5):
            for mu in partitions(n):
                q = box_character(mu, m1, m2)
                vertex = q + q.conj().shift(-1, -1) - dbar * q.conj() * q
                assert vertex == tangent_character(mu, w), mu

    def test_ideal_numerator_matches_taylor_resolution(self):
        for n in range(0, 5):
            for mu in partitions(n):
                assert ideal_numerator(mu) == taylor_ideal_numerator(mu), mu

    def test_rhom_numerator_matches_taylor_product(self):
        for na in range(0, 4):
            for mu in partitions(na):
                for nb in range(0, 4):
                    for nu in partitions(nb):
                        closed = rhom_character(mu, nu).num
                        oracle = taylor_ideal_numerator(mu).conj() \
                            * taylor_ideal_numerator(nu)
                        assert closed == oracle, (mu, nu)

    def test_four_term_decomposition(self):
        # conj(P_mu) P_nu = 1 - dQ_nu - conj(dQ_mu) + conj(dQ_mu) dQ_nu
        mu, nu = (2,), (2, 1)
        lhs = rhom_character(mu, nu).num
        one = EquivChar.one()
        sn = structure_numerator(nu)
        smb = structure_numerator(mu).conj()
        assert lhs == one - sn - smb + smb * sn

    def test_truncated_expansion_agrees(self):
        # expand num / d in the coordinate quadrant and compare routes
        mu, nu = (1, 1), (2,)
        closed = rhom_character(mu, nu).num
        oracle = taylor_ideal_numerator(mu).conj() \
            * taylor_ideal_numerator(nu)
        D = 6
        geo = EquivChar({(a, b, 0): 1 for a in range(D) for b in range(D)})
        box = lambda ch: EquivChar(
            {k: v for k, v in ch.terms.items()
             if 0 <= k[0] + 2 < D - 2 and 0 <= k[1] + 2 < D - 2})
        lhs = (closed * geo)
        rhs = (oracle * geo)
        assert box(lhs) == box(rhs)


class TestAssembly:
    def test_chi_values_match_riemann_roch(self):
        for S, classes in (
                (p2(), [(0,), (1,), (2,), (3,), (-1,), (-3,)]),
                (p1xp1(), [(0, 0), (1, 1), (2, 1), (-1, 0), (-2, -2)]),
                (f2(), [(0, 0), (1, 1), (3, 1), (2, 1)]),
        ):
            for c in classes:
                ch = chi_line_character(S, c)
                assert ch.rank() == H.riemann_roch_chi(S, c), (S.name, c)

    def test_nef_line_bundle_is_effective_character(self):
        S = p2()
        ch = chi_line_character(S, (2,))
        assert all(v > 0 for v in ch.terms.values())
        assert ch.rank() == 6

    def test_assembly_failure_on_open_chart(self):
        one = EquivChar.one()
        with pytest.raises(ValueError, match="assembly failure"):
            assemble([(one, ((1, 0), (0, 1)))])

    def test_canonical_direction_flip(self):
        # 1/(1 - t^-v) = -t^v/(1 - t^v): both orientations assemble alike
        S = p2()
        terms = []
        for chart in S.charts:
            u = S.chart_vertex(chart, (1,))
            num = EquivChar.monomial(int(u[0]), int(u[1]))
            terms.append((num, (chart.m1, chart.m2)))
        flipped = []
        for num, (v1, v2) in terms:
            w1 = (-v1[0], -v1[1])
            shifted = -num.shift(-v1[0], -v1[1])
            flipped.append((shifted, (w1, v2)))
        assert assemble(terms) == assemble(flipped)

    def test_rhom_closed_form_matches_assembly(self):
        S = p1xp1()
        for pt in enumerate_fixed_points(S, 1, 1, nested=False):
            a = rhom_global_character(S, pt.mu, pt.nu, (1, 1))
            b = rhom_assembled(S, pt.mu, pt.nu, (1, 1))
            assert a == b

    def test_rhom_rank_is_riemann_roch(self):
        S = p2()
        for pt in enumerate_fixed_points(S, 1, 2, nested=False):
            ch = rhom_global_character(S, pt.mu, pt.nu, (2,))
            assert ch.rank() == H.riemann_roch_chi(S, (2,)) - 3

    def test_tangent_from_rhom(self):
        S = p2()
        for pt in enumerate_fixed_points(S, 0, 2):
            ch = rhom_global_character(S, pt.nu, pt.nu, (0,))
            tangent = chi_line_character(S, (0,)) - ch
            assert tangent == full_tangent_character(S, pt)


class TestFixedPoints:
    def test_hilbert_counts(self):
        for n in range(5):
            assert len(list(enumerate_fixed_points(p2(), 0, n))) \
                == gottsche_coefficient(3, n)
            assert len(list(enumerate_fixed_points(p1xp1(), 0, n))) \
                == gottsche_coefficient(4, n)

    def test_nested_counts(self):
        pts = list(enumerate_fixed_points(p2(), 1, 2))
        assert len(pts) == 12
        assert all(all(contains(nu, mu) for mu, nu in zip(p.mu, p.nu))
                   for p in pts)

    def test_ambient_counts(self):
        pts = list(enumerate_fixed_points(p2(), 1, 2, nested=False))
        assert len(pts) == 27

    def test_with_pb_stream(self):
        pts = list(enumerate_fixed_points(p2(), 0, 1, with_pb=(1,)))
        assert len(pts) == 9
        assert {p.pb for p in pts} == {0, 1, 2}

    def test_with_pb_needs_spanning_sections(self):
        S = f2()
        # the negative-self-intersection section: effective but chi = 0
        with pytest.raises(ValueError, match="sections"):
            list(enumerate_fixed_points(S, 0, 0, with_pb=(0, 1)))

    def test_needs_toric(self):
        with pytest.raises(ValueError, match="toric"):
            list(enumerate_fixed_points(k3_profile(), 0, 1))


EULER = FE.euler(FE.leaf("tangent"))


class TestIntegration:
    def test_euler_counts(self):
        for n in range(4):
            assert equivariant_integrate(EULER, p2(), 0, n) \
                == gottsche_coefficient(3, n)
        assert equivariant_integrate(EULER, p1xp1(), 0, 2) == 14

    def test_fundamental_class_integrates_to_zero(self):
        assert equivariant_integrate(1, p2(), 0, 1) == 0
        assert equivariant_integrate(1, p2(), 1, 1) == 0

    def test_point_case(self):
        assert equivariant_integrate(7, p2(), 0, 0) == 7

    def test_projective_bundle_cross_evaluator(self):
        # the same number through the formal Segre route
        S = p2()
        h = FE.chern(1, o1_line())
        val = equivariant_integrate(FE.mul(h, h), S, 0, 0, with_pb=(1,))
        base = point_base(D=2)
        B = KClass.trivial(base.ring, 3)
        level = projective_bundle(base, B)
        hf = level.taut["h"]
        formal = integrate(level, hf * hf)
        assert val == formal.constant() == 1

    def test_euler_class_of_taut_line(self):
        # c_1(O(1)^[1])^2 over S^[1] = P2 is the self-intersection 1
        S = p2()
        t1 = FE.chern(1, taut((1,), 2))
        assert equivariant_integrate(FE.mul(t1, t1), S, 0, 1) == 1
        t2 = FE.chern(1, taut((2,), 2))
        assert equivariant_integrate(FE.mul(t2, t2), S, 0, 1) == 4

    def test_co_pairing_vanishes(self):
        S = p2()
        co = co_class(bc=1)
        assert equivariant_integrate(FE.chern(2, co), S, 0, 1,
                                     beta=(1,)) == 0
        t1 = FE.chern(1, taut((1,), 2))
        expr = FE.mul(t1, FE.chern(3, co))
        assert equivariant_integrate(expr, S, 0, 2, beta=(1,),
                                     threads=1) == 0

    def test_parallel_matches_serial(self):
        S = p2()
        expr = FE.chern(2, co_class(bc=1))
        a = equivariant_integrate(expr, S, 0, 2, beta=(2,))
        b = equivariant_integrate(expr, S, 0, 2, beta=(2,), threads=2)
        assert a == b

    def test_refined_twisted_euler(self):
        # int of c(T tensor aux)^2 degree parts: 15 t^2 exactly
        S = p2()
        aux = pushO(tp=1)
        cls = FE.twist(FE.leaf("tangent"), aux, 1)
        expr = FE.mul(FE.euler(cls), FE.euler(cls))
        val = equivariant_integrate(expr, S, 0, 1, refined=True)
        assert isinstance(val, RatFunc)
        assert val == RatFunc((0, 0, 15))
        with pytest.raises(ValueError):
            equivariant_integrate(expr, S, 0, 1, refined=False)
        assert nonequivariant_limit(val) == 0

    def test_seed_determinism(self):
        S = p2()
        _, i1 = equivariant_integrate(EULER, S, 0, 2, seed=5,
                                      return_info=True)
        _, i2 = equivariant_integrate(EULER, S, 0, 2, seed=5,
                                      return_info=True)
        assert i1["spec"] == i2["spec"]

    def test_not_constant_error(self):
        S = p2()
        bad = FE.euler(FE.kdiff(FE.ksum(), FE.leaf("tangent")))
        with pytest.raises(ValueError,
                           match="integral not equivariantly constant"):
            equivariant_integrate(bad, S, 0, 1)

    def test_degenerate_weight_error(self):
        S = p2()
        bad = FE.euler(FE.kdiff(FE.ksum(), pushO()))
        with pytest.raises(ValueError,
                           match="non-isolated or non-generic weights"):
            equivariant_integrate(bad, S, 0, 1)

    def test_trace_free_rank(self):
        S = p2()
        pt = next(enumerate_fixed_points(S, 0, 2))
        from nesthilb.hilbloc import LocalizationContext, PointEvaluator
        ctx = LocalizationContext(S, beta=(0,))
        ev = PointEvaluator(ctx, pt, (7, 3))
        ch = ev.kval(rhom(2, 2, trace_free=True))
        assert ch.rank() == -4


class TestRouteAgreement:
    """Pushforward through the section bundle against the closed
    fibrewise form, paired with tautological insertions."""

    def check(self, tau, i, n1, n2):
        S = p2()
        beta = (1,)
        vd = vd_beta(S, beta)
        B1 = FE.twist(pushO(bc=1), o1_line(), 1)
        R1 = rhom(1, 2, bc=1, o1=1)
        cls_a = FE.chern(n1 + n2, FE.kdiff(B1, R1))
        hs = [FE.chern(1, o1_line())] * i
        factors = ([tau] if tau is not None else []) + hs + [cls_a]
        va = equivariant_integrate(FE.mul(*factors), S, n1, n2,
                                   beta=beta, with_pb=beta)
        k = n1 + n2 - vd + i
        cls_b = FE.chern(k, FE.kdiff(FE.ksum(), rhom(1, 2, bc=1)))
        fb = ([tau] if tau is not None else []) + [cls_b]
        vb = equivariant_integrate(FE.mul(*fb), S, n1, n2, beta=beta)
        assert va == vb
        return va

    def test_point_case(self):
        assert self.check(None, 2, 0, 0) == 1

    def test_one_point_cases(self):
        t1 = FE.chern(1, taut((1,), 2))
        assert self.check(FE.mul(t1, t1), 1, 0, 1) == 1
        assert self.check(t1, 2, 0, 1) == 1

    def test_two_point_case(self):
        t1 = FE.chern(1, taut((1,), 2))
        s1 = FE.chern(1, taut((1,), 1))
        assert self.check(FE.mul(s1, t1, t1), 1, 1, 1) == 4
