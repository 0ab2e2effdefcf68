"""Torus localization for punctual Hilbert schemes of toric surfaces.

Fixed points of the torus action on S^[n1] x S^[n2] are tuples of
nested partition pairs, one pair per fixed point of the surface.  Each
leaf of a formula tree evaluates at a fixed point to a finite Laurent
character in the surface torus (t1, t2) and an auxiliary circle t; the
integral is then the classical weighted sum over fixed points.

Characters carry three integer exponents (p, q, c): the lattice
character t^(p,q) times the auxiliary weight c.  Integration
specializes (p, q, c) to (p*a + q*b) s + c*t for a seeded generic
coprime pair (a, b) and reads off the s^0 coefficient of the fixed
point sum; surviving negative powers of s mean the input was not the
lift of a global class.
"""

import json
import math
import multiprocessing
import random
from fractions import Fraction

from .ringcore import binom_general
from .surface import ToricSurface, riemann_roch_chi, surface_to_json, \
    surface_from_json
from .porteous import FormulaExpr, expr_to_json, expr_from_json


# ---------------------------------------------------------------------------
# partitions


def partitions(n, max_part=None):
    """Partitions of n as weakly decreasing tuples."""
    if n < 0:
        return
    if n == 0:
        yield ()
        return
    cap = n if max_part is None else min(max_part, n)
    for first in range(cap, 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def sub_partitions(nu, size):
    """Partitions mu of the given size contained in nu row by row."""
    def rows(i, remaining, prev):
        if remaining == 0:
            yield ()
            return
        if i >= len(nu):
            return
        cap = min(nu[i], prev, remaining)
        for r in range(cap, 0, -1):
            for rest in rows(i + 1, remaining - r, r):
                yield (r,) + rest
    if size < 0 or size > sum(nu):
        return
    if size == 0:
        yield ()
        return
    yield from rows(0, size, size)


def cells(mu):
    """Cells (a, b): column a within row b."""
    return [(a, b) for b in range(len(mu)) for a in range(mu[b])]


def conjugate(mu):
    if not mu:
        return ()
    return tuple(sum(1 for r in mu if r > a) for a in range(mu[0]))


def arm(mu, cell):
    a, b = cell
    return mu[b] - a - 1


def leg(mu, cell):
    a, b = cell
    return conjugate(mu)[a] - b - 1


def contains(nu, mu):
    return len(mu) <= len(nu) and all(m <= n for m, n in zip(mu, nu))


def staircase_generators(mu):
    """Exponents (a, b) of the minimal monomial generators of the
    monomial ideal with staircase mu."""
    gens = []
    rows = len(mu)
    for b in range(rows + 1):
        width = mu[b] if b < rows else 0
        above = mu[b - 1] if b > 0 else None
        if above is None or width < above:
            gens.append((width, b))
    return gens


# ---------------------------------------------------------------------------
# Laurent characters


class EquivChar:
    """Finite Laurent polynomial in t1, t2 and the auxiliary weight,
    stored as integer coefficients on exponent triples (p, q, c)."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for k, v in terms.items():
                if v:
                    self.terms[k] = self.terms.get(k, 0) + v
            self.terms = {k: v for k, v in self.terms.items() if v}

    @staticmethod
    def monomial(p, q, c=0, coef=1):
        e = EquivChar()
        if coef:
            e.terms[(p, q, c)] = coef
        return e

    @staticmethod
    def one():
        return EquivChar.monomial(0, 0, 0)

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return EquivChar({k: v for k, v in out.items() if v})

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return EquivChar({k: -v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            return EquivChar({k: v * other for k, v in self.terms.items()})
        out = {}
        for (p1, q1, c1), v1 in self.terms.items():
            for (p2, q2, c2), v2 in other.terms.items():
                k = (p1 + p2, q1 + q2, c1 + c2)
                out[k] = out.get(k, 0) + v1 * v2
        return EquivChar({k: v for k, v in out.items() if v})

    def conj(self):
        return EquivChar({(-p, -q, -c): v
                          for (p, q, c), v in self.terms.items()})

    def shift(self, p, q, c=0):
        return EquivChar({(p1 + p, q1 + q, c1 + c): v
                          for (p1, q1, c1), v in self.terms.items()})

    def aux_shift(self, c):
        return self.shift(0, 0, c) if c else self

    def rank(self):
        return sum(self.terms.values())

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, EquivChar) and self.terms == other.terms

    def __repr__(self):
        return "EquivChar(%r)" % (self.terms,)


def box_character(mu, w1=(1, 0), w2=(0, 1)):
    """Sum of t^(a w1 + b w2) over cells (a, b) of the partition."""
    out = EquivChar()
    for a, b in cells(mu):
        out = out + EquivChar.monomial(a * w1[0] + b * w2[0],
                                       a * w1[1] + b * w2[1])
    return out


def structure_numerator(mu, w1=(1, 0), w2=(0, 1)):
    """Resolution numerator of the length-|mu| quotient: d * Q_mu with
    d = (1 - t^w1)(1 - t^w2)."""
    d = _denominator_char(w1, w2)
    return d * box_character(mu, w1, w2)


def ideal_numerator(mu, w1=(1, 0), w2=(0, 1)):
    """Resolution numerator of the ideal sheaf: 1 - d * Q_mu."""
    return EquivChar.one() - structure_numerator(mu, w1, w2)


def _denominator_char(w1, w2):
    one = EquivChar.one()
    f1 = one - EquivChar.monomial(*w1)
    f2 = one - EquivChar.monomial(*w2)
    return f1 * f2


def tangent_character(mu, w):
    """Tangent character of the punctual Hilbert scheme at a monomial
    ideal, in terms of the chart's tangent weight vectors w = (w1, w2):
    sum over cells of t^((arm+1) w1 - leg w2) + t^(-arm w1 + (leg+1) w2).
    """
    w1, w2 = w
    out = EquivChar()
    for cell in cells(mu):
        a, l = arm(mu, cell), leg(mu, cell)
        out = out + EquivChar.monomial((a + 1) * w1[0] - l * w2[0],
                                       (a + 1) * w1[1] - l * w2[1])
        out = out + EquivChar.monomial(-a * w1[0] + (l + 1) * w2[0],
                                       -a * w1[1] + (l + 1) * w2[1])
    return out


class LocalChar:
    """A chart-local rational character: numerator over a product of
    binomial factors (1 - t^v), one per denominator direction."""

    __slots__ = ("num", "dens")

    def __init__(self, num, dens):
        self.num = num
        self.dens = tuple(tuple(v) for v in dens)

    def __repr__(self):
        return "LocalChar(%r, dens=%r)" % (self.num, self.dens)


def rhom_character(mu, nu, chart=None, vertex=(0, 0)):
    """Chart-local character of Rhom(I_mu, I_nu tensor L) as a rational
    form: conj(P_mu) P_nu t^u over the chart denominator.  With no
    chart the abstract coordinate axes are used."""
    if chart is None:
        m1, m2 = (1, 0), (0, 1)
    else:
        m1, m2 = chart.m1, chart.m2
    num = ideal_numerator(mu, m1, m2).conj() * ideal_numerator(nu, m1, m2)
    num = num.shift(int(vertex[0]), int(vertex[1]))
    return LocalChar(num, (m1, m2))


# ---------------------------------------------------------------------------
# assembly of global characters


def _canonical_direction(v, num):
    """Orient a denominator direction so its leading coordinate is
    positive, compensating in the numerator:
    1/(1 - t^-w) = -t^w / (1 - t^w)."""
    p, q = int(v[0]), int(v[1])
    if (p, q) == (0, 0):
        raise ValueError("assembly failure")
    if p < 0 or (p == 0 and q < 0):
        w = (-p, -q)
        return w, -num.shift(w[0], w[1])
    return (p, q), num


def _divide_binomial(num, v):
    """Exact division of a Laurent character by (1 - t^v).

    Terms are grouped by the line through the exponent parallel to v
    (and by auxiliary weight); within a group the quotient is the
    cumulative sum along v.  A group with nonzero total sum has no
    polynomial quotient.
    """
    p, q = v
    norm = p * p + q * q
    groups = {}
    for (a, b, c), coef in num.terms.items():
        key = (a * q - b * p, c)
        groups.setdefault(key, []).append((a * p + b * q, a, b, coef))
    out = {}
    for (line, c), items in groups.items():
        items.sort()
        r0 = items[0][0]
        a0, b0 = items[0][1], items[0][2]
        positions = {(r - r0) // norm: coef for r, _, _, coef in items}
        total = sum(positions.values())
        if total != 0:
            raise ValueError("assembly failure")
        smax = max(positions)
        acc = 0
        for s in range(0, smax):
            acc += positions.get(s, 0)
            if acc:
                expo = (a0 + s * p, b0 + s * q, c)
                out[expo] = out.get(expo, 0) + acc
    return EquivChar(out)


def assemble(local_terms):
    """Sum of chart-local rational characters into a global finite
    character.  Raises "assembly failure" when the sum is not a Laurent
    polynomial."""
    prepared = []
    for term in local_terms:
        num, dens = (term.num, term.dens) if isinstance(term, LocalChar) \
            else term
        canon = []
        for v in dens:
            v, num = _canonical_direction(v, num)
            canon.append(v)
        counts = {}
        for v in canon:
            counts[v] = counts.get(v, 0) + 1
        prepared.append((num, counts))
    common = {}
    for _, counts in prepared:
        for v, m in counts.items():
            common[v] = max(common.get(v, 0), m)
    total = EquivChar()
    for num, counts in prepared:
        for v, m in common.items():
            missing = m - counts.get(v, 0)
            factor = EquivChar.one() - EquivChar.monomial(v[0], v[1])
            for _ in range(missing):
                num = num * factor
        total = total + num
    for v, m in common.items():
        for _ in range(m):
            total = _divide_binomial(total, v)
    return total


_CHI_CACHE = {}


def chi_line_character(surface, beta):
    """Global Euler characteristic character of the line bundle with the
    given class, assembled from the chart vertices."""
    if not isinstance(surface, ToricSurface):
        raise ValueError("equivariant characters need a toric surface")
    key = (surface.name, tuple(surface.cls(beta)))
    hit = _CHI_CACHE.get(key)
    if hit is not None:
        return hit
    terms = []
    for chart in surface.charts:
        u = surface.chart_vertex(chart, beta)
        num = EquivChar.monomial(int(u[0]), int(u[1]))
        terms.append((num, (chart.m1, chart.m2)))
    out = assemble(terms)
    if out.rank() != riemann_roch_chi(surface, beta):
        raise ValueError("assembly failure")
    _CHI_CACHE[key] = out
    return out


def rhom_global_character(surface, parts_a, parts_b, beta):
    """Character of Rhom(I_A, I_B tensor L) at a fixed point, where
    parts_a and parts_b list one partition per chart.

    The rational chart sums collapse to the twist characteristic plus a
    finite correction per chart, so no assembly is needed beyond the
    line bundle itself.
    """
    out = chi_line_character(surface, beta)
    for chart, mu, nu in zip(surface.charts, parts_a, parts_b):
        if not mu and not nu:
            continue
        m1, m2 = chart.m1, chart.m2
        u = surface.chart_vertex(chart, beta)
        u = (int(u[0]), int(u[1]))
        piece = EquivChar()
        if nu:
            piece = piece - box_character(nu, m1, m2)
        if mu:
            qbar = box_character(mu, m1, m2).conj()
            piece = piece - qbar.shift(-m1[0] - m2[0], -m1[1] - m2[1])
            if nu:
                dbar = _denominator_char(
                    (-m1[0], -m1[1]), (-m2[0], -m2[1]))
                piece = piece + dbar * qbar * box_character(nu, m1, m2)
        out = out + piece.shift(u[0], u[1])
    return out


def rhom_assembled(surface, parts_a, parts_b, beta):
    """Assembly route for the same character, as an independent check."""
    terms = []
    for chart, mu, nu in zip(surface.charts, parts_a, parts_b):
        u = surface.chart_vertex(chart, beta)
        terms.append(rhom_character(mu, nu, chart, u))
    return assemble(terms)


# ---------------------------------------------------------------------------
# fixed points


class NestedFixedPoint:
    """A torus-fixed point of S^[n1] x S^[n2] (times a weight line of a
    section bundle when pb is set): per-chart partitions mu for the
    first factor and nu for the second, with mu_sigma inside nu_sigma
    demanded only by the incidence subscheme, not by the ambient
    product."""

    __slots__ = ("mu", "nu", "pb")

    def __init__(self, mu, nu, pb=None):
        self.mu = tuple(tuple(m) for m in mu)
        self.nu = tuple(tuple(n) for n in nu)
        self.pb = pb

    def __eq__(self, other):
        return (self.mu, self.nu, self.pb) == (other.mu, other.nu, other.pb)

    def __hash__(self):
        return hash((self.mu, self.nu, self.pb))

    def __repr__(self):
        return "NestedFixedPoint(mu=%r, nu=%r, pb=%r)" % (
            self.mu, self.nu, self.pb)


def _chart_tuples(num_charts, total):
    """All ways to place partitions of given total size on the charts."""
    def go(i, remaining):
        if i == num_charts - 1:
            for lam in partitions(remaining):
                yield (lam,)
            return
        for here in range(remaining + 1):
            for lam in partitions(here):
                for rest in go(i + 1, remaining - here):
                    yield (lam,) + rest
    if num_charts == 0:
        if total == 0:
            yield ()
        return
    yield from go(0, total)


def enumerate_fixed_points(surface, n1, n2, with_pb=None, nested=True):
    """Fixed points of the nested incidence scheme inside
    S^[n1] x S^[n2]: chartwise nested pairs mu <= nu, optionally crossed
    with the projective bundle of sections of the class ``with_pb``.

    With ``nested=False`` the stream covers the whole ambient product,
    which is what localization sums run over.
    """
    if not isinstance(surface, ToricSurface):
        raise ValueError("fixed points need a toric surface")
    k = len(surface.charts)
    pb_range = [None]
    if with_pb is not None:
        npts = len(surface.polytope_points(with_pb))
        if npts != riemann_roch_chi(surface, with_pb):
            raise ValueError("sections do not span the pushforward fibre")
        pb_range = list(range(npts))
    for nus in _chart_tuples(k, n2):
        for mus in _chart_tuples(k, n1):
            if nested and not all(contains(nu, mu)
                                  for mu, nu in zip(mus, nus)):
                continue
            for pb in pb_range:
                yield NestedFixedPoint(mus, nus, pb)


def full_tangent_character(surface, point, with_pb=None):
    """Tangent character of the ambient product at a fixed point: both
    Hilbert scheme factors plus, with a section bundle, the bundle of
    lines."""
    out = EquivChar()
    for chart, mu, nu in zip(surface.charts, point.mu, point.nu):
        w = chart.tangent_weights()
        if mu:
            out = out + tangent_character(mu, w)
        if nu:
            out = out + tangent_character(nu, w)
    if with_pb is not None and point.pb is not None:
        pts = surface.polytope_points(with_pb)
        u0 = pts[point.pb]
        for u in pts:
            if u != u0:
                out = out + EquivChar.monomial(u[0] - u0[0], u[1] - u0[1])
    return out


# ---------------------------------------------------------------------------
# rational functions in the auxiliary weight


def _tstrip(t):
    i = len(t)
    while i > 0 and t[i - 1] == 0:
        i -= 1
    return t[:i]


def _tadd(a, b):
    n = max(len(a), len(b))
    return _tstrip(tuple(
        (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
        for i in range(n)))


def _tneg(a):
    return tuple(-x for x in a)


def _tmul(a, b):
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] += x * y
    return _tstrip(tuple(out))


def _tdivmod(a, b):
    if not b:
        raise ZeroDivisionError
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    inv = 1 / b[-1]
    for i in range(len(a) - len(b), -1, -1):
        coef = a[i + len(b) - 1] * inv
        if coef:
            q[i] = coef
            for j, y in enumerate(b):
                a[i + j] -= coef * y
    return _tstrip(tuple(q)), _tstrip(tuple(a))


def _tgcd(a, b):
    while b:
        _, r = _tdivmod(a, b)
        a, b = b, r
    if a:
        lead = a[-1]
        a = tuple(x / lead for x in a)
    return a


class RatFunc:
    """Rational function of the auxiliary equivariant weight, reduced,
    with monic denominator.  Polynomials are coefficient tuples in
    ascending order."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=(Fraction(1),)):
        num = _tstrip(tuple(Fraction(x) for x in num))
        den = _tstrip(tuple(Fraction(x) for x in den))
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            self.num, self.den = (), (Fraction(1),)
            return
        if len(den) > 1:
            g = _tgcd(num, den)
            if len(g) > 1:
                num, _ = _tdivmod(num, g)
                den, _ = _tdivmod(den, g)
        lead = den[-1]
        if lead != 1:
            num = tuple(x / lead for x in num)
            den = tuple(x / lead for x in den)
        self.num, self.den = num, den

    @staticmethod
    def const(x):
        return RatFunc((Fraction(x),))

    @staticmethod
    def linear(c0, c1):
        """c0 + c1 * t."""
        return RatFunc((Fraction(c0), Fraction(c1)))

    def is_zero(self):
        return not self.num

    def is_constant(self):
        return len(self.num) <= 1 and self.den == (Fraction(1),)

    def as_fraction(self):
        if not self.is_constant():
            raise ValueError("result depends on the auxiliary weight")
        return self.num[0] if self.num else Fraction(0)

    def __add__(self, other):
        if self.den == other.den:
            return RatFunc(_tadd(self.num, other.num), self.den)
        return RatFunc(_tadd(_tmul(self.num, other.den),
                             _tmul(other.num, self.den)),
                       _tmul(self.den, other.den))

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return RatFunc(_tneg(self.num), self.den)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RatFunc.const(other)
        return RatFunc(_tmul(self.num, other.num),
                       _tmul(self.den, other.den))

    def inv(self):
        if not self.num:
            raise ZeroDivisionError("inverse of zero")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        return self * other.inv()

    def __eq__(self, other):
        return isinstance(other, RatFunc) and self.num == other.num \
            and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def at_zero(self):
        """Limit at vanishing auxiliary weight."""
        if not self.num:
            return Fraction(0)
        if not self.den or self.den[0] == 0:
            v_num = next(i for i, x in enumerate(self.num) if x)
            v_den = next(i for i, x in enumerate(self.den) if x)
            if v_num < v_den:
                raise ValueError("integral not equivariantly constant")
            if v_num > v_den:
                return Fraction(0)
            return self.num[v_num] / self.den[v_den]
        return (self.num[0] if self.num else Fraction(0)) / self.den[0]

    def series(self, order):
        """Taylor coefficients at the origin up to the given order."""
        if self.den[0] == 0:
            raise ValueError("integral not equivariantly constant")
        coefs = []
        num = list(self.num) + [Fraction(0)] * (order + 1)
        for k in range(order + 1):
            c = num[k]
            for j in range(1, min(k, len(self.den) - 1) + 1):
                c -= self.den[j] * coefs[k - j]
            coefs.append(c / self.den[0])
        return coefs

    def __reduce__(self):
        return (RatFunc, (self.num, self.den))

    def __repr__(self):
        return "RatFunc(%r, %r)" % (self.num, self.den)


R_ZERO = RatFunc(())
R_ONE = RatFunc.const(1)


# ---------------------------------------------------------------------------
# polynomials in the localization variable s (coefficients RatFunc)


def pol_add(a, b):
    out = dict(a)
    for k, v in b.items():
        w = out.get(k)
        out[k] = v if w is None else w + v
    return {k: v for k, v in out.items() if not v.is_zero()}


def pol_mul(a, b):
    out = {}
    for i, x in a.items():
        for j, y in b.items():
            k = i + j
            v = x * y
            w = out.get(k)
            out[k] = v if w is None else w + v
    return {k: v for k, v in out.items() if not v.is_zero()}


def pol_scale(a, c):
    if isinstance(c, (int, Fraction)):
        c = RatFunc.const(c)
    return {k: v * c for k, v in a.items() if not (v * c).is_zero()}


POL_ONE = {0: R_ONE}


def weight_poly(w):
    """The linear polynomial k s + c t of a specialized weight."""
    k, c = w
    out = {}
    if c:
        out[0] = RatFunc.linear(0, c)
    if k:
        out[1] = RatFunc.const(k)
    return out


def weight_power_poly(w, j):
    """(k s + c t)^j expanded exactly."""
    k, c = w
    out = {}
    for i in range(j + 1):
        coef = Fraction(binom_general(j, i)) * (Fraction(k) ** i)
        tpart = Fraction(c) ** (j - i)
        if coef and tpart:
            val = RatFunc(tuple([Fraction(0)] * (j - i)
                                + [coef * tpart]))
            if not val.is_zero():
                out[i] = val
    return out


# ---------------------------------------------------------------------------
# specialization and per-point values


class _Collision(Exception):
    """The random direction annihilated a nonzero lattice weight."""


def specialize_weights(char, spec):
    """Multiset of specialized weights [(k, c), multiplicity] of a
    character under (p, q) -> p*a + q*b."""
    a, b = spec
    out = []
    for (p, q, c), mult in char.terms.items():
        k = p * a + q * b
        if k == 0 and c == 0 and (p, q) != (0, 0):
            raise _Collision
        out.append(((k, c), mult))
    return out


def chern_value(weights, k):
    """k-th Chern class of a virtual sum of weight lines, as an exact
    polynomial in s."""
    if k < 0:
        return {}
    if k == 0:
        return dict(POL_ONE)
    arr = [dict(POL_ONE)] + [{} for _ in range(k)]
    for (w, mult) in weights:
        if w == (0, 0):
            continue
        fac = [dict(POL_ONE)]
        for j in range(1, k + 1):
            coef = binom_general(mult, j)
            if coef == 0:
                fac.append({})
                continue
            fac.append(pol_scale(weight_power_poly(w, j), coef))
        new = [{} for _ in range(k + 1)]
        for i in range(k + 1):
            if not arr[i]:
                continue
            for j in range(k + 1 - i):
                if fac[j]:
                    new[i + j] = pol_add(new[i + j], pol_mul(arr[i], fac[j]))
        arr = new
    return arr[k]


class PointValue:
    """Class value at a fixed point: an exact polynomial in s times a
    ratio of products of linear weights."""

    __slots__ = ("poly", "num_ws", "den_ws")

    def __init__(self, poly, num_ws=(), den_ws=()):
        self.poly = poly
        self.num_ws = list(num_ws)
        self.den_ws = list(den_ws)

    @staticmethod
    def unit():
        return PointValue(dict(POL_ONE))

    @staticmethod
    def zero():
        return PointValue({})

    def times(self, other):
        return PointValue(pol_mul(self.poly, other.poly),
                          self.num_ws + other.num_ws,
                          self.den_ws + other.den_ws)

    def scaled(self, c):
        return PointValue(pol_scale(self.poly, c), self.num_ws, self.den_ws)

    def plus(self, other):
        pa = self.poly
        for w in self.num_ws:
            pa = pol_mul(pa, weight_poly(w))
        pb = other.poly
        for w in other.num_ws:
            pb = pol_mul(pb, weight_poly(w))
        for w in other.den_ws:
            pa = pol_mul(pa, weight_poly(w))
        for w in self.den_ws:
            pb = pol_mul(pb, weight_poly(w))
        return PointValue(pol_add(pa, pb), [],
                          self.den_ws + other.den_ws)


def point_value_laurent(pv):
    """Laurent coefficients of a point value at degrees <= 0, exact."""
    poly = pv.poly
    for w in pv.num_ws:
        poly = pol_mul(poly, weight_poly(w))
    if not poly:
        return {}
    shift = 0
    scalar = Fraction(1)
    soft_dens = []
    for (k, c) in pv.den_ws:
        if k == 0 and c == 0:
            raise ValueError("non-isolated or non-generic weights")
        if c == 0:
            shift += 1
            scalar *= Fraction(1, k)
        else:
            soft_dens.append((k, c))
    vp = min(poly)
    if vp - shift > 0:
        return {}
    cutoff = shift
    series = {k: v for k, v in poly.items() if k <= cutoff}
    for (k, c) in soft_dens:
        inv = {}
        run = RatFunc.const(1) / RatFunc.linear(0, c)
        step = RatFunc.const(-k) / RatFunc.linear(0, c)
        for j in range(cutoff + 1):
            inv[j] = run
            run = run * step
        series = {k: v for k, v in pol_mul(series, inv).items()
                  if k <= cutoff}
    out = {}
    for deg, coef in series.items():
        d = deg - shift
        if d <= 0 and not coef.is_zero():
            out[d] = coef * scalar
    return out


# ---------------------------------------------------------------------------
# evaluation of formula trees at a fixed point


class LocalizationContext:
    """Shared data for evaluating formulas at the fixed points of one
    localization problem."""

    def __init__(self, surface, beta=None, A=None, with_pb=None):
        if not isinstance(surface, ToricSurface):
            raise ValueError("localization needs a toric surface")
        self.surface = surface
        self.beta = beta
        self.A = A
        self.with_pb = with_pb
        self.sections = None
        if with_pb is not None:
            self.sections = [
                (int(u[0]), int(u[1]))
                for u in surface.polytope_points(with_pb)]

    def twist_class(self, leaf):
        S = self.surface
        cls = S.zero_class()
        bc, ac, kc = leaf.attr("bc"), leaf.attr("ac"), leaf.attr("kc")
        if bc:
            if self.beta is None:
                raise ValueError("twist references an unbound curve class")
            cls = S.add(cls, S.scale(bc, S.cls(self.beta)))
        if ac:
            if self.A is None:
                raise ValueError("twist references an unbound polarization")
            cls = S.add(cls, S.scale(ac, S.cls(self.A)))
        if kc:
            cls = S.add(cls, S.scale(kc, S.K))
        return cls


class PointEvaluator:
    def __init__(self, ctx, point, spec):
        self.ctx = ctx
        self.point = point
        self.spec = spec

    def parts(self, index):
        if index == 1:
            return self.point.mu
        if index == 2:
            return self.point.nu
        raise ValueError("nesting index out of range for localization")

    def pb_vertex(self):
        if self.ctx.sections is None or self.point.pb is None:
            raise ValueError("no projective bundle level in this problem")
        return self.ctx.sections[self.point.pb]

    def leaf_char(self, e):
        name = e.params[0]
        S = self.ctx.surface
        if name in ("rhom", "rhom0"):
            cls = self.ctx.twist_class(e)
            ch = rhom_global_character(
                S, self.parts(e.attr("i")), self.parts(e.attr("j")), cls)
            if name == "rhom0":
                ch = ch - chi_line_character(S, cls)
        elif name == "pushO":
            ch = chi_line_character(S, self.ctx.twist_class(e))
        elif name == "taut":
            cls = S.cls(e.attr("a"))
            part = self.parts(e.attr("level"))
            ch = EquivChar()
            for chart, lam in zip(S.charts, part):
                if not lam:
                    continue
                u = S.chart_vertex(chart, cls)
                q = box_character(lam, chart.m1, chart.m2)
                ch = ch + q.shift(int(u[0]), int(u[1]))
        elif name == "tangent":
            ch = full_tangent_character(S, self.point, self.ctx.with_pb)
        elif name == "O1":
            u = self.pb_vertex()
            ch = EquivChar.monomial(-u[0], -u[1])
        else:
            raise ValueError("leaf %r has no equivariant value" % name)
        o1 = e.attr("o1")
        if o1:
            u = self.pb_vertex()
            ch = ch.shift(-o1 * u[0], -o1 * u[1])
        tp = e.attr("tp")
        if tp:
            ch = ch.aux_shift(tp)
        return ch

    def kval(self, e):
        if e.kind == "leaf":
            return self.leaf_char(e)
        if e.kind == "ksum":
            out = EquivChar()
            for c in e.children:
                out = out + self.kval(c)
            return out
        if e.kind == "kdiff":
            a, b = e.children
            return self.kval(a) - self.kval(b)
        if e.kind == "dual":
            return self.kval(e.children[0]).conj()
        if e.kind == "twist":
            body, line = e.children
            ch = self.kval(body)
            lch = self.kval(line)
            if len(lch.terms) != 1 or set(lch.terms.values()) != {1}:
                raise ValueError("twist by a non-line character")
            (p, q, c), = lch.terms.keys()
            m = e.params[0]
            return ch.shift(m * p, m * q, m * c)
        raise ValueError("not a K-level node: %r" % e.kind)

    def weights(self, e):
        return specialize_weights(self.kval(e), self.spec)

    def cval(self, e):
        if e.kind == "one":
            return PointValue.unit()
        if e.kind == "chern":
            return PointValue(chern_value(self.weights(e.children[0]),
                                          e.params[0]))
        if e.kind == "euler":
            num_ws, den_ws = [], []
            poly = dict(POL_ONE)
            for (w, mult) in self.weights(e.children[0]):
                if w == (0, 0):
                    if mult > 0:
                        return PointValue.zero()
                    raise ValueError("non-isolated or non-generic weights")
                if mult > 0:
                    num_ws.extend([w] * mult)
                else:
                    den_ws.extend([w] * (-mult))
            return PointValue(poly, num_ws, den_ws)
        if e.kind == "delta":
            a, b = e.params
            ws = self.weights(e.children[0])
            rows = [[chern_value(ws, b + j - i) for j in range(a)]
                    for i in range(a)]
            return PointValue(_pol_det(rows))
        if e.kind == "add":
            out = PointValue.zero()
            for c in e.children:
                out = out.plus(self.cval(c))
            return out
        if e.kind == "mul":
            out = PointValue.unit()
            for c in e.children:
                out = out.times(self.cval(c))
            return out
        if e.kind == "scale":
            return self.cval(e.children[0]).scaled(e.params[0])
        raise ValueError("node %r has no equivariant value" % e.kind)


def _pol_det(rows):
    n = len(rows)
    if n == 0:
        return dict(POL_ONE)
    if n == 1:
        return rows[0][0]
    acc = {}
    for i in range(n):
        if not rows[i][0]:
            continue
        minor = [r[1:] for j, r in enumerate(rows) if j != i]
        term = pol_mul(rows[i][0], _pol_det(minor))
        if i % 2:
            term = pol_scale(term, -1)
        acc = pol_add(acc, term)
    return acc


# ---------------------------------------------------------------------------
# the integral


def _point_contribution(ctx, expr, point, spec):
    ev = PointEvaluator(ctx, point, spec)
    val = ev.cval(expr)
    tangent = full_tangent_character(ctx.surface, point, ctx.with_pb)
    den = []
    for (w, mult) in specialize_weights(tangent, spec):
        if w == (0, 0):
            raise ValueError("non-isolated or non-generic weights")
        if mult < 0:
            raise ValueError("non-isolated or non-generic weights")
        den.extend([w] * mult)
    total = PointValue(val.poly, val.num_ws, val.den_ws + den)
    return point_value_laurent(total)


def _draw_spec(rng):
    while True:
        a = rng.randrange(2, 1000)
        b = rng.randrange(1, 1000)
        if a != b and math.gcd(a, b) == 1:
            return (a, b)


_MP_STATE = {}


def _mp_init(surface_json, beta, A, with_pb, expr_json, spec):
    surf = surface_from_json(json.loads(surface_json))
    ctx = LocalizationContext(
        surf, beta=beta, A=A, with_pb=with_pb)
    _MP_STATE["ctx"] = ctx
    _MP_STATE["expr"] = expr_from_json(json.loads(expr_json))
    _MP_STATE["spec"] = spec


def _mp_point(point_data):
    mu, nu, pb = point_data
    point = NestedFixedPoint(mu, nu, pb)
    return _point_contribution(_MP_STATE["ctx"], _MP_STATE["expr"],
                               point, _MP_STATE["spec"])


def equivariant_integrate(expr, surface, n1=0, n2=0, beta=None, A=None,
                          with_pb=None, refined=False, seed=0, threads=1,
                          return_info=False):
    """Integrate a formula over S^[n1] x S^[n2] (times the bundle of
    section lines of ``with_pb`` when given) by summing fixed point
    contributions.

    Exact: the result is a Fraction, or with ``refined`` a RatFunc in
    the auxiliary weight.  A seeded random direction breaks the torus
    to one dimension; collisions redraw deterministically.
    """
    if isinstance(expr, (int, Fraction)):
        expr = FormulaExpr.scale(expr, FormulaExpr.one())
    ctx = LocalizationContext(surface, beta=beta, A=A, with_pb=with_pb)
    points = list(enumerate_fixed_points(surface, n1, n2, with_pb=with_pb,
                                         nested=False))
    rng = random.Random(seed)
    attempts = 0
    while True:
        spec = _draw_spec(rng)
        attempts += 1
        try:
            totals = {}
            if threads > 1:
                payload = (json.dumps(surface_to_json(surface)),
                           beta, A, with_pb,
                           json.dumps(expr_to_json(expr)), spec)
                with multiprocessing.Pool(threads, _mp_init, payload) as pool:
                    results = pool.map(
                        _mp_point,
                        [(p.mu, p.nu, p.pb) for p in points])
            else:
                results = (_point_contribution(ctx, expr, p, spec)
                           for p in points)
            for contrib in results:
                for deg, coef in contrib.items():
                    cur = totals.get(deg)
                    totals[deg] = coef if cur is None else cur + coef
            break
        except _Collision:
            if attempts > 50:
                raise ValueError("non-isolated or non-generic weights")
            continue
    for deg, coef in totals.items():
        if deg < 0 and not coef.is_zero():
            raise ValueError("integral not equivariantly constant")
    value = totals.get(0, R_ZERO)
    if not refined:
        value = value.as_fraction()
    info = {"spec": spec, "seed": seed, "points": len(points),
            "attempts": attempts}
    if return_info:
        return value, info
    return value


def nonequivariant_limit(x):
    """Value of an integral after switching off the auxiliary weight."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, RatFunc):
        return x.at_zero()
    raise TypeError("expected a localized integral value")
