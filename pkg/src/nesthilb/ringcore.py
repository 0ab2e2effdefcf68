"""Exact graded commutative algebra for intersection-theory computations.

A `Ring` is a truncated polynomial model of a Chow ring: finitely many
named generators, each with a fixed positive degree, exact rational
coefficients, and an optional list of monic single-generator relations
(the kind that arise from projective-bundle towers).  Elements are
`GradedClass` objects; K-theory classes (virtual rank plus total Chern
series) are `KClass` objects.

All arithmetic is exact.  Products silently truncate above the ring's
bound D, mirroring the vanishing of cycle classes above the ambient
dimension.
"""

from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def rational_str(x):
    """Serialize a rational number as "p/q", or "p" when q = 1.

    >>> rational_str(Fraction(-3, 7))
    '-3/7'
    >>> rational_str(Fraction(5))
    '5'
    """
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return "%d/%d" % (x.numerator, x.denominator)


def parse_rational(s):
    """Inverse of rational_str; accepts "p" and "p/q" strings."""
    return Fraction(s)


def binom_general(n, k):
    """Binomial coefficient C(n, k) for any integer n and k >= 0.

    Uses the falling-factorial definition, so negative n is allowed:
    C(n, k) = n (n-1) ... (n-k+1) / k!.  Needed for twisting K-classes
    of negative virtual rank.

    >>> binom_general(-1, 3)
    -1
    >>> binom_general(4, 2)
    6
    """
    if k < 0:
        return 0
    num = 1
    for i in range(k):
        num *= n - i
    den = 1
    for i in range(2, k + 1):
        den *= i
    q, r = divmod(num, den)
    if r:
        raise ArithmeticError("binomial is not an integer")
    return q


class Ring:
    """Truncated graded polynomial ring with rational coefficients.

    Parameters
    ----------
    names : list of generator names (strings, all distinct)
    degrees : list of positive integer degrees, parallel to names
        (defaults to all 1)
    D : truncation bound, a non-negative integer, or None for no bound
    relations : dict name -> (power, replacement) where replacement is a
        dict {exponent tuple: Fraction} meaning gen**power = replacement.
        Each replacement must be homogeneous of degree power*deg(gen) and
        must only involve the generator itself to exponents < power.
    """

    def __init__(self, names, degrees=None, D=None, relations=None):
        names = list(names)
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        if degrees is None:
            degrees = [1] * len(names)
        degrees = [int(d) for d in degrees]
        if any(d <= 0 for d in degrees):
            raise ValueError("generator degrees must be positive")
        if len(degrees) != len(names):
            raise ValueError("names and degrees must have equal length")
        self.names = tuple(names)
        self.degrees = tuple(degrees)
        self.index = {n: i for i, n in enumerate(names)}
        self.D = None if D is None else int(D)
        self.rels = {}
        if relations:
            for name, (power, repl) in relations.items():
                i = self.index[name]
                repl = {tuple(m): Fraction(c) for m, c in repl.items() if c}
                for m in repl:
                    if len(m) != len(names):
                        raise ValueError("relation monomial has wrong arity")
                    if m[i] >= power:
                        raise ValueError("relation replacement not reduced")
                    if self.mdeg(m) != power * degrees[i]:
                        raise ValueError("relation is not homogeneous")
                self.rels[i] = (int(power), repl)

    def mdeg(self, mono):
        return sum(e * d for e, d in zip(mono, self.degrees))

    def zero(self):
        return GradedClass(self, {}, reduced=True)

    def one(self):
        return self.const(1)

    def const(self, c):
        c = Fraction(c)
        if c == 0:
            return self.zero()
        return GradedClass(self, {(0,) * len(self.names): c}, reduced=True)

    def gen(self, name):
        i = self.index[name]
        mono = tuple(1 if j == i else 0 for j in range(len(self.names)))
        return GradedClass(self, {mono: ONE})

    def gens(self):
        return [self.gen(n) for n in self.names]

    def from_dict(self, poly):
        return GradedClass(self, {tuple(m): Fraction(c) for m, c in poly.items()})

    def extend(self, names, degrees=None, relations=None):
        """New ring with extra generators appended; relations may refer to
        old and new generators (monomials in the extended arity).
        Existing relations are carried over."""
        if degrees is None:
            degrees = [1] * len(names)
        old_n = len(self.names)
        pad = len(names)
        rels = {}
        for i, (p, repl) in self.rels.items():
            rels[self.names[i]] = (p, {m + (0,) * pad: c for m, c in repl.items()})
        if relations:
            rels.update(relations)
        return Ring(list(self.names) + list(names),
                    list(self.degrees) + list(degrees),
                    D=self.D, relations=rels)

    def truncated(self, D):
        """Same generators and relations, different truncation bound."""
        rels = {self.names[i]: (p, dict(repl)) for i, (p, repl) in self.rels.items()}
        return Ring(self.names, self.degrees, D=D, relations=rels)

    def lift(self, x, other=None):
        """Map a class from a ring whose generators are a prefix of (or are
        contained, by name, in) this ring's generators."""
        src = x.ring
        pos = [self.index[n] for n in src.names]
        n = len(self.names)
        poly = {}
        for m, c in x.poly.items():
            mono = [0] * n
            for p, e in zip(pos, m):
                mono[p] = e
            poly[tuple(mono)] = c
        return GradedClass(self, poly)

    def cast(self, x):
        """Re-interpret a class from another ring with identical generator
        names (by name lookup), reducing in this ring."""
        return self.lift(x)

    def _reduce(self, poly):
        out = {}
        stack = [(m, c) for m, c in poly.items() if c]
        while stack:
            mono, coeff = stack.pop()
            if self.D is not None and self.mdeg(mono) > self.D:
                continue
            hit = None
            for i, (p, repl) in self.rels.items():
                if mono[i] >= p:
                    hit = (i, p, repl)
                    break
            if hit is None:
                v = out.get(mono, ZERO) + coeff
                if v:
                    out[mono] = v
                else:
                    out.pop(mono, None)
            else:
                i, p, repl = hit
                rest = list(mono)
                rest[i] -= p
                for rm, rc in repl.items():
                    new = tuple(a + b for a, b in zip(rest, rm))
                    stack.append((new, coeff * rc))
        return out

    def __eq__(self, other):
        return (isinstance(other, Ring) and self.names == other.names
                and self.degrees == other.degrees and self.D == other.D
                and self.rels == other.rels)

    def __hash__(self):
        return hash((self.names, self.degrees, self.D))

    def __repr__(self):
        rel = ", ".join("%s^%d -> ..." % (self.names[i], p)
                        for i, (p, _) in sorted(self.rels.items()))
        return "Ring(%s; D=%s%s)" % (",".join(self.names), self.D,
                                     "; " + rel if rel else "")


class GradedClass:
    """Element of a Ring: sparse polynomial in normal form.

    The defining data is a dict {exponent tuple: Fraction}.  Components
    are recovered by weighted degree; every stored monomial has degree
    at most the ring's bound D.
    """

    __slots__ = ("ring", "poly")

    def __init__(self, ring, poly, reduced=False):
        self.ring = ring
        if not reduced:
            poly = ring._reduce(poly)
        self.poly = poly

    def _coerce(self, other):
        if isinstance(other, GradedClass):
            if other.ring != self.ring:
                raise ValueError("classes from different rings")
            return other
        return self.ring.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        poly = dict(self.poly)
        for m, c in other.poly.items():
            v = poly.get(m, ZERO) + c
            if v:
                poly[m] = v
            else:
                poly.pop(m, None)
        return GradedClass(self.ring, poly, reduced=True)

    __radd__ = __add__

    def __neg__(self):
        return GradedClass(self.ring, {m: -c for m, c in self.poly.items()},
                           reduced=True)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if c == 0:
                return self.ring.zero()
            return GradedClass(self.ring,
                               {m: v * c for m, v in self.poly.items()},
                               reduced=True)
        other = self._coerce(other)
        ring = self.ring
        D = ring.D
        out = {}
        for m1, c1 in self.poly.items():
            d1 = ring.mdeg(m1)
            for m2, c2 in other.poly.items():
                if D is not None and d1 + ring.mdeg(m2) > D:
                    continue
                m = tuple(a + b for a, b in zip(m1, m2))
                v = out.get(m, ZERO) + c1 * c2
                if v:
                    out[m] = v
                else:
                    del out[m]
        return GradedClass(ring, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power of a graded class")
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base_needed = n >> 1
            if base_needed:
                base = base * base
            n = base_needed
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        return isinstance(other, GradedClass) and self.ring == other.ring \
            and self.poly == other.poly

    def __hash__(self):
        return hash(frozenset(self.poly.items()))

    def is_zero(self):
        return not self.poly

    def constant(self):
        key = (0,) * len(self.ring.names)
        return self.poly.get(key, ZERO)

    def component(self, k):
        """Homogeneous piece of weighted degree k (zero class for k < 0
        or k above the truncation bound)."""
        ring = self.ring
        if k < 0 or (ring.D is not None and k > ring.D):
            return ring.zero()
        poly = {m: c for m, c in self.poly.items() if ring.mdeg(m) == k}
        return GradedClass(ring, poly, reduced=True)

    def components(self):
        """Dict degree -> homogeneous GradedClass, only nonzero pieces."""
        ring = self.ring
        parts = {}
        for m, c in self.poly.items():
            parts.setdefault(ring.mdeg(m), {})[m] = c
        return {k: GradedClass(ring, p, reduced=True)
                for k, p in sorted(parts.items())}

    def max_degree(self):
        if not self.poly:
            return -1
        return max(self.ring.mdeg(m) for m in self.poly)

    def coefficient(self, mono):
        return self.poly.get(tuple(mono), ZERO)

    def subs_gen_degree(self):
        return self

    def __repr__(self):
        if not self.poly:
            return "0"
        ring = self.ring
        terms = []
        for m in sorted(self.poly, key=lambda m: (ring.mdeg(m), m)):
            c = self.poly[m]
            factors = []
            for name, e in zip(ring.names, m):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append("%s^%d" % (name, e))
            body = "*".join(factors)
            if not body:
                terms.append(rational_str(c))
            elif c == 1:
                terms.append(body)
            elif c == -1:
                terms.append("-" + body)
            else:
                terms.append(rational_str(c) + "*" + body)
        s = " + ".join(terms)
        return s.replace("+ -", "- ")


def series_invert(c):
    """Multiplicative inverse of a series with constant term 1.

    Returns s with s*c = 1 up to the ring truncation.  Raises ValueError
    for series whose degree-0 part is not 1.

    >>> R = Ring(["x"], D=4)
    >>> series_invert(R.one() + R.gen("x"))
    1 - x + x^2 - x^3 + x^4
    """
    if not isinstance(c, GradedClass):
        raise TypeError("expected a GradedClass")
    if c.constant() != 1:
        raise ValueError("non-invertible series")
    ring = c.ring
    if ring.D is None:
        raise ValueError("series inversion requires a truncated ring")
    parts = c.components()
    s = {0: ring.one()}
    total = ring.one()
    for k in range(1, ring.D + 1):
        acc = ring.zero()
        for j in range(1, k + 1):
            cj = parts.get(j)
            if cj is None:
                continue
            sj = s.get(k - j)
            if sj is None or sj.is_zero():
                continue
            acc = acc + cj * sj
        sk = -acc
        if not sk.is_zero():
            s[k] = sk
            total = total + sk
    return total


def _det(rows):
    """Determinant of a square matrix of GradedClass entries by cofactor
    expansion along the first column."""
    n = len(rows)
    if n == 0:
        raise ValueError("empty matrix")
    if n == 1:
        return rows[0][0]
    ring = rows[0][0].ring
    acc = ring.zero()
    for i in range(n):
        entry = rows[i][0]
        if entry.is_zero():
            continue
        minor = [r[1:] for j, r in enumerate(rows) if j != i]
        term = entry * _det(minor)
        acc = acc + term if i % 2 == 0 else acc - term
    return acc


def delta_det(a, b, c):
    """The a x a determinant det(c_{b+j-i}) of components of a series.

    Components with index < 0 or above the ring truncation count as 0.
    Returns the ring unit for a = 0.

    >>> R = Ring(["c1", "c2"], degrees=[1, 2], D=4)
    >>> c = R.one() + R.gen("c1") + R.gen("c2")
    >>> delta_det(2, 1, c)
    c1^2 - c2
    """
    if a < 0:
        raise ValueError("invalid")
    ring = c.ring
    if a == 0:
        return ring.one()
    rows = [[c.component(b + (j + 1) - (i + 1)) for j in range(a)]
            for i in range(a)]
    return _det(rows)


class KClass:
    """Virtual rank plus total Chern series, the unit of formula arithmetic.

    The chern series must have degree-0 part exactly 1.  Sum is Whitney
    (ranks add, series multiply); difference divides the series.
    """

    __slots__ = ("rank", "chern")

    def __init__(self, rank, chern):
        if not isinstance(chern, GradedClass):
            raise TypeError("chern must be a GradedClass")
        if chern.constant() != 1:
            raise ValueError("chern series must have constant term 1")
        self.rank = int(rank)
        self.chern = chern

    @property
    def ring(self):
        return self.chern.ring

    @classmethod
    def trivial(cls, ring, rank):
        return cls(rank, ring.one())

    @classmethod
    def line(cls, c1):
        """Line bundle with the given first Chern class (degree-1 class)."""
        return cls(1, c1.ring.one() + c1)

    @classmethod
    def from_roots(cls, roots):
        """Sum of line bundles with the given degree-1 Chern roots."""
        if not roots:
            raise ValueError("need at least one root (use trivial instead)")
        ring = roots[0].ring
        c = ring.one()
        for r in roots:
            c = c * (ring.one() + r)
        return cls(len(roots), c)

    def __add__(self, other):
        return KClass(self.rank + other.rank, self.chern * other.chern)

    def __sub__(self, other):
        return KClass(self.rank - other.rank,
                      self.chern * series_invert(other.chern))

    def __neg__(self):
        return KClass(-self.rank, series_invert(self.chern))

    def __eq__(self, other):
        return isinstance(other, KClass) and self.rank == other.rank \
            and self.chern == other.chern

    def c(self, k):
        return self.chern.component(k)

    def dual(self):
        return k_dual(self)

    def twist(self, h, m=1):
        return k_twist(self, h, m)

    def __repr__(self):
        return "KClass(rank=%d, c=%r)" % (self.rank, self.chern)


def k_dual(E):
    """Dual K-class: rank unchanged, c_i picks up the sign (-1)^i."""
    ring = E.ring
    poly = {}
    for m, c in E.chern.poly.items():
        d = ring.mdeg(m)
        poly[m] = c if d % 2 == 0 else -c
    return KClass(E.rank, GradedClass(ring, poly, reduced=True))


def k_twist(E, h, m=1):
    """Tensor a K-class by the m-th power of a line class with c_1 = h.

    Implements c_k(E otimes l^m) = sum_i C(rank-i, k-i) c_i(E) (m h)^{k-i}
    with generalized binomial coefficients, which is the unique extension
    consistent with the splitting principle for arbitrary (also negative)
    virtual rank.
    """
    ring = E.ring
    if ring.D is None:
        raise ValueError("k_twist requires a truncated ring")
    if not isinstance(h, GradedClass) or h.ring != ring:
        raise ValueError("twist class must live in the same ring")
    if not h.is_zero() and set(h.components()) != {1}:
        raise ValueError("twist class must be homogeneous of degree 1")
    if m == 0 or h.is_zero():
        return E
    mh = h * m
    parts = E.chern.components()
    hp = {0: ring.one()}
    for k in range(1, ring.D + 1):
        hp[k] = hp[k - 1] * mh
    total = ring.zero()
    for k in range(0, ring.D + 1):
        acc = ring.zero()
        for i, ci in parts.items():
            if i > k:
                continue
            b = binom_general(E.rank - i, k - i)
            if b == 0:
                continue
            acc = acc + (ci * hp[k - i]) * b
        total = total + acc
    return KClass(E.rank, total)
