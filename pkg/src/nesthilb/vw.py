"""Seiberg-Witten coupled layer: the rank-two monopole integrand over
pairs of Hilbert schemes, curve-class contributions weighted by
Seiberg-Witten invariants, the pushforward formulas the evaluation
branches on, and exact universal-polynomial fits across surfaces.

A monopole contribution at total length n is the invariant of the
curve class times a torsion-counting power of two times the sum over
splittings n = n1 + n2 of an integral over S^[n1] x S^[n2].  The
integrand couples the Chern class of minus the nesting complex to a
ratio of Euler classes of circle-weighted pair complexes; everything
is built as one formula tree and handed to the equivariant evaluator.
"""

from fractions import Fraction

from .ringcore import rational_str
from .surface import ToricSurface, vd_beta
from .porteous import FormulaExpr, ZERO_CLASS, rhom, pushO, sw_factor, \
    pic_point, normalize, nested_reduced_formula
from .hilbloc import RatFunc, equivariant_integrate, nonequivariant_limit


def _negated(x):
    return FormulaExpr.kdiff(FormulaExpr.ksum(), x)


def _as_ratfunc(x):
    if isinstance(x, RatFunc):
        return x
    return RatFunc.const(x)


class SWTable:
    """Seiberg-Witten data of one surface: an integer invariant per
    curve class, plus optional higher pairing numbers consumed by the
    irregular-surface pushforward formula.

    The invariant is the degree of the zero-dimensional virtual curve
    locus and vanishes by definition whenever that locus has nonzero
    virtual dimension.  Entries breaking this are rejected unless the
    table is opened in higher mode, where a stored number is read as a
    pairing instead of a degree.
    """

    def __init__(self, surface, entries=None, higher=None,
                 higher_mode=False):
        self.surface = surface
        self.entries = {}
        self.higher = {}
        source = surface.sw_table if entries is None else entries
        for beta, value in (source or {}).items():
            key = tuple(surface.cls(beta))
            if isinstance(value, tuple):
                value, extra = value
                self.higher[key] = tuple(Fraction(x) for x in extra)
            value = Fraction(value)
            if value and not higher_mode \
                    and vd_beta(surface, key) != 0:
                raise ValueError(
                    "invariant must vanish at nonzero virtual dimension"
                    " (class %r)" % (key,))
            self.entries[key] = value
        for beta, extra in (higher or {}).items():
            self.higher[tuple(surface.cls(beta))] = \
                tuple(Fraction(x) for x in extra)

    @classmethod
    def from_surface(cls, surface, higher=None, higher_mode=False):
        return cls(surface, None, higher, higher_mode)

    def __contains__(self, beta):
        return tuple(self.surface.cls(beta)) in self.entries

    def invariant(self, beta):
        key = tuple(self.surface.cls(beta))
        if key not in self.entries:
            raise ValueError("missing SW entry for class %r" % (key,))
        return self.entries[key]

    def pairing(self, beta, j):
        """The j-th pushforward pairing; j = 0 is the invariant."""
        if j == 0:
            return self.invariant(beta)
        extra = self.higher.get(tuple(self.surface.cls(beta)), ())
        return extra[j - 1] if j - 1 < len(extra) else Fraction(0)

    def as_table(self):
        """Leaf-resolution format: class -> (invariant, higher)."""
        out = {}
        for key, value in self.entries.items():
            out[key] = (value, self.higher.get(key, ()))
        for key, extra in self.higher.items():
            out.setdefault(key, (Fraction(0), extra))
        return out


def format_value(value, order=0):
    """Loss-free text for a rational number; for a weight-dependent
    rational function, space-separated expansion coefficients."""
    if isinstance(value, RatFunc):
        if value.is_constant():
            return rational_str(value.as_fraction())
        return " ".join(rational_str(c) for c in value.series(order))
    return rational_str(Fraction(value))


class MonopoleResult:
    """One curve class contribution with its per-splitting terms.

    The value is an exact rational number, or an exact rational
    function of the circle weight in refined mode.  Construction
    enforces weight independence whenever the refinement flag is off.
    """

    __slots__ = ("beta", "n", "value", "terms", "refined", "meta")

    def __init__(self, beta, n, value, terms=None, refined=False,
                 meta=None):
        self.beta = tuple(beta)
        self.n = n
        self.refined = refined
        self.terms = dict(terms or {})
        self.meta = dict(meta or {})
        if not refined:
            if isinstance(value, RatFunc):
                value = value.as_fraction()
            value = Fraction(value)
            assert nonequivariant_limit(value) == value
        self.value = value

    def series(self, order):
        return _as_ratfunc(self.value).series(order)

    def rows(self, order=None):
        """CSV-ready dictionaries, one per splitting plus a total row
        with blank splitting columns."""
        if order is None:
            order = self.meta.get("order") or 0
        out = [self._row(n1, n2, self.terms[(n1, n2)], order)
               for (n1, n2) in sorted(self.terms)]
        out.append(self._row("", "", self.value, order))
        return out

    def _row(self, n1, n2, value, order):
        return {"beta": " ".join(rational_str(x) for x in self.beta),
                "n": self.n, "n1": n1, "n2": n2,
                "value": format_value(value, order), "t_order": order}

    def __repr__(self):
        return "MonopoleResult(beta=%r, n=%r, value=%r)" % (
            self.beta, self.n, self.value)


ROW_FIELDS = ("beta", "n", "n1", "n2", "value", "t_order")


def monopole_integrand(n1, n2, beta=None, L=None, surface=None):
    """Integrand of one splitting of the rank-two monopole
    contribution: the Chern class of minus the nesting complex times
    the Euler classes of the two positively-moving pair complexes over
    those of the three negatively-moving ones.

    Twists are symbolic: the curve class binds at evaluation time, so
    beta, L and surface are accepted only for job bookkeeping.  Every
    Euler argument carries a nonzero circle weight, which is what
    makes the ratio well defined in localized cohomology.
    """
    n = n1 + n2
    return FormulaExpr.mul(
        FormulaExpr.chern(n, _negated(rhom(1, 2, bc=1))),
        FormulaExpr.euler(rhom(2, 1, bc=-1, kc=1, tp=1)),
        FormulaExpr.euler(rhom(1, 2, bc=1, kc=-1, tp=-1)),
        FormulaExpr.euler(_negated(rhom(1, 1, kc=1, tp=1,
                                        trace_free=True))),
        FormulaExpr.euler(_negated(rhom(2, 2, kc=1, tp=1))),
        FormulaExpr.euler(_negated(rhom(2, 1, bc=-1, kc=2, tp=2))))


def _surface_data(surface):
    return surface.data if hasattr(surface, "data") else surface


def point_contribution(surface, beta, n, refined=False, order=None,
                       seed=0, threads=1, point_table=None):
    """Sum over splittings n = n1 + n2 of the monopole integrand
    integral, without the Seiberg-Witten weight or the torsion
    prefactor.  These are the numbers the universality statement is
    about: they depend on the surface only through c1^2, c2, beta^2
    and c1.beta.

    Non-toric profiles must supply the integrals through
    ``point_table`` keyed by (class, n1, n2).
    """
    data = _surface_data(surface)
    key = tuple(surface.cls(beta))
    terms = {}
    total = RatFunc(())
    for n1 in range(n + 1):
        n2 = n - n1
        if point_table is not None \
                and (key, n1, n2) in point_table:
            term = point_table[(key, n1, n2)]
        elif isinstance(surface, ToricSurface):
            term = equivariant_integrate(
                monopole_integrand(n1, n2), surface, n1, n2, beta=key,
                refined=True, seed=seed, threads=threads)
        else:
            raise ValueError("point contributions need a toric surface"
                             " or a supplied table")
        terms[(n1, n2)] = term
        total = total + _as_ratfunc(term)
    meta = {"surface": data.name, "seed": seed, "order": order,
            "kind": "point"}
    return MonopoleResult(key, n, total, terms, refined, meta)


def monopole_contribution(surface, sw, beta, n, refined=False,
                          order=None, seed=0, threads=1, window=None,
                          point_table=None):
    """Weighted contribution of one curve class at total length n:

        SW * 4^q * (sum of splitting integrals).

    ``sw`` is an SWTable or a plain class-to-invariant map.  ``window``
    is caller-supplied slope data (deg beta, deg K); a class outside
    the stable range is excluded and contributes the zero result.  A
    class whose curve locus has nonzero virtual dimension contributes
    zero by the definition of the invariant, with no table entry
    needed.
    """
    data = _surface_data(surface)
    if not isinstance(sw, SWTable):
        sw = SWTable(surface, sw)
    key = tuple(surface.cls(beta))
    meta = {"surface": data.name, "seed": seed, "order": order,
            "kind": "monopole"}
    if window is not None:
        deg_b, deg_k = window
        if not deg_b < deg_k:
            meta["excluded"] = "outside slope window"
            return MonopoleResult(key, n, Fraction(0), {}, refined, meta)
    if vd_beta(surface, key) != 0:
        return MonopoleResult(key, n, Fraction(0), {}, refined, meta)
    weight = sw.invariant(key) * Fraction(4) ** data.q
    if weight == 0:
        return MonopoleResult(key, n, Fraction(0), {}, refined, meta)
    point = point_contribution(surface, key, n, refined=True,
                               order=order, seed=seed, threads=threads,
                               point_table=point_table)
    value = _as_ratfunc(point.value) * weight
    return MonopoleResult(key, n, value, point.terms, refined, meta)


MONOMIALS = ("1", "c1sq", "c2", "betasq", "c1beta")


def monomial_value(name, surface, beta):
    """One of the four intersection numbers (or the constant 1)."""
    data = _surface_data(surface)
    if name == "1":
        return Fraction(1)
    if name == "c1sq":
        return Fraction(data.K2)
    if name == "c2":
        return Fraction(data.e)
    if name == "betasq":
        return surface.dot(beta, beta)
    if name == "c1beta":
        return -surface.dot(beta, surface.K)
    raise ValueError("unknown monomial %r" % (name,))


def _solve_affine(rows, values):
    """Exact elimination for an overdetermined linear system; returns
    the coefficient list.  Values may be rational numbers or rational
    functions of the circle weight; the arithmetic follows the
    values."""
    refined = any(isinstance(v, RatFunc) for v in values)
    lift = _as_ratfunc if refined else Fraction

    def is_zero(x):
        return x.is_zero() if refined else x == 0
    m = len(rows[0])
    aug = [[lift(x) for x in row] + [lift(v)]
           for row, v in zip(rows, values)]
    pivots = []
    rank = 0
    for col in range(m):
        pivot = next((i for i in range(rank, len(aug))
                      if not is_zero(aug[i][col])), None)
        if pivot is None:
            continue
        aug[rank], aug[pivot] = aug[pivot], aug[rank]
        head = aug[rank][col]
        aug[rank] = [x / head for x in aug[rank]]
        for i in range(len(aug)):
            if i != rank and not is_zero(aug[i][col]):
                factor = aug[i][col]
                aug[i] = [a - factor * b
                          for a, b in zip(aug[i], aug[rank])]
        pivots.append(col)
        rank += 1
    if rank < m:
        raise ValueError("insufficient surface spread")
    for i in range(rank, len(aug)):
        if not is_zero(aug[i][m]):
            raise ValueError("universality violated")
    coefs = [lift(0)] * m
    for r, col in enumerate(pivots):
        coefs[col] = aug[r][m]
    return coefs


def universality_fit(n, runs, monomials=None, refined=True, seed=0,
                     threads=1):
    """Fit point contributions at fixed total length n by an exact
    affine polynomial in the intersection numbers.

    Each run is (surface, beta), optionally with a precomputed value as
    third component.  The solve is exact: a rank-deficient design
    means the runs cannot separate the monomials, and any nonzero
    residual means the integrals are not a function of the four
    numbers; both are errors, never a best fit.
    """
    names = list(monomials) if monomials is not None else list(MONOMIALS)
    rows, values, labels = [], [], []
    for run in runs:
        surface, beta = run[0], run[1]
        if len(run) > 2:
            value = run[2]
        else:
            value = point_contribution(surface, beta, n, refined=refined,
                                       seed=seed, threads=threads).value
        rows.append([monomial_value(name, surface, beta)
                     for name in names])
        values.append(value)
        labels.append((_surface_data(surface).name,
                       tuple(surface.cls(beta))))
    seen = {}
    for row, value, label in zip(rows, values, labels):
        sig = tuple(row)
        if sig in seen:
            other_value, other_label = seen[sig]
            if _as_ratfunc(other_value) != _as_ratfunc(value):
                raise ValueError(
                    "universality violated: %r and %r share invariants"
                    " but differ" % (other_label, label))
        seen[sig] = (value, label)
    coefs = _solve_affine(rows, values)
    for row, value in zip(rows, values):
        fitted = _as_ratfunc(0)
        for c, x in zip(coefs, row):
            fitted = fitted + _as_ratfunc(c) * x
        if fitted != _as_ratfunc(value):
            raise ValueError("universality violated")
    return {"n": n,
            "monomials": names,
            "coefficients": dict(zip(names, coefs)),
            "residual": 0,
            "degree_bound": 1,
            "runs": len(runs)}


def fit_report(fit, order=4):
    """JSON-ready form of a fit: coefficients keyed by monomial, each
    a loss-free string (expansion coefficients when refined)."""
    return {"n": fit["n"],
            "monomials": list(fit["monomials"]),
            "coefficients": {name: format_value(value, order)
                             for name, value in
                             fit["coefficients"].items()},
            "residual": format_value(fit["residual"]),
            "degree_bound": fit["degree_bound"],
            "runs": fit["runs"]}


CASES = ("pg>0", "pg=0-effective", "pg=0-noneffective")


def sw_coupled_pushforward(case, i, n1, n2, beta, surface, swTable=None,
                           check=True):
    """Pushforward of h^i capped with the nested virtual class, as a
    formula tree in the branch selected by ``case``.

    pg>0: the invariant times the Chern class of minus the nesting
    complex over the point class of the Picard torus; the zero class
    for positive i.  pg=0-effective: the general irregular form, a
    j-sum of Chern classes coupled to higher pairings.
    pg=0-noneffective: a single shifted-degree Chern class, valid when
    the dual curve class carries no curves.

    ``check`` tests the case against the surface profile and the
    effectivity heuristic; disable it when the caller has better
    geometric information.  With ``swTable`` supplied the invariant
    leaves are resolved and the tree is returned in normal form.
    """
    data = _surface_data(surface)
    n = n1 + n2
    if case == "pg>0":
        if check and data.pg == 0:
            raise ValueError("inconsistent flags: profile has p_g = 0")
        if i > 0:
            expr = ZERO_CLASS
        else:
            expr = FormulaExpr.mul(
                sw_factor(0, bc=1),
                FormulaExpr.chern(n, _negated(rhom(1, 2, bc=1))),
                pic_point())
    elif case == "pg=0-effective":
        if check and data.pg != 0:
            raise ValueError("inconsistent flags: profile has p_g > 0")
        expr = FormulaExpr.add(*[
            FormulaExpr.mul(
                FormulaExpr.chern(n - j, FormulaExpr.kdiff(
                    pushO(bc=1), rhom(1, 2, bc=1))),
                sw_factor(i + j, bc=1))
            for j in range(n + 1)])
    elif case == "pg=0-noneffective":
        if check and data.pg != 0:
            raise ValueError("inconsistent flags: profile has p_g > 0")
        dual_cls = surface.sub(surface.K, surface.cls(beta))
        if check and surface.is_effective(dual_cls):
            raise ValueError("inconsistent flags: dual class is"
                             " effective")
        d = n + data.q - vd_beta(surface, beta)
        expr = FormulaExpr.chern(d + i, _negated(rhom(1, 2, bc=1)))
    else:
        raise ValueError("unknown case %r" % (case,))
    if swTable is not None:
        table = swTable.as_table() if isinstance(swTable, SWTable) \
            else swTable
        return normalize(expr, surface, beta, sw_table=table)
    return expr


def virtual_class_route(n1, n2, surface, beta, A=None,
                        h2_vanishing=False):
    """Pushforward class of the plain virtual cycle through the
    section-bundle route.  The reduced cycle needs the caller-certified
    vanishing flag; the virtual class then differs from it by the Euler
    class of a trivial obstruction piece of rank p_g, so any positive
    geometric genus forces the zero class.
    """
    data = _surface_data(surface)
    if A is None:
        A = surface.zero_class()
    reduced, _ = nested_reduced_formula(n1, n2, surface, beta, A,
                                        h2_vanishing=h2_vanishing)
    if data.pg > 0:
        # top Chern class of a trivial rank-p_g bundle
        return ZERO_CLASS
    return reduced
