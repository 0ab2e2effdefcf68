"""Projective bundles over a base model and pushforward maps.

A space is modelled by its intersection ring together with enough
structure to push classes down: a projective bundle level remembers the
rank of the bundle it came from, so integration over the fibre is
coefficient extraction in normal form.  The split Grassmannian
pushforward works purely with Chern roots and needs no ambient space at
all; it reduces the localization sum to one exact polynomial division.
"""

from fractions import Fraction
from itertools import combinations

from .ringcore import Ring, GradedClass, KClass


class SpaceModel:
    """A smooth base with a graded ring and an optional bundle structure.

    ``base`` is the model one level down, or None for a root.  For a
    level built by :func:`projective_bundle`, ``fiber_rank`` is the rank
    of the projectivized bundle and ``taut`` holds the tautological
    classes on that level.
    """

    def __init__(self, ring, dim, base=None, fiber_rank=0, bundle=None):
        self.ring = ring
        self.dim = dim
        self.base = base
        self.fiber_rank = fiber_rank
        self.bundle = bundle
        self.taut = {}

    def __repr__(self):
        return "SpaceModel(dim=%d, ring=%r)" % (self.dim, self.ring)


def point_base(D=None):
    """The model of a point: empty ring, dimension zero."""
    return SpaceModel(Ring([], D=D), 0)


def free_model(names, degrees=None, dim=0, D=None):
    """A root model carrying formal classes, for identities on an
    unspecified base."""
    return SpaceModel(Ring(names, degrees=degrees, D=D), dim)


def projective_bundle(space, B, name="h"):
    """The bundle of lines in B over ``space``.

    Adds one degree-one generator ``name`` with the single relation
    sum_i c_i(B) h^(b-i) = 0, where b = rank B.  Tautological classes
    are stored on the returned model under the keys "h", "O1", "U",
    "Q" and "B".
    """
    if not isinstance(B, KClass) or B.ring is not space.ring:
        raise ValueError("bundle must be a K-class on the base ring")
    b = B.rank
    if b < 1:
        raise ValueError("projective bundle needs rank at least 1")
    if name in space.ring.index:
        raise ValueError("generator name %r already in use" % name)

    base_ring = space.ring
    rel_poly = {}
    for i in range(1, b + 1):
        ci = B.c(i)
        for mono, coeff in ci.poly.items():
            key = mono + (b - i,)
            rel_poly[key] = rel_poly.get(key, Fraction(0)) - coeff
    rel_poly = {m: c for m, c in rel_poly.items() if c != 0}

    D_new = None if base_ring.D is None else base_ring.D + (b - 1)
    ring = base_ring.extend([name], degrees=[1], relations={name: (b, rel_poly)})
    if D_new != ring.D:
        ring = ring.truncated(D_new)

    level = SpaceModel(ring, space.dim + (b - 1), base=space,
                       fiber_rank=b, bundle=B)
    h = ring.gen(name)
    B_up = KClass(B.rank, ring.lift(B.chern))
    O1 = KClass.line(h)
    U = KClass.line(-h)
    level.taut = {"h": h, "O1": O1, "U": U, "Q": B_up - U, "B": B_up}
    level.h_index = ring.index[name]
    return level


def proj_pushforward(space, cls):
    """Push a class on a projective bundle level down to its base.

    In normal form the fibre generator h has exponent below the bundle
    rank b, and integration over the fibre picks out the coefficient of
    h^(b-1).  This forces q_* h^(b-1+k) = s_k(B) because the bundle
    relation rewrites higher powers of h through the Segre recursion.
    """
    if space.base is None or space.fiber_rank < 1:
        raise ValueError("not a bundle level")
    if not isinstance(cls, GradedClass) or cls.ring is not space.ring:
        raise ValueError("class does not live on this level")
    b = space.fiber_rank
    j = space.h_index
    out = {}
    for mono, coeff in cls.poly.items():
        if mono[j] >= b:
            raise ValueError("class not in normal form")
        if mono[j] == b - 1:
            key = mono[:j] + mono[j + 1:]
            out[key] = out.get(key, Fraction(0)) + coeff
    return GradedClass(space.base.ring, out)


def integrate(space, cls):
    """Push a class down through every bundle level to the root."""
    while space.base is not None:
        cls = proj_pushforward(space, cls)
        space = space.base
    return cls


def _as_generator(root):
    """Index of a class that is a single generator with coefficient 1."""
    if not isinstance(root, GradedClass) or len(root.poly) != 1:
        raise ValueError("roots must be single generators")
    (mono, coeff), = root.poly.items()
    if coeff != 1 or sum(mono) != 1:
        raise ValueError("roots must be single generators")
    j = mono.index(1)
    if root.ring.degrees[j] != 1:
        raise ValueError("roots must have degree 1")
    return j


def _divide_linear(poly, j, i):
    """Exact division of an exponent-dict polynomial by (x_j - x_i).

    Synthetic division in the variable x_j; the remainder is the
    substitution x_j -> x_i and must vanish.  Returns the quotient dict
    or None if the remainder is nonzero.
    """
    by_k = {}
    for mono, c in poly.items():
        k = mono[j]
        key = mono[:j] + (0,) + mono[j + 1:]
        level = by_k.setdefault(k, {})
        level[key] = level.get(key, Fraction(0)) + c
    deg = max(by_k) if by_k else 0
    quot = {}
    carry = {}
    for k in range(deg, 0, -1):
        new = dict(by_k.get(k, {}))
        for m, c in carry.items():
            mi = m[:i] + (m[i] + 1,) + m[i + 1:]
            new[mi] = new.get(mi, Fraction(0)) + c
        carry = {m: c for m, c in new.items() if c != 0}
        for m, c in carry.items():
            quot[m[:j] + (k - 1,) + m[j + 1:]] = c
    rem = dict(by_k.get(0, {}))
    for m, c in carry.items():
        mi = m[:i] + (m[i] + 1,) + m[i + 1:]
        rem[mi] = rem.get(mi, Fraction(0)) + c
    if any(c != 0 for c in rem.values()):
        return None
    return quot


def grassmann_split_pushforward(roots, r, F):
    """Pushforward from the Grassmann bundle of rank-r subs of a split
    bundle with the given Chern roots.

    ``F`` is a function of r classes, symmetric in its arguments; the
    result is sum_S F(roots_S) / prod_{i in S, j not in S} (b_j - b_i)
    over size-r subsets S.  The sum is assembled over the common
    denominator prod_{i<j} (b_j - b_i) and divided out exactly, so the
    answer is a polynomial class; a nonzero remainder means F was not
    symmetric and raises ValueError.

    The ring must be untruncated, since the intermediate numerator has
    higher degree than the result.
    """
    if not roots:
        raise ValueError("need at least one root")
    ring = roots[0].ring
    if ring.D is not None:
        raise ValueError("split pushforward requires an untruncated ring")
    idx = []
    for root in roots:
        if root.ring is not ring:
            raise ValueError("roots must share a ring")
        j = _as_generator(root)
        if j in ring.rels:
            raise ValueError("roots must be free generators")
        idx.append(j)
    if len(set(idx)) != len(idx):
        raise ValueError("roots must be distinct generators")
    e = len(roots)
    if not 0 <= r <= e:
        raise ValueError("subspace rank out of range")

    numerator = ring.zero()
    for S in combinations(range(e), r):
        in_S = set(S)
        inversions = sum(1 for i in S for j in range(e)
                         if j not in in_S and i > j)
        term = F(*[roots[i] for i in S])
        if not isinstance(term, GradedClass) or term.ring is not ring:
            raise ValueError("F must return classes in the root ring")
        if inversions % 2:
            term = -term
        for i in range(e):
            for j in range(i + 1, e):
                if (i in in_S) == (j in in_S):
                    term = term * (roots[j] - roots[i])
        numerator = numerator + term

    poly = dict(numerator.poly)
    for i in range(e):
        for j in range(i + 1, e):
            poly = _divide_linear(poly, idx[j], idx[i])
            if poly is None:
                raise ValueError("non-symmetric input")
    return GradedClass(ring, poly)
