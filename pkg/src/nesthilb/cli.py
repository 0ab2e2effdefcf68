"""Batch front-end: one process runs one job.

A job is a single JSON object (a command plus its inputs), optionally
layered under command-line flag overrides; flags win.  No environment
variables are consulted.  Output is a deterministic function of the
job and its seed, every number is emitted in loss-free p/q form, and
failures exit with a machine-readable error document:

    0  success
    2  malformed job (schema)
    3  violated mathematical invariant
    4  universality failure (nonzero residual or bad design)
"""

import argparse
import csv
import io
import json
import sys
from math import comb

from .ringcore import Ring, GradedClass, KClass, series_invert, \
    rational_str, parse_rational
from .bundles import grassmann_split_pushforward
from .surface import load_surface
from .porteous import FormulaExpr, FormalEnv, eval_formal, expr_to_json, \
    expr_from_json, degeneracy_pushforward_X, degeneracy_pushforward_GrB, \
    nested_reduced_formula, co_class
from .hilbloc import EquivChar, partitions, box_character, \
    tangent_character, rhom_character, structure_numerator, \
    equivariant_integrate
from .vw import SWTable, monopole_contribution, universality_fit, \
    fit_report, format_value, ROW_FIELDS

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_MATH = 3
EXIT_RESIDUAL = 4

COMMANDS = ("verify", "push", "integrate", "vw", "fit")
FORMATS = ("json", "csv", "text")
EVALUATORS = ("formal", "equivariant")
SUITE_NAMES = ("porteous", "delta", "segre", "euler", "characters", "all")

# the evaluator each command runs on; verify exercises both internally
COMMAND_EVALUATOR = {"verify": None, "push": "formal",
                     "integrate": "equivariant", "vw": "equivariant",
                     "fit": "equivariant"}

DEFAULT_FIT_RUNS = (("P2", (1,)), ("P2", (2,)), ("P1xP1", (1, 1)),
                    ("P1xP1", (2, 2)), ("F2", (2, 1)), ("F2", (4, 2)))
DEFAULT_FIT_MONOMIALS = ("1", "c1sq", "betasq", "c1beta")


class SchemaError(ValueError):
    """The job object does not satisfy the schema."""


# ---------------------------------------------------------------------------
# job specification


def _require_int(value, name, least=None):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise SchemaError("field %r must be an integer" % name)
    try:
        value = int(value)
    except ValueError:
        raise SchemaError("field %r must be an integer" % name)
    if least is not None and value < least:
        raise SchemaError("field %r must be at least %d" % (name, least))
    return value


def _parse_vector(value, name):
    if value is None:
        return None
    if isinstance(value, str):
        value = value.split(",")
    if not isinstance(value, (list, tuple)) or not value:
        raise SchemaError("field %r must be a lattice vector" % name)
    out = []
    for entry in value:
        try:
            out.append(parse_rational(str(entry)))
        except (ValueError, ZeroDivisionError):
            raise SchemaError("field %r has a non-rational entry %r"
                              % (name, entry))
    return tuple(out)


def _parse_n(value):
    if value is None:
        return None
    if isinstance(value, str) and ":" in value:
        value = value.split(":")
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise SchemaError("field 'n' range must be a pair")
        lo = _require_int(value[0], "n", least=0)
        hi = _require_int(value[1], "n", least=0)
        if hi < lo:
            raise SchemaError("field 'n' range is empty")
        return tuple(range(lo, hi + 1))
    return (_require_int(value, "n", least=0),)


class JobSpec:
    """One validated batch job.

    Collects the command, the geometric inputs (surface, curve classes,
    lengths), the formula or suite to run, evaluator and output
    options, and the seed that fixes the weight specialization.
    """

    FIELDS = ("command", "surface", "beta", "A", "n", "n1", "n2",
              "formula", "suite", "evaluator", "format", "order",
              "seed", "threads", "out", "runs", "sw", "params")

    def __init__(self, doc):
        if not isinstance(doc, dict):
            raise SchemaError("job must be a JSON object")
        for key in doc:
            if key not in self.FIELDS:
                raise SchemaError("unknown field %r" % key)

        self.command = doc.get("command")
        if self.command not in COMMANDS:
            raise SchemaError("command must be one of %s"
                              % ", ".join(COMMANDS))

        self.surface_ref = doc.get("surface")
        self.surface = None
        if self.surface_ref is not None:
            try:
                self.surface = load_surface(self.surface_ref)
            except (ValueError, OSError, KeyError) as err:
                raise SchemaError("bad surface: %s" % err)

        self.beta = _parse_vector(doc.get("beta"), "beta")
        self.A = _parse_vector(doc.get("A"), "A")
        for name, vec in (("beta", self.beta), ("A", self.A)):
            if vec is not None and self.surface is not None:
                try:
                    self.surface.cls(vec)
                except (ValueError, TypeError, IndexError):
                    raise SchemaError(
                        "field %r does not fit the surface lattice" % name)

        self.n_range = _parse_n(doc.get("n"))
        self.n1 = _require_int(doc.get("n1", 0), "n1", least=0)
        self.n2 = _require_int(doc.get("n2", 0), "n2", least=0)
        self.formula = doc.get("formula")
        self.suite = doc.get("suite")
        self.order = _require_int(doc.get("order", 0), "order", least=0)
        self.seed = _require_int(doc.get("seed", 0), "seed")
        self.threads = _require_int(doc.get("threads", 1), "threads",
                                    least=1)
        self.out = doc.get("out")
        self.runs = doc.get("runs")
        self.sw = doc.get("sw")
        self.params = doc.get("params") or {}
        if not isinstance(self.params, dict):
            raise SchemaError("field 'params' must be an object")

        self.format = doc.get("format") or "text"
        if self.format not in FORMATS:
            raise SchemaError("format must be one of %s"
                              % ", ".join(FORMATS))
        want = COMMAND_EVALUATOR[self.command]
        self.evaluator = doc.get("evaluator") or want or "equivariant"
        if self.evaluator not in EVALUATORS:
            raise SchemaError("evaluator must be one of %s"
                              % ", ".join(EVALUATORS))
        if want is not None and self.evaluator != want:
            raise SchemaError("command %r runs on the %s evaluator"
                              % (self.command, want))

        self._check_required()

    def _check_required(self):
        need = []
        if self.command == "verify":
            if self.suite not in SUITE_NAMES:
                raise SchemaError("suite must be one of %s"
                                  % ", ".join(SUITE_NAMES))
        elif self.command == "push":
            if not self.formula:
                need.append("formula")
        elif self.command == "integrate":
            if self.surface is None:
                need.append("surface")
            if not self.formula:
                need.append("formula")
            if self.n_range is None:
                need.append("n")
        elif self.command == "vw":
            if self.surface is None:
                need.append("surface")
            if self.beta is None:
                need.append("beta")
            if self.n_range is None:
                need.append("n")
        elif self.command == "fit":
            if self.n_range is None:
                need.append("n")
            elif len(self.n_range) != 1:
                raise SchemaError("fit takes a single n")
        if need:
            raise SchemaError("command %r needs field %r"
                              % (self.command, need[0]))


# ---------------------------------------------------------------------------
# verification suites


def _series_coefficient(e, n):
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


def _split_class(ring, names):
    out = KClass(0, ring.one())
    for name in names:
        out = out + KClass.line(ring.gen(name))
    return out


def porteous_two_routes(r, e0, e1, D=None):
    """Determinantal class of the rank-r kernel locus next to the
    direct sum-over-subsets pushforward of the top Chern class of
    Hom(U, E1) from the split Grassmann bundle of subs of E0.

    Returns (determinant route, localization route) in a common
    truncated root ring.
    """
    codim = r * (e1 - e0 + r)
    if D is None:
        D = codim + r + 1
    anames = ["a%d" % i for i in range(1, e0 + 1)]
    bnames = ["b%d" % k for k in range(1, e1 + 1)]
    names = anames + bnames
    degrees = [1] * len(names)
    ring = Ring(names, degrees=degrees, D=D)
    E = _split_class(ring, bnames) - _split_class(ring, anames)
    det_route, _ = degeneracy_pushforward_X(e0, e1, r, E.chern, dimX=D)

    free = Ring(names, degrees=degrees)
    aroots = [free.gen(n) for n in anames]
    broots = [free.gen(n) for n in bnames]

    def top_chern(*subs):
        acc = free.one()
        for u in subs:
            for b in broots:
                acc = acc * (b - u)
        return acc

    push = grassmann_split_pushforward(aroots, r, top_chern)
    return det_route, GradedClass(ring, dict(push.poly))


def _suite_porteous(emax=3):
    checks = []
    for r in (1, 2):
        for e0 in range(r, emax + 1):
            for e1 in range(0, emax + 1):
                if e1 - e0 + r < 0:
                    continue
                det_route, loc_route = porteous_two_routes(r, e0, e1)
                checks.append(("porteous r=%d e0=%d e1=%d" % (r, e0, e1),
                               det_route == loc_route))
    return checks


def delta_euler_forms(r, b, e0, e1):
    """The determinantal and Euler forms of the degeneracy class over
    the Grassmann bundle, evaluated in a fully split environment.

    The Euler form needs the surjection hypothesis, so the split model
    realizes it: E0 is bound to the first e0 roots of B + E1, making
    the inner class an honest bundle spanned by the leftover roots.
    """
    N = b + e1 - e0
    xnames = ["x%d" % i for i in range(1, b + 1)]
    fnames = ["f%d" % i for i in range(1, e1 + 1)]
    unames = ["u%d" % i for i in range(1, r + 1)]
    names = xnames + fnames + unames
    ring = Ring(names, degrees=[1] * len(names), D=r * N + 1)
    env = FormalEnv(ring)
    B = FormulaExpr.leaf("B", rank=b)
    E1 = FormulaExpr.leaf("E1", rank=e1)
    E0 = FormulaExpr.leaf("E0", rank=e0)
    env.bind(B, _split_class(ring, xnames))
    env.bind(E1, _split_class(ring, fnames))
    env.bind(E0, _split_class(ring, (xnames + fnames)[:e0]))
    env.bind(FormulaExpr.leaf("U", rank=r), _split_class(ring, unames))
    roots = None
    if r > 1:
        roots = [FormulaExpr.leaf(n, rank=1) for n in unames]
        for leaf, n in zip(roots, unames):
            env.bind(leaf, KClass.line(ring.gen(n)))
    det_form, euler_form = degeneracy_pushforward_GrB(
        E0, E1, B, r, esurj2=True, roots=roots)
    return eval_formal(det_form, env), eval_formal(euler_form, env)


def _suite_delta(bmax=4, Nmax=5):
    checks = []
    for r in (1, 2):
        for b in range(r, bmax + 1):
            for e0 in (0, 1, 2):
                for e1 in (0, 1, 2):
                    N = b + e1 - e0
                    if not 0 <= N <= Nmax:
                        continue
                    det_val, euler_val = delta_euler_forms(r, b, e0, e1)
                    checks.append(
                        ("delta r=%d b=%d e0=%d e1=%d" % (r, b, e0, e1),
                         det_val == euler_val))
    return checks


def segre_two_routes(b, k):
    """Pushforward of h^(b-1+k) from the split projective bundle of
    sub-lines next to the degree-k Segre component of the base bundle.
    """
    names = ["a%d" % i for i in range(1, b + 1)]
    free = Ring(names, degrees=[1] * b)
    roots = [free.gen(n) for n in names]

    def h_power(u):
        acc = free.one()
        for _ in range(b - 1 + k):
            acc = acc * (-u)
        return acc

    push = grassmann_split_pushforward(roots, 1, h_power)
    ring = Ring(names, degrees=[1] * b, D=k)
    total = _split_class(ring, names).chern
    segre = series_invert(total).component(k)
    return GradedClass(ring, dict(push.poly)), segre


def _suite_segre(bmax=4, extra=3):
    checks = []
    for b in range(1, bmax + 1):
        for k in range(0, b + extra + 1):
            push, segre = segre_two_routes(b, k)
            checks.append(("segre b=%d k=%d" % (b, k), push == segre))
    return checks


def _suite_euler(nmax=3):
    integrand = FormulaExpr.euler(FormulaExpr.leaf("tangent"))
    checks = []
    for name, e in (("P2", 3), ("P1xP1", 4)):
        S = load_surface(name)
        for n in range(nmax + 1):
            value = equivariant_integrate(integrand, S, 0, n)
            checks.append(("euler %s n=%d" % (name, n),
                           value == _series_coefficient(e, n)))
    return checks


def _suite_characters(nmax=3):
    checks = []
    m1, m2 = (1, 0), (0, 1)
    w = ((-1, 0), (0, -1))
    d = (EquivChar.one() - EquivChar.monomial(*m1)) \
        * (EquivChar.one() - EquivChar.monomial(*m2))
    dbar = d.conj()
    for n in range(1, nmax + 1):
        for mu in partitions(n):
            q = box_character(mu, m1, m2)
            vertex = q + q.conj().shift(-1, -1) - dbar * q.conj() * q
            checks.append(("tangent vertex mu=%r" % (mu,),
                           vertex == tangent_character(mu, w)))
    one = EquivChar.one()
    for na in range(0, nmax):
        for mu in partitions(na):
            for nb in range(0, nmax):
                for nu in partitions(nb):
                    smb = structure_numerator(mu).conj()
                    sn = structure_numerator(nu)
                    closed = rhom_character(mu, nu).num
                    checks.append(
                        ("rhom four-term mu=%r nu=%r" % (mu, nu),
                         closed == one - sn - smb + smb * sn))
    return checks


SUITES = {"porteous": _suite_porteous, "delta": _suite_delta,
          "segre": _suite_segre, "euler": _suite_euler,
          "characters": _suite_characters}


# ---------------------------------------------------------------------------
# command handlers


def _handle_verify(job):
    names = SUITE_NAMES[:-1] if job.suite == "all" else (job.suite,)
    checks = []
    for name in names:
        checks.extend(SUITES[name]())
    ok = all(flag for _, flag in checks)
    doc = {"suite": job.suite,
           "checks": [{"name": name, "ok": flag} for name, flag in checks],
           "ok": ok}
    return (EXIT_OK if ok else EXIT_MATH), doc


def _parse_formula(spec):
    name, _, tail = spec.partition(":")
    args = []
    if tail:
        for piece in tail.split(","):
            try:
                args.append(int(piece))
            except ValueError:
                raise SchemaError("formula argument %r is not an integer"
                                  % piece)
    return name, args


def _term_string(ring, mono):
    parts = []
    for name, power in zip(ring.names, mono):
        if power == 1:
            parts.append(name)
        elif power > 1:
            parts.append("%s^%d" % (name, power))
    return "*".join(parts) if parts else "1"


def _class_terms(cls):
    return [[_term_string(cls.ring, mono), rational_str(coeff)]
            for mono, coeff in sorted(cls.poly.items())
            if coeff != 0]


def _handle_push(job):
    name, args = _parse_formula(job.formula)
    if name == "porteous":
        if len(args) != 3:
            raise SchemaError("formula 'porteous' takes r,e0,e1")
        r, e0, e1 = args
        codim = r * (e1 - e0 + r)
        size = max(codim, 1)
        ring = Ring(["c%d" % i for i in range(1, size + 1)],
                    degrees=list(range(1, size + 1)), D=size)
        total = ring.one()
        for i in range(1, size + 1):
            total = total + ring.gen("c%d" % i)
        cls, _ = degeneracy_pushforward_X(e0, e1, r, total, dimX=codim)
        doc = {"formula": job.formula, "codim": codim,
               "class": _class_terms(cls), "text": str(cls)}
        return EXIT_OK, doc
    if name == "reduced":
        if job.surface is None or job.beta is None:
            raise SchemaError("formula 'reduced' needs surface and beta")
        A = job.A if job.A is not None else job.surface.zero_class()
        expr, info = nested_reduced_formula(
            job.n1, job.n2, job.surface, job.beta, A,
            h2_vanishing=bool(job.params.get("h2_vanishing")))
        doc = {"formula": job.formula, "expr": expr_to_json(expr),
               "info": {k: int(v) for k, v in info.items()}}
        return EXIT_OK, doc
    raise SchemaError("unknown formula %r" % name)


def _integrand(job, n):
    name, args = _parse_formula(job.formula)
    if name == "euler":
        return FormulaExpr.euler(FormulaExpr.leaf("tangent")), 0, n
    if name == "one":
        return FormulaExpr.one(), 0, n
    if name == "co":
        if len(args) != 1:
            raise SchemaError("formula 'co' takes the shift i")
        if job.beta is None:
            raise SchemaError("formula 'co' needs beta")
        return FormulaExpr.chern(n + args[0], co_class(bc=1)), 0, n
    if name == "custom":
        if "expr" not in job.params:
            raise SchemaError("formula 'custom' needs params.expr")
        expr = expr_from_json(job.params["expr"])
        if job.n1 or job.n2:
            return expr, job.n1, job.n2
        return expr, 0, n
    raise SchemaError("unknown formula %r" % name)


def _handle_integrate(job):
    rows = []
    for n in job.n_range:
        expr, n1, n2 = _integrand(job, n)
        value = equivariant_integrate(
            expr, job.surface, n1, n2, beta=job.beta, A=job.A,
            refined=job.order > 0, seed=job.seed, threads=job.threads)
        rows.append({"n": n, "value": format_value(value, job.order)})
    return EXIT_OK, {"formula": job.formula,
                     "surface": job.surface.name, "rows": rows}


def _sw_table(job):
    if job.sw is None:
        return SWTable(job.surface)
    if not isinstance(job.sw, dict):
        raise SchemaError("field 'sw' must be an object")
    entries = {}
    for item in job.sw.get("entries") or []:
        try:
            key = tuple(parse_rational(str(x)) for x in item["beta"])
            value = parse_rational(str(item["sw"]))
            higher = tuple(parse_rational(str(h))
                           for h in item.get("higher") or [])
        except (KeyError, TypeError, ValueError):
            raise SchemaError("malformed 'sw' entry %r" % (item,))
        entries[key] = (value, higher) if higher else value
    return SWTable(job.surface, entries=entries,
                   higher_mode=bool(job.sw.get("higher_mode")))


def _handle_vw(job):
    table = _sw_table(job)
    window = job.params.get("window")
    if window is not None:
        window = tuple(parse_rational(str(x)) for x in window)
    rows = []
    for n in job.n_range:
        result = monopole_contribution(
            job.surface, table, job.beta, n, refined=job.order > 0,
            order=job.order or None, seed=job.seed,
            threads=job.threads, window=window)
        rows.extend(result.rows(job.order or None))
    return EXIT_OK, {"surface": job.surface.name,
                     "columns": list(ROW_FIELDS), "rows": rows}


def _handle_fit(job):
    source = job.runs if job.runs is not None else [
        [name, list(beta)] for name, beta in DEFAULT_FIT_RUNS]
    runs = []
    for item in source:
        if not isinstance(item, (list, tuple)) or len(item) not in (2, 3):
            raise SchemaError("each run is [surface, beta] or"
                              " [surface, beta, value]")
        try:
            surface = load_surface(item[0])
        except (ValueError, OSError) as err:
            raise SchemaError("bad surface in runs: %s" % err)
        beta = _parse_vector(item[1], "runs.beta")
        if len(item) == 3:
            try:
                value = parse_rational(str(item[2]))
            except (ValueError, ZeroDivisionError):
                raise SchemaError("run value %r is not rational"
                                  % (item[2],))
            runs.append((surface, beta, value))
        else:
            runs.append((surface, beta))
    monomials = job.params.get("monomials")
    if monomials is None:
        monomials = list(DEFAULT_FIT_MONOMIALS)
    fit = universality_fit(job.n_range[0], runs, monomials=monomials,
                           seed=job.seed, threads=job.threads)
    doc = fit_report(fit, order=job.order or 4)
    code = EXIT_OK if fit["residual"] == 0 else EXIT_RESIDUAL
    return code, doc


HANDLERS = {"verify": _handle_verify, "push": _handle_push,
            "integrate": _handle_integrate, "vw": _handle_vw,
            "fit": _handle_fit}


# ---------------------------------------------------------------------------
# rendering


def _render_json(job, doc):
    body = dict(doc)
    body["command"] = job.command
    body["seed"] = job.seed
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def _csv_text(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows([columns] + rows)
    return buf.getvalue()


def _render_csv(job, doc):
    head = "# seed %d\n" % job.seed
    if job.command == "verify":
        rows = [[c["name"], "ok" if c["ok"] else "FAIL"]
                for c in doc["checks"]]
        return head + _csv_text(["check", "status"], rows)
    if job.command == "push":
        if "class" not in doc:
            raise SchemaError("format 'csv' fits only polynomial output")
        return head + _csv_text(["term", "coeff"], doc["class"])
    if job.command == "integrate":
        rows = [[row["n"], row["value"]] for row in doc["rows"]]
        return head + _csv_text(["n", "value"], rows)
    if job.command == "vw":
        rows = [[row[c] for c in doc["columns"]] for row in doc["rows"]]
        return head + _csv_text(doc["columns"], rows)
    rows = [[name, doc["coefficients"][name]] for name in doc["monomials"]]
    rows.append(["residual", doc["residual"]])
    return head + _csv_text(["monomial", "coefficient"], rows)


def _render_text(job, doc):
    lines = []
    if job.command == "verify":
        for c in doc["checks"]:
            lines.append(("ok " if c["ok"] else "FAIL ") + c["name"])
        lines.append("all green" if doc["ok"] else "%d of %d failed"
                     % (sum(not c["ok"] for c in doc["checks"]),
                        len(doc["checks"])))
    elif job.command == "push":
        if "text" in doc:
            lines.append(doc["text"])
        else:
            lines.append(json.dumps(doc["expr"], sort_keys=True))
            lines.append(json.dumps(doc["info"], sort_keys=True))
    elif job.command == "integrate":
        for row in doc["rows"]:
            lines.append(row["value"])
    elif job.command == "vw":
        for row in doc["rows"]:
            if row["n1"] == "":
                lines.append(row["value"])
    else:
        for name in doc["monomials"]:
            lines.append("%s %s" % (name, doc["coefficients"][name]))
        lines.append("residual %s" % doc["residual"])
    lines.append("# seed %d" % job.seed)
    return "\n".join(lines) + "\n"


def _render(job, doc):
    if job.format == "json":
        return _render_json(job, doc)
    if job.format == "csv":
        return _render_csv(job, doc)
    return _render_text(job, doc)


def _render_error(code, message):
    doc = {"error": {"code": code, "message": message}}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _exit_code_for(message):
    if "universality" in message or "insufficient surface spread" \
            in message:
        return EXIT_RESIDUAL
    return EXIT_MATH


def run(job):
    """Execute one validated job.  Returns (exit code, artifact text)."""
    try:
        code, doc = HANDLERS[job.command](job)
        return code, _render(job, doc)
    except SchemaError as err:
        return EXIT_SCHEMA, _render_error(EXIT_SCHEMA, str(err))
    except ValueError as err:
        code = _exit_code_for(str(err))
        return code, _render_error(code, str(err))


# ---------------------------------------------------------------------------
# argument handling


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nesthilb",
        description="batch runner for intersection-theory jobs")
    parser.add_argument("command")
    parser.add_argument("--job", help="JSON job file; flags override it")
    parser.add_argument("--suite")
    parser.add_argument("--surface")
    parser.add_argument("--beta")
    parser.add_argument("--A", dest="A")
    parser.add_argument("--formula")
    parser.add_argument("--evaluator")
    parser.add_argument("--n")
    parser.add_argument("--n1")
    parser.add_argument("--n2")
    parser.add_argument("--order")
    parser.add_argument("--threads")
    parser.add_argument("--seed")
    parser.add_argument("--format", dest="format")
    parser.add_argument("--out")
    return parser


def _merge_job(args):
    doc = {}
    if args.job is not None:
        try:
            with open(args.job) as fh:
                doc = json.load(fh)
        except OSError as err:
            raise SchemaError("cannot read job file: %s" % err)
        except json.JSONDecodeError as err:
            raise SchemaError("job file is not valid JSON: %s" % err)
        if not isinstance(doc, dict):
            raise SchemaError("job file must hold a JSON object")
    for name in ("suite", "surface", "beta", "A", "formula", "evaluator",
                 "n", "n1", "n2", "order", "threads", "seed", "format",
                 "out"):
        value = getattr(args, name)
        if value is not None:
            doc[name] = value
    doc["command"] = args.command
    return doc


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_SCHEMA if err.code else EXIT_OK
    try:
        job = JobSpec(_merge_job(args))
    except SchemaError as err:
        sys.stdout.write(_render_error(EXIT_SCHEMA, str(err)))
        return EXIT_SCHEMA
    code, text = run(job)
    if job.out:
        with open(job.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
