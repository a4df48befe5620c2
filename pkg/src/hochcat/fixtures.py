"""Stock categories, algebras and diagrams used by the CLI fixtures and tests.

Everything here goes through the validators, so constructing a fixture is
itself a check.
"""

from __future__ import annotations

from fractions import Fraction

from . import fincat as fc
from . import graded as gr
from .fincat import FinCat
from .graded import GradedCat

F0 = Fraction(0)
F1 = Fraction(1)


def vposet_cat() -> FinCat:
    """Poset s <= t0, s <= t1 (two maximal chains meeting in the bottom)."""
    leq = {("s", "t0"), ("s", "t1")}
    return fc.poset_category(["s", "t0", "t1"], lambda a, b: a == b or (a, b) in leq)


def grid_cat() -> FinCat:
    """2x2 grid poset bot < a, b < top."""
    pairs = {("bot", "a"), ("bot", "b"), ("a", "top"), ("b", "top"), ("bot", "top")}
    return fc.poset_category(["bot", "a", "b", "top"], lambda x, y: x == y or (x, y) in pairs)


def opens_poset() -> FinCat:
    """Basis of opens for U0 = U1 u U2: elements U1, U2 and U12 = U1 n U2."""
    pairs = {("U12", "U1"), ("U12", "U2")}
    return fc.poset_category(["U12", "U1", "U2"], lambda x, y: x == y or (x, y) in pairs)


def algebra_graded(name: str, basis: list[str], unit: dict[int, Fraction], mult) -> GradedCat:
    """One-object trivially graded category from a finite-dimensional algebra.

    `mult(i, j)` returns the structure constants of basis[i] * basis[j] as a
    sparse dict.  Multiplication i*j is interpreted as composition
    (basis[i] after basis[j]).
    """
    e = fc.terminal_category()
    obj = f"{name}.o"
    key = ("id*", obj, obj)
    comp = {}
    for i in range(len(basis)):
        for j in range(len(basis)):
            vec = mult(i, j)
            if vec:
                comp[(key, i, key, j)] = vec
    return gr.validate_graded_cat(
        e, {"*": (obj,)}, {key: tuple(basis)}, comp, {obj: dict(unit)}, name=name
    )


def q_algebra(name: str = "q") -> GradedCat:
    return algebra_graded(name, ["one"], {0: F1}, lambda i, j: {0: F1})


def dual_numbers(name: str = "lambda") -> GradedCat:
    """Q[x] / (x^2), basis (one, x)."""

    def mult(i, j):
        if i == 0 and j == 0:
            return {0: F1}
        if i + j == 1:
            return {1: F1}
        return {}

    return algebra_graded(name, ["one", "x"], {0: F1}, mult)


def split_quadratic(name: str = "mu") -> GradedCat:
    """Q[x] / (x^2 - 1), basis (one, x)."""

    def mult(i, j):
        if i == 0 and j == 0:
            return {0: F1}
        if i + j == 1:
            return {1: F1}
        return {0: F1}

    return algebra_graded(name, ["one", "x"], {0: F1}, mult)


def product_algebra(name: str = "qq") -> GradedCat:
    """Q x Q, basis of orthogonal idempotents."""

    def mult(i, j):
        return {i: F1} if i == j else {}

    return algebra_graded(name, ["p", "q"], {0: F1, 1: F1}, mult)


def free_graded(cat: FinCat, name: str = "") -> GradedCat:
    """One fiber object and a one-dimensional hom space over every morphism."""
    fiber = {u: (f"{name}.{u}" if name else f"F.{u}",) for u in cat.objects}
    hom = {}
    comp = {}
    for u in cat.mors():
        key = (u, fiber[cat.src[u]][0], fiber[cat.tgt[u]][0])
        hom[key] = ("e",)
    for g in cat.mors():
        for f in cat.mors():
            if cat.tgt[f] != cat.src[g]:
                continue
            gk = (g, fiber[cat.src[g]][0], fiber[cat.tgt[g]][0])
            fk = (f, fiber[cat.src[f]][0], fiber[cat.tgt[f]][0])
            comp[(gk, 0, fk, 0)] = {0: F1}
    id_elt = {fiber[u][0]: {0: F1} for u in cat.objects}
    return gr.validate_graded_cat(cat, fiber, hom, comp, id_elt, name=name or "free")


def cross_carrier(left: GradedCat, right: GradedCat, elt: str = "cross") -> fc.SetBifunctor:
    """One-element bifunctor between two one-object bases."""
    (uo,) = left.base.objects
    (vo,) = right.base.objects
    return fc.validate_bifunctor(fc.SetBifunctor(
        left.base, right.base,
        {(vo, uo): (elt,)},
        {(left.base.identity[uo], elt): elt},
        {(elt, right.base.identity[vo]): elt},
    ))


def scalar_bimodule(left: GradedCat, right: GradedCat, name: str = "m"):
    """One-dimensional bimodule between one-object algebras, unit acting as 1.

    Non-unit basis directions act by zero, which is a valid action whenever
    the algebras' units are basis elements (true for all fixtures here).
    """
    from . import bimod as bm

    carrier = cross_carrier(left, right, f"{name}.s")
    (uo,) = left.base.objects
    (vo,) = right.base.objects
    (a_obj,) = left.fiber[uo]
    (b_obj,) = right.fiber[vo]
    skey = (f"{name}.s", b_obj, a_obj)
    basis = {skey: ("m0",)}
    left_act = {}
    lkey = (left.base.identity[uo], a_obj, a_obj)
    for i, c in left.id_elt[a_obj].items():
        left_act[(lkey, i, skey, 0)] = {0: c}
    right_act = {}
    rkey = (right.base.identity[vo], b_obj, b_obj)
    for k, c in right.id_elt[b_obj].items():
        right_act[(skey, 0, rkey, k)] = {0: c}
    m = bm.Bimodule(left, right, carrier, basis, left_act, right_act, name=name)
    return bm.validate_bimodule(m)


def regular_cross_bimodule(alg: GradedCat, name: str = "reg"):
    """The algebra itself as a bimodule across the one-morphism base."""
    from . import bimod as bm

    carrier = cross_carrier(alg, alg, f"{name}.s")
    (uo,) = alg.base.objects
    (a_obj,) = alg.fiber[uo]
    key = (alg.base.identity[uo], a_obj, a_obj)
    skey = (f"{name}.s", a_obj, a_obj)
    basis = {skey: alg.labels(key)}
    left_act = {}
    right_act = {}
    for (gk, i, fk, j), vec in alg.comp.items():
        left_act[(gk, i, skey, j)] = dict(vec)
        right_act[(skey, i, fk, j)] = dict(vec)
    m = bm.Bimodule(alg, alg, carrier, basis, left_act, right_act, name=name)
    return bm.validate_bimodule(m)


def t2_graded(name: str = "t2"):
    """Path category of A2 with one-dimensional hom spaces (as an arrow glueing)."""
    from . import bimod as bm

    a = q_algebra(f"{name}.up")
    b = q_algebra(f"{name}.lo")
    return bm.arrow_category(scalar_bimodule(a, b, name=f"{name}.m"), name=name)


def two_object_linear_cat(name: str = "paircat") -> GradedCat:
    """Trivially graded linear category with two objects and Hom(A,B) = Q.

    Hom(A,A) = Hom(B,B) = Q, Hom(B,A) = 0; the linear-category shape of the
    upper-triangular 2x2 algebra, graded over the one-object base.
    """
    e = fc.terminal_category()
    a, b = f"{name}.A", f"{name}.B"
    kaa = ("id*", a, a)
    kbb = ("id*", b, b)
    kab = ("id*", a, b)
    hom = {kaa: ("e",), kbb: ("e",), kab: ("m",)}
    comp = {
        (kaa, 0, kaa, 0): {0: F1},
        (kbb, 0, kbb, 0): {0: F1},
        (kab, 0, kaa, 0): {0: F1},
        (kbb, 0, kab, 0): {0: F1},
    }
    return gr.validate_graded_cat(
        e, {"*": (a, b)}, hom, comp, {a: {0: F1}, b: {0: F1}}, name=name
    )
