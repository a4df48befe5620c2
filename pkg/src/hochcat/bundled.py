"""Assembly of the shipped workspace fixtures.

`standard_raw()` produces the full bundled workspace (the four golden
categories, the V-poset machinery, the arrow fixtures, a descent datum, a
free diagram and a functorial diagram); `a2_raw()` is the small subset
around the path category.  The JSON files under fixtures/ are dumps of
these dictionaries, so tests can regenerate and diff them.
"""

from __future__ import annotations

from . import fincat as fc
from . import fixtures as fx
from . import graded as gr
from . import workspace as wsp
from .qlinalg import QMatrix


def a2_raw() -> dict:
    e = fc.terminal_category()
    a2 = fc.chain_category(1)
    t2 = fx.t2_graded()
    raw = {
        "categories": {
            "e": wsp.declare_category(e),
            "a2": wsp.declare_category(a2),
            "t2base": wsp.declare_category(t2.category.base),
        },
        "graded_categories": {
            "t2": wsp.declare_graded_cat(t2.category, "t2base"),
            "t2.lo": wsp.declare_graded_cat(t2.from_lower.source, "e"),
            "t2.up": wsp.declare_graded_cat(t2.from_upper.source, "e"),
        },
        "bifunctors": {
            "t2.carrier": wsp.declare_bifunctor(
                fx.cross_carrier(t2.from_upper.source, t2.from_lower.source, "t2.m.s"),
                "e", "e"),
        },
        "bimodules": {
            "t2.m": wsp.declare_bimodule(
                fx.scalar_bimodule(t2.from_upper.source, t2.from_lower.source, "t2.m"),
                "t2.up", "t2.lo", "t2.carrier"),
        },
        "ideals": {
            "t2.cross": wsp.declare_ideal("t2base", t2.cross_ideal),
        },
    }
    return raw


def standard_raw() -> dict:
    raw = a2_raw()
    e = fc.terminal_category()
    v = fx.vposet_cat()
    opens = fx.opens_poset()
    kv = fx.free_graded(v, "kv")
    raw["categories"]["vposet"] = wsp.declare_category(v)
    raw["categories"]["opens"] = wsp.declare_category(opens)
    raw["graded_categories"]["q"] = wsp.declare_graded_cat(fx.q_algebra(), "e")
    raw["graded_categories"]["lambda"] = wsp.declare_graded_cat(fx.dual_numbers(), "e")
    raw["graded_categories"]["mu"] = wsp.declare_graded_cat(fx.split_quadratic(), "e")
    raw["graded_categories"]["qq"] = wsp.declare_graded_cat(fx.product_algebra(), "e")
    raw["graded_categories"]["kv"] = wsp.declare_graded_cat(kv, "vposet")
    raw["graded_categories"]["ko"] = wsp.declare_graded_cat(
        fx.free_graded(opens, "ko"), "opens")
    # chain cover of the V-poset, with cartesian legs into kv
    cover = fc.chain_cover(v)
    raw["functors"] = {}
    raw["graded_functors"] = {}
    raw["covers"] = {}
    leg_names = []
    legs_decl = []
    pieces = []
    for i, (sub, incl) in enumerate(cover.chains):
        cname = f"vposet.chain{i}"
        raw["categories"][cname] = wsp.declare_category(sub)
        raw["functors"][f"{cname}.incl"] = wsp.declare_functor(incl, cname, "vposet")
        piece, comparison = gr.restrict(kv, incl)
        pieces.append(piece)
        raw["graded_categories"][f"kv{i}"] = wsp.declare_graded_cat(piece, cname)
        raw["graded_functors"][f"kv.leg{i}"] = wsp.declare_graded_functor(
            comparison, f"kv{i}", "kv", f"{cname}.incl")
        leg_names.append(f"kv.leg{i}")
        legs_decl.append({"functor": f"{cname}.incl",
                          "fiber_map": {x: x for x in piece.fiber_of},
                          "piece": f"kv{i}"})
    raw["covers"]["vposet.chains"] = {"target": "kv", "legs": leg_names}
    # opens-poset chain cover (the three-opens ringed toy)
    ocover = fc.chain_cover(opens)
    ko = fx.free_graded(opens, "ko")
    oleg_names = []
    for i, (sub, incl) in enumerate(ocover.chains):
        cname = f"opens.chain{i}"
        raw["categories"][cname] = wsp.declare_category(sub)
        raw["functors"][f"{cname}.incl"] = wsp.declare_functor(incl, cname, "opens")
        piece, comparison = gr.restrict(ko, incl)
        raw["graded_categories"][f"ko{i}"] = wsp.declare_graded_cat(piece, cname)
        raw["graded_functors"][f"ko.leg{i}"] = wsp.declare_graded_functor(
            comparison, f"ko{i}", "ko", f"{cname}.incl")
        oleg_names.append(f"ko.leg{i}")
    raw["covers"]["opens.chains"] = {"target": "ko", "legs": oleg_names}
    # descent datum for the chain cover, with identity overlap isomorphisms
    isos = []
    leg_data = [(piece, gr.GradedSetMap(incl, {x: x for x in piece.fiber_of}))
                for piece, (sub, incl) in zip(pieces, cover.chains)]
    for i, (pi, mi) in enumerate(leg_data):
        img_j: dict = {}
        for j, (pj, mj) in enumerate(leg_data):
            img_j[j] = {}
            for key in pj.hom_keys():
                img_j[j].setdefault(gr._sharp_image(mj, key), []).append(key)
        for key in pi.hom_keys():
            target = gr._sharp_image(mi, key)
            for j, (pj, mj) in enumerate(leg_data):
                for other in img_j[j].get(target, []):
                    entries = sorted(
                        [pj.labels(other)[r], pi.labels(key)[r],
                         "1", "1"]
                        for r in range(pi.dim(key))
                    )
                    isos.append({"i": i, "j": j, "from": list(key),
                                 "to": list(other), "entries": entries})
    raw["descent_data"] = {
        "vposet.descent": {
            "base": "vposet",
            "fibers": {u: list(kv.fiber[u]) for u in v.objects},
            "legs": legs_decl,
            "isos": isos,
        }
    }
    # decomposition of the V-poset: strict arrows against the discrete part
    ideal = fc.Ideal(v, frozenset({"s<t0", "s<t1"}))
    sub, _ = fc.subcategory(v, list(v.objects), [v.identity[o] for o in v.objects])
    raw["ideals"]["vposet.strict"] = wsp.declare_ideal("vposet", ideal)
    raw["subcategories"] = {
        "vposet.discrete": wsp.declare_subcategory("vposet", sub),
    }
    raw["decompositions"] = {
        "vposet.split": {"category": "vposet", "ideal": "vposet.strict",
                         "subcategory": "vposet.discrete"},
    }
    # arrow fixture over the dual numbers (regular bimodule)
    lam = fx.dual_numbers()
    reg = fx.regular_cross_bimodule(lam, "reg")
    raw["bifunctors"]["reg.carrier"] = wsp.declare_bifunctor(reg.carrier, "e", "e")
    raw["bimodules"]["lambda.reg"] = wsp.declare_bimodule(reg, "lambda", "lambda", "reg.carrier")
    # the free diagram on the V-poset
    qs, q0, q1 = fx.q_algebra("vf.s"), fx.q_algebra("vf.t0"), fx.q_algebra("vf.t1")
    m0 = fx.scalar_bimodule(q0, qs, "vf.e0")
    m1 = fx.scalar_bimodule(q1, qs, "vf.e1")
    raw["graded_categories"]["vf.s"] = wsp.declare_graded_cat(qs, "e")
    raw["graded_categories"]["vf.t0"] = wsp.declare_graded_cat(q0, "e")
    raw["graded_categories"]["vf.t1"] = wsp.declare_graded_cat(q1, "e")
    raw["bifunctors"]["vf.e0.carrier"] = wsp.declare_bifunctor(m0.carrier, "e", "e")
    raw["bifunctors"]["vf.e1.carrier"] = wsp.declare_bifunctor(m1.carrier, "e", "e")
    raw["bimodules"]["vf.e0"] = wsp.declare_bimodule(m0, "vf.t0", "vf.s", "vf.e0.carrier")
    raw["bimodules"]["vf.e1"] = wsp.declare_bimodule(m1, "vf.t1", "vf.s", "vf.e1.carrier")
    raw["pseudofunctors"] = {
        "vposet-free": {
            "base": "vposet",
            "pieces": {"s": "vf.s", "t0": "vf.t0", "t1": "vf.t1"},
            "edges": {"s<t0": "vf.e0", "s<t1": "vf.e1"},
            "coherence": [],
        }
    }
    # a functorial diagram: fully faithful inclusion over the path category
    amb = fx.two_object_linear_cat("amb")
    piece = fx.q_algebra("piece")
    inc = gr.GradedFunctor(
        piece, amb, fc.identity_functor(amb.base), {"piece.o": "amb.A"},
        {("id*", "piece.o", "piece.o"): QMatrix.identity(1)}, name="ff.inc",
    )
    gr.validate_graded_functor(inc)
    raw["graded_categories"]["amb"] = wsp.declare_graded_cat(amb, "e")
    raw["graded_categories"]["piece"] = wsp.declare_graded_cat(piece, "e")
    raw["functors"]["e.id"] = wsp.declare_functor(fc.identity_functor(e), "e", "e")
    raw["graded_functors"]["ff.inc"] = wsp.declare_graded_functor(inc, "piece", "amb", "e.id")
    raw["diagrams"] = {
        "ff-a2": {"base": "a2", "pieces": {"0": "piece", "1": "amb"},
                  "functors": {"0<1": "ff.inc"}},
    }
    return raw
