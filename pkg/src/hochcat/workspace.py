"""Deterministic JSON workspaces.

A workspace file declares named categories, functors, graded categories,
bifunctors, bimodules, diagrams, covers, descent data and decompositions.
Rationals are stored as numerator/denominator strings (arbitrary precision),
structure constants as arrays of {left, right, result} records referencing
basis labels.  Loading validates every declaration; dumping produces a
canonical form that reloads byte-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import bimod as bm
from . import fincat as fc
from . import graded as gr
from . import groth as gt
from .qlinalg import QMatrix


class WorkspaceError(Exception):
    pass


class ParseError(WorkspaceError):
    pass


class UnknownReference(WorkspaceError):
    def __init__(self, kind, name, where=""):
        self.kind, self.name = kind, name
        super().__init__(f"unknown {kind} '{name}'" + (f" in {where}" if where else ""))


class DuplicateDeclaration(WorkspaceError):
    def __init__(self, kind, name):
        super().__init__(f"duplicate {kind} '{name}'")


class ValidationFailed(WorkspaceError):
    def __init__(self, kind, name, cause):
        self.cause = cause
        super().__init__(f"{kind} '{name}' failed validation: {cause}")


SECTIONS = [
    "categories", "functors", "subcategories", "ideals", "bifunctors",
    "graded_categories", "graded_functors", "bimodules", "pseudofunctors",
    "diagrams", "covers", "descent_data", "decompositions",
]


def _frac(num, den) -> Fraction:
    return Fraction(int(num), int(den))


def _vec_from_json(entries, labels) -> dict[int, Fraction]:
    index = {lab: i for i, lab in enumerate(labels)}
    out = {}
    for lab, num, den in entries:
        if lab not in index:
            raise ParseError(f"unknown basis label {lab}")
        v = _frac(num, den)
        if v != 0:
            out[index[lab]] = v
    return out


def _vec_to_json(vec, labels):
    return [[labels[i], str(v.numerator), str(v.denominator)]
            for i, v in sorted(vec.items())]


@dataclass
class Workspace:
    raw: dict = field(default_factory=dict)
    categories: dict = field(default_factory=dict)
    functors: dict = field(default_factory=dict)
    subcategories: dict = field(default_factory=dict)  # name -> (FinCat, Functor)
    ideals: dict = field(default_factory=dict)
    bifunctors: dict = field(default_factory=dict)
    graded_categories: dict = field(default_factory=dict)
    graded_functors: dict = field(default_factory=dict)
    bimodules: dict = field(default_factory=dict)
    pseudofunctors: dict = field(default_factory=dict)
    diagrams: dict = field(default_factory=dict)
    covers: dict = field(default_factory=dict)  # name -> list[GradedFunctor]
    descent_data: dict = field(default_factory=dict)
    decompositions: dict = field(default_factory=dict)  # name -> (cat, Ideal, sub FinCat)


def load(paths) -> Workspace:
    """Load and validate one or more workspace files."""
    merged: dict = {s: {} for s in SECTIONS}
    for path in paths:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ParseError(f"{path}: top level must be an object")
        for section, decls in data.items():
            if section not in merged:
                raise ParseError(f"{path}: unknown section '{section}'")
            for name, decl in decls.items():
                if name in merged[section]:
                    raise DuplicateDeclaration(section, name)
                merged[section][name] = decl
    return load_dict(merged)


def load_dict(merged: dict) -> Workspace:
    ws = Workspace(raw={s: dict(merged.get(s, {})) for s in SECTIONS})
    for name, decl in ws.raw["categories"].items():
        try:
            ws.categories[name] = fc.validate_fincat(
                decl["objects"],
                [tuple(m) for m in decl["morphisms"]],
                dict(decl["identity"]),
                {(g, f): h for g, f, h in decl["composition"]},
            )
        except (fc.FinCatError, KeyError) as exc:
            raise ValidationFailed("category", name, exc) from exc
    for name, decl in ws.raw["functors"].items():
        src = _ref(ws.categories, "category", decl.get("source"), name)
        tgt = _ref(ws.categories, "category", decl.get("target"), name)
        try:
            ws.functors[name] = fc.validate_functor(
                fc.Functor(src, tgt, dict(decl["objects"]), dict(decl["morphisms"])))
        except (fc.FinCatError, KeyError) as exc:
            raise ValidationFailed("functor", name, exc) from exc
    for name, decl in ws.raw["subcategories"].items():
        cat = _ref(ws.categories, "category", decl.get("category"), name)
        try:
            ws.subcategories[name] = fc.subcategory(cat, decl["objects"], decl["morphisms"])
        except (fc.FinCatError, KeyError) as exc:
            raise ValidationFailed("subcategory", name, exc) from exc
    for name, decl in ws.raw["ideals"].items():
        cat = _ref(ws.categories, "category", decl.get("category"), name)
        members = frozenset(decl["members"])
        if not fc.is_ideal(cat, members):
            raise ValidationFailed("ideal", name, "not closed under composition")
        ws.ideals[name] = fc.Ideal(cat, members)
    for name, decl in ws.raw["bifunctors"].items():
        left = _ref(ws.categories, "category", decl.get("left"), name)
        right = _ref(ws.categories, "category", decl.get("right"), name)
        try:
            ws.bifunctors[name] = fc.validate_bifunctor(fc.SetBifunctor(
                left, right,
                {(cell["source"], cell["target"]): tuple(cell["ids"])
                 for cell in decl["elements"]},
                {(m, e): r for m, e, r in decl["left_action"]},
                {(e, m): r for e, m, r in decl["right_action"]},
            ))
        except (fc.FinCatError, KeyError) as exc:
            raise ValidationFailed("bifunctor", name, exc) from exc
    for name, decl in ws.raw["graded_categories"].items():
        ws.graded_categories[name] = _load_graded_cat(ws, name, decl)
    for name, decl in ws.raw["graded_functors"].items():
        ws.graded_functors[name] = _load_graded_functor(ws, name, decl)
    for name, decl in ws.raw["bimodules"].items():
        ws.bimodules[name] = _load_bimodule(ws, name, decl)
    for name, decl in ws.raw["pseudofunctors"].items():
        ws.pseudofunctors[name] = _load_pseudofunctor(ws, name, decl)
    for name, decl in ws.raw["diagrams"].items():
        ws.diagrams[name] = _load_diagram(ws, name, decl)
    for name, decl in ws.raw["covers"].items():
        legs = [_ref(ws.graded_functors, "graded_functor", leg, name)
                for leg in decl["legs"]]
        ws.covers[name] = legs
    for name, decl in ws.raw["descent_data"].items():
        ws.descent_data[name] = _load_descent(ws, name, decl)
    for name, decl in ws.raw["decompositions"].items():
        cat = _ref(ws.categories, "category", decl.get("category"), name)
        ideal = _ref(ws.ideals, "ideal", decl.get("ideal"), name)
        sub, _ = _ref(ws.subcategories, "subcategory", decl.get("subcategory"), name)
        if not fc.decomposition_check(cat, ideal, sub):
            raise ValidationFailed("decomposition", name, "partition check failed")
        ws.decompositions[name] = (cat, ideal, sub)
    return ws


def _ref(table, kind, name, where):
    if name is None or name not in table:
        raise UnknownReference(kind, name, where)
    return table[name]


def _load_graded_cat(ws, name, decl):
    base = _ref(ws.categories, "category", decl.get("base"), name)
    fiber = {obj: tuple(elts) for obj, elts in decl["fibers"].items()}
    hom = {}
    for h in decl["homs"]:
        hom[(h["morphism"], h["source"], h["target"])] = tuple(h["basis"])
    comp = {}
    for entry in decl.get("composition", []):
        lm, ls, lt, lb = entry["left"]
        rm, rs, rt, rb = entry["right"]
        gk = (lm, ls, lt)
        fk = (rm, rs, rt)
        if gk not in hom or fk not in hom:
            raise ValidationFailed("graded_category", name, f"composition on unknown space {gk} or {fk}")
        gi = hom[gk].index(lb)
        fi = hom[fk].index(rb)
        tgt_key = (None, rs, lt)
        # composite morphism resolved through the base table
        tgt_key = (base.comp[(lm, rm)], rs, lt)
        comp[(gk, gi, fk, fi)] = _vec_from_json(entry["result"], hom.get(tgt_key, ()))
    id_elt = {}
    for entry in decl["identities"]:
        obj = entry["object"]
        holder = None
        for u, elts in fiber.items():
            if obj in elts:
                holder = u
        if holder is None:
            raise ValidationFailed("graded_category", name, f"identity for unknown fiber {obj}")
        ikey = (base.identity[holder], obj, obj)
        id_elt[obj] = _vec_from_json(entry["vector"], hom.get(ikey, ()))
    try:
        return gr.validate_graded_cat(base, fiber, hom, comp, id_elt, name=name)
    except gr.GradedError as exc:
        raise ValidationFailed("graded_category", name, exc) from exc


def _load_graded_functor(ws, name, decl):
    src = _ref(ws.graded_categories, "graded_category", decl.get("source"), name)
    tgt = _ref(ws.graded_categories, "graded_category", decl.get("target"), name)
    base_f = _ref(ws.functors, "functor", decl.get("base"), name)
    mats = {}
    for m in decl.get("matrices", []):
        key = (m["morphism"], m["source"], m["target"])
        src_labels = src.labels(key)
        img = (base_f.mor_map[m["morphism"]], decl["objects"][m["source"]],
               decl["objects"][m["target"]])
        tgt_labels = tgt.labels(img)
        mat = QMatrix(len(tgt_labels), len(src_labels))
        for row_lab, col_lab, num, den in m["entries"]:
            mat.set(tgt_labels.index(row_lab), src_labels.index(col_lab), _frac(num, den))
        mats[key] = mat
    try:
        return gr.validate_graded_functor(gr.GradedFunctor(
            src, tgt, base_f, dict(decl["objects"]), mats, name=name))
    except gr.GradedError as exc:
        raise ValidationFailed("graded_functor", name, exc) from exc


def _load_bimodule(ws, name, decl):
    left = _ref(ws.graded_categories, "graded_category", decl.get("left"), name)
    right = _ref(ws.graded_categories, "graded_category", decl.get("right"), name)
    carrier = _ref(ws.bifunctors, "bifunctor", decl.get("carrier"), name)
    basis = {}
    for sp in decl.get("spaces", []):
        basis[(sp["element"], sp["source"], sp["target"])] = tuple(sp["basis"])
    left_act = {}
    for entry in decl.get("left_action", []):
        lm, ls, lt, lb = entry["morphism"]
        se, ss, st, sb = entry["element"]
        lkey = (lm, ls, lt)
        skey = (se, ss, st)
        tkey = (carrier.left_action[(lm, se)], ss, lt)
        left_act[(lkey, left.labels(lkey).index(lb), skey, basis[skey].index(sb))] = \
            _vec_from_json(entry["result"], basis.get(tkey, ()))
    right_act = {}
    for entry in decl.get("right_action", []):
        se, ss, st, sb = entry["element"]
        rm, rs, rt, rb = entry["morphism"]
        skey = (se, ss, st)
        rkey = (rm, rs, rt)
        tkey = (carrier.right_action[(se, rm)], rs, st)
        right_act[(skey, basis[skey].index(sb), rkey, right.labels(rkey).index(rb))] = \
            _vec_from_json(entry["result"], basis.get(tkey, ()))
    try:
        return bm.validate_bimodule(bm.Bimodule(
            left, right, carrier, basis, left_act, right_act, name=name))
    except (bm.BimodError, fc.FinCatError) as exc:
        raise ValidationFailed("bimodule", name, exc) from exc


def _load_pseudofunctor(ws, name, decl):
    base = _ref(ws.categories, "category", decl.get("base"), name)
    pieces = {obj: _ref(ws.graded_categories, "graded_category", g, name)
              for obj, g in decl["pieces"].items()}
    edges = {mor: _ref(ws.bimodules, "bimodule", b, name)
             for mor, b in decl.get("edges", {}).items()}
    coherence = {}
    for entry in decl.get("coherence", []):
        c2, c1 = entry["pair"]
        set_pair = {(s2, s1): s for s2, s1, s in entry.get("elements", [])}
        lin_pair = {}
        e2 = edges.get(c2) or bm.identity_bimodule(pieces[base.src[c2]])
        e1 = edges.get(c1) or bm.identity_bimodule(pieces[base.src[c1]])
        target_mor = base.comp[(c2, c1)]
        target = edges.get(target_mor)
        if target is None:
            target = bm.identity_bimodule(pieces[base.src[target_mor]])
        for pr in entry.get("pairs", []):
            s2, b2, a2, lab2 = pr["left"]
            s1, b1, a1, lab1 = pr["right"]
            k2 = (s2, b2, a2)
            k1 = (s1, b1, a1)
            tkey = (set_pair[(s2, s1)], b1, a2)
            lin_pair[(k2, e2.labels(k2).index(lab2), k1, e1.labels(k1).index(lab1))] = \
                _vec_from_json(pr["result"], target.labels(tkey))
        coherence[(c2, c1)] = gt.Pairing(set_pair, lin_pair)
    try:
        return gt.validate_pseudofunctor(
            gt.PseudoFunctor(base, pieces, edges, coherence, name=name))
    except gt.GrothError as exc:
        raise ValidationFailed("pseudofunctor", name, exc) from exc


def _load_diagram(ws, name, decl):
    base = _ref(ws.categories, "category", decl.get("base"), name)
    pieces = {obj: _ref(ws.graded_categories, "graded_category", g, name)
              for obj, g in decl["pieces"].items()}
    funs = {mor: _ref(ws.graded_functors, "graded_functor", f, name)
            for mor, f in decl.get("functors", {}).items()}
    return gt.FunctorialDiagram(base, pieces, funs, name=name)


def _load_descent(ws, name, decl):
    base = _ref(ws.categories, "category", decl.get("base"), name)
    shape = gr.GradedSet(base, {obj: tuple(v) for obj, v in decl["fibers"].items()})
    legs = []
    for leg in decl["legs"]:
        functor = _ref(ws.functors, "functor", leg["functor"], name)
        piece = _ref(ws.graded_categories, "graded_category", leg["piece"], name)
        legs.append((piece, gr.GradedSetMap(functor, dict(leg["fiber_map"]))))
    isos: dict = {}
    for entry in decl.get("isos", []):
        i, j = entry["i"], entry["j"]
        from_key = tuple(entry["from"])
        to_key = tuple(entry["to"])
        pi = legs[i][0]
        pj = legs[j][0]
        mat = QMatrix(pj.dim(to_key), pi.dim(from_key))
        for row_lab, col_lab, num, den in entry["entries"]:
            mat.set(pj.labels(to_key).index(row_lab), pi.labels(from_key).index(col_lab),
                    _frac(num, den))
        isos.setdefault((i, j), {})[(from_key, to_key)] = mat
    return gr.DescentDatum(shape, legs, isos)


# canonical dump -----------------------------------------------------------------


def dump(ws: Workspace) -> str:
    """Canonical text form: all object keys sorted, list order preserved.

    Order-significant data (object lists, morphism lists, bases) lives in
    JSON arrays; JSON objects are pure lookup tables, so sorting their keys
    is a safe canonical form and makes the dump independent of construction
    order.
    """
    out = {}
    for section in SECTIONS:
        decls = ws.raw.get(section, {})
        if decls:
            out[section] = decls
    return json.dumps(out, indent=1, ensure_ascii=False, sort_keys=True) + "\n"


# declaration builders (internal objects -> raw JSON declarations) -------------------


def declare_category(cat: fc.FinCat) -> dict:
    return {
        "objects": list(cat.objects),
        "morphisms": [list(m) for m in cat.morphisms],
        "identity": dict(cat.identity),
        "composition": sorted([g, f, h] for (g, f), h in cat.comp.items()),
    }


def declare_functor(f: fc.Functor, source: str, target: str) -> dict:
    return {
        "source": source,
        "target": target,
        "objects": dict(f.obj_map),
        "morphisms": dict(f.mor_map),
    }


def declare_subcategory(category: str, sub: fc.FinCat) -> dict:
    return {
        "category": category,
        "objects": list(sub.objects),
        "morphisms": [m for m, _, _ in sub.morphisms],
    }


def declare_ideal(category: str, ideal: fc.Ideal) -> dict:
    return {"category": category, "members": sorted(ideal.members)}


def declare_bifunctor(s: fc.SetBifunctor, left: str, right: str) -> dict:
    return {
        "left": left,
        "right": right,
        "elements": [
            {"source": v, "target": u, "ids": list(s.elements[(v, u)])}
            for (v, u) in sorted(s.elements)
        ],
        "left_action": sorted([m, e, r] for (m, e), r in s.left_action.items()),
        "right_action": sorted([e, m, r] for (e, m), r in s.right_action.items()),
    }


def declare_graded_cat(gc: gr.GradedCat, base: str) -> dict:
    homs = []
    for key in sorted(gc.hom):
        m, s, t = key
        homs.append({"morphism": m, "source": s, "target": t, "basis": list(gc.hom[key])})
    composition = []
    for (gk, gi, fk, fi) in sorted(gc.comp):
        tkey = gc.composite_key(gk, fk)
        composition.append({
            "left": [gk[0], gk[1], gk[2], gc.labels(gk)[gi]],
            "right": [fk[0], fk[1], fk[2], gc.labels(fk)[fi]],
            "result": _vec_to_json(gc.comp[(gk, gi, fk, fi)], gc.labels(tkey)),
        })
    identities = []
    for obj in sorted(gc.id_elt):
        ikey = gc.identity_key(obj)
        identities.append({"object": obj,
                           "vector": _vec_to_json(gc.id_elt[obj], gc.labels(ikey))})
    return {
        "base": base,
        "fibers": {u: list(v) for u, v in gc.fiber.items()},
        "homs": homs,
        "composition": composition,
        "identities": identities,
    }


def declare_graded_functor(f: gr.GradedFunctor, source: str, target: str, base: str) -> dict:
    matrices = []
    for key in sorted(f.source.hom):
        mat = f.mat(key)
        src_labels = f.source.labels(key)
        tgt_labels = f.target.labels(f.image_key(key))
        entries = sorted(
            [tgt_labels[r], src_labels[c], str(v.numerator), str(v.denominator)]
            for (r, c), v in mat.entries.items()
        )
        matrices.append({"morphism": key[0], "source": key[1], "target": key[2],
                         "entries": entries})
    return {
        "source": source,
        "target": target,
        "base": base,
        "objects": dict(f.obj_map),
        "matrices": matrices,
    }


def declare_bimodule(m: bm.Bimodule, left: str, right: str, carrier: str) -> dict:
    spaces = []
    for key in sorted(m.basis):
        spaces.append({"element": key[0], "source": key[1], "target": key[2],
                       "basis": list(m.basis[key])})
    left_action = []
    for (lk, i, sk, j) in sorted(m.left_act):
        tkey = m.left_target(lk, sk)
        left_action.append({
            "morphism": [lk[0], lk[1], lk[2], m.left.labels(lk)[i]],
            "element": [sk[0], sk[1], sk[2], m.labels(sk)[j]],
            "result": _vec_to_json(m.left_act[(lk, i, sk, j)], m.labels(tkey)),
        })
    right_action = []
    for (sk, j, rk, k) in sorted(m.right_act):
        tkey = m.right_target(sk, rk)
        right_action.append({
            "element": [sk[0], sk[1], sk[2], m.labels(sk)[j]],
            "morphism": [rk[0], rk[1], rk[2], m.right.labels(rk)[k]],
            "result": _vec_to_json(m.right_act[(sk, j, rk, k)], m.labels(tkey)),
        })
    return {"left": left, "right": right, "carrier": carrier, "spaces": spaces,
            "left_action": left_action, "right_action": right_action}


def declare_pseudofunctor(p: gt.PseudoFunctor, base: str, pieces: dict[str, str],
                          edges: dict[str, str]) -> dict:
    coherence = []
    idmors = set(p.base.identity.values())
    for (c2, c1) in sorted(p._coherence):
        if c2 in idmors or c1 in idmors:
            continue
        pairing = p._coherence[(c2, c1)]
        e2 = p.edge_of(c2)
        e1 = p.edge_of(c1)
        target = p.edge_of(p.base.comp[(c2, c1)])
        pairs = []
        for (k2, i2, k1, i1) in sorted(pairing.lin_pair):
            tkey = (pairing.set_pair[(k2[0], k1[0])], k1[1], k2[2])
            pairs.append({
                "left": [k2[0], k2[1], k2[2], e2.labels(k2)[i2]],
                "right": [k1[0], k1[1], k1[2], e1.labels(k1)[i1]],
                "result": _vec_to_json(pairing.lin_pair[(k2, i2, k1, i1)],
                                       target.labels(tkey)),
            })
        coherence.append({
            "pair": [c2, c1],
            "elements": sorted([s2, s1, s] for (s2, s1), s in pairing.set_pair.items()),
            "pairs": pairs,
        })
    return {"base": base, "pieces": dict(pieces), "edges": dict(edges),
            "coherence": coherence}


def declare_diagram(fd: gt.FunctorialDiagram, base: str, pieces: dict[str, str],
                    functors: dict[str, str]) -> dict:
    return {"base": base, "pieces": dict(pieces), "functors": dict(functors)}


def declare_descent(datum: gr.DescentDatum, base: str, legs: list[dict]) -> dict:
    isos = []
    for (i, j), table in sorted(datum.overlap_isos.items()):
        pi = datum.legs[i][0]
        pj = datum.legs[j][0]
        for (from_key, to_key) in sorted(table):
            mat = table[(from_key, to_key)]
            entries = sorted(
                [pj.labels(to_key)[r], pi.labels(from_key)[c],
                 str(v.numerator), str(v.denominator)]
                for (r, c), v in mat.entries.items()
            )
            isos.append({"i": i, "j": j, "from": list(from_key), "to": list(to_key),
                         "entries": entries})
    return {
        "base": base,
        "fibers": {u: list(v) for u, v in datum.shape.fiber.items()},
        "legs": legs,
        "isos": isos,
    }
