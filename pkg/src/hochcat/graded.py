"""Map-graded linear categories over Q with explicit structure constants.

A graded category assigns to every object of a finite base category a set of
fiber objects, and to every base morphism u and compatible pair of fiber
objects a finite-dimensional Q-vector space with a chosen ordered basis.
Composition is stored as structure constants on basis pairs and is validated
exhaustively (associativity on all composable basis triples, two-sided
units), so a validated instance really is a category.

The module also provides graded functors, the singleton-fiber construction
and its counit, restriction along a base functor with its canonical
cartesian comparison, cartesian / subcartesian predicates, pullbacks, and
constructive descent glueing along covers of the underlying graded set.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import fincat as fc
from . import qlinalg as ql
from .fincat import FinCat, Functor
from .qlinalg import QMatrix

Vec = dict[int, Fraction]
HomKey = tuple[str, str, str]  # (base morphism, source fiber elt, target fiber elt)


class GradedError(Exception):
    pass


class BadGradedIdentity(GradedError):
    def __init__(self, where, detail=""):
        self.where = where
        super().__init__(f"identity violation at {where}: {detail}")


class NonAssociativeGraded(GradedError):
    def __init__(self, triple):
        self.triple = triple
        super().__init__(f"associativity fails on basis triple {triple}")


class CocycleViolated(GradedError):
    def __init__(self, i, j, k, at):
        self.triple = (i, j, k)
        self.at = at
        super().__init__(f"cocycle fails on legs ({i},{j},{k}) at {at}")


class CompositionIllDefined(GradedError):
    def __init__(self, pair, lifts):
        self.pair = pair
        self.lifts = lifts
        super().__init__(f"glued composition for {pair} differs between lifts {lifts}")


class AssociativityFailed(GradedError):
    def __init__(self, triple):
        self.triple = triple
        super().__init__(f"glued composition not associative at {triple}")


class NotACover(GradedError):
    pass


@dataclass(frozen=True)
class GradedSet:
    base: FinCat
    fiber: dict[str, tuple[str, ...]]

    def all_fiber_elements(self) -> list[tuple[str, str]]:
        return [(u, a) for u in self.base.objects for a in self.fiber.get(u, ())]


@dataclass(frozen=True)
class GradedSetMap:
    """A base functor together with per-object maps between fiber sets."""

    base_functor: Functor
    fiber_map: dict[str, str]


class GradedCat:
    """Finite map-graded linear category with structure-constant composition."""

    def __init__(self, base: FinCat, fiber, hom, comp, id_elt, name: str = ""):
        self.base = base
        self.fiber = {u: tuple(fiber.get(u, ())) for u in base.objects}
        self.hom: dict[HomKey, tuple[str, ...]] = {k: tuple(v) for k, v in hom.items() if v}
        # comp[(gkey, i, fkey, j)] -> sparse vector over the composite hom space
        self.comp: dict[tuple[HomKey, int, HomKey, int], Vec] = {
            k: dict(v) for k, v in comp.items() if v
        }
        self.id_elt: dict[str, Vec] = {a: dict(v) for a, v in id_elt.items()}
        self.name = name
        self._sharp_cache = None
        self.fiber_of: dict[str, str] = {}
        for u, elts in self.fiber.items():
            for a in elts:
                self.fiber_of[a] = u

    # hom space accessors -----------------------------------------------

    def labels(self, key: HomKey) -> tuple[str, ...]:
        return self.hom.get(key, ())

    def dim(self, key: HomKey) -> int:
        return len(self.hom.get(key, ()))

    def hom_keys(self) -> list[HomKey]:
        out = []
        for u in self.base.mors():
            for a in self.fiber[self.base.src[u]]:
                for b in self.fiber[self.base.tgt[u]]:
                    out.append((u, a, b))
        return out

    def composite_key(self, gkey: HomKey, fkey: HomKey) -> HomKey:
        g, b1, c = gkey
        f, a, b2 = fkey
        return (self.base.comp[(g, f)], a, c)

    def compose_basis(self, gkey: HomKey, i: int, fkey: HomKey, j: int) -> Vec:
        return self.comp.get((gkey, i, fkey, j), {})

    def compose_vec(self, gkey: HomKey, gvec: Vec, fkey: HomKey, fvec: Vec) -> Vec:
        out: Vec = {}
        for i, gc in gvec.items():
            for j, fcf in fvec.items():
                for t, c in self.compose_basis(gkey, i, fkey, j).items():
                    nv = out.get(t, Fraction(0)) + gc * fcf * c
                    if nv == 0:
                        out.pop(t, None)
                    else:
                        out[t] = nv
        return out

    def identity_key(self, a: str) -> HomKey:
        u = self.fiber_of[a]
        return (self.base.identity[u], a, a)

    def graded_set(self) -> GradedSet:
        return GradedSet(self.base, dict(self.fiber))

    # the singleton-fiber base category, with provenance metadata ---------

    def sharp_base(self):
        """FinCat with one object per fiber element; morphisms remember (u, A, B)."""
        if self._sharp_cache is not None:
            return self._sharp_cache
        objs = [a for u in self.base.objects for a in self.fiber[u]]
        mors = []
        meta: dict[str, HomKey] = {}
        for u in self.base.mors():
            for a in self.fiber[self.base.src[u]]:
                for b in self.fiber[self.base.tgt[u]]:
                    name = f"{u}@{a}>{b}"
                    mors.append((name, a, b))
                    meta[name] = (u, a, b)
        identity = {a: f"{self.base.identity[self.fiber_of[a]]}@{a}>{a}" for a in objs}
        comp = {}
        for m2, (u2, b, c) in meta.items():
            for m1, (u1, a, b1) in meta.items():
                if b1 == b:
                    comp[(m2, m1)] = f"{self.base.comp[(u2, u1)]}@{a}>{c}"
        cat = fc.validate_fincat(objs, mors, identity, comp)
        self._sharp_cache = (cat, meta)
        return self._sharp_cache


def validate_graded_cat(
    base: FinCat, fiber, hom, comp, id_elt, name: str = ""
) -> GradedCat:
    """Build and exhaustively check a graded category.

    Checks: fiber labels unique; hom keys sit on actual (morphism, fiber,
    fiber) triples; composition constants land in the composite space;
    associativity on all composable basis triples; identity elements are
    two-sided units.  Raises the first violation found, naming the triple.
    """
    gc = GradedCat(base, fiber, hom, comp, id_elt, name)
    seen = set()
    for u, elts in gc.fiber.items():
        for a in elts:
            if a in seen:
                raise GradedError(f"duplicate fiber label {a}")
            seen.add(a)
    valid_keys = set(gc.hom_keys())
    for key in gc.hom:
        if key not in valid_keys:
            raise GradedError(f"hom space on invalid key {key}")
    for (gkey, i, fkey, j), vec in gc.comp.items():
        if gc.dim(gkey) <= i or gc.dim(fkey) <= j:
            raise GradedError(f"composition constant on missing basis {(gkey, i, fkey, j)}")
        tkey = gc.composite_key(gkey, fkey)
        if any(t >= gc.dim(tkey) for t in vec):
            raise GradedError(f"composition constant leaves {tkey}")
        if gkey[1] != fkey[2]:
            raise GradedError(f"composition constant on non-composable pair {(gkey, fkey)}")
    for a in seen:
        if a not in gc.id_elt:
            raise BadGradedIdentity(a, "no identity element")
        ikey = gc.identity_key(a)
        if any(t >= gc.dim(ikey) for t in gc.id_elt[a]):
            raise BadGradedIdentity(a, "identity element outside its space")
    # units
    for key in gc.hom:
        u, a, b = key
        ib = gc.id_elt[b]
        ia = gc.id_elt[a]
        for j in range(gc.dim(key)):
            unit = {j: Fraction(1)}
            left = gc.compose_vec(gc.identity_key(b), ib, key, unit)
            if left != unit:
                raise BadGradedIdentity(b, f"left unit fails on {key}[{j}]")
            right = gc.compose_vec(key, unit, gc.identity_key(a), ia)
            if right != unit:
                raise BadGradedIdentity(a, f"right unit fails on {key}[{j}]")
    # associativity on all composable basis triples
    keys_by_src: dict[str, list[HomKey]] = {}
    for key in gc.hom:
        keys_by_src.setdefault(key[1], []).append(key)
    for fkey in gc.hom:
        for gkey in keys_by_src.get(fkey[2], ()):
            gf = gc.composite_key(gkey, fkey)
            for hkey in keys_by_src.get(gkey[2], ()):
                for i in range(gc.dim(hkey)):
                    for j in range(gc.dim(gkey)):
                        hg = gc.compose_vec(hkey, {i: Fraction(1)}, gkey, {j: Fraction(1)})
                        hgkey = gc.composite_key(hkey, gkey)
                        for k in range(gc.dim(fkey)):
                            gfv = gc.compose_vec(gkey, {j: Fraction(1)}, fkey, {k: Fraction(1)})
                            lhs = gc.compose_vec(hkey, {i: Fraction(1)}, gf, gfv)
                            rhs = gc.compose_vec(hgkey, hg, fkey, {k: Fraction(1)})
                            if lhs != rhs:
                                raise NonAssociativeGraded((hkey, i, gkey, j, fkey, k))
    return gc


# graded functors ------------------------------------------------------------


class GradedFunctor:
    """Functor over a base functor, with one matrix per source hom space."""

    def __init__(self, source: GradedCat, target: GradedCat, base_functor: Functor,
                 obj_map: dict[str, str], hom_mats: dict[HomKey, QMatrix], name: str = ""):
        self.source = source
        self.target = target
        self.base_functor = base_functor
        self.obj_map = dict(obj_map)
        self.hom_mats = dict(hom_mats)
        self.name = name

    def image_key(self, key: HomKey) -> HomKey:
        v, b, b2 = key
        return (self.base_functor.mor_map[v], self.obj_map[b], self.obj_map[b2])

    def mat(self, key: HomKey) -> QMatrix:
        m = self.hom_mats.get(key)
        if m is None:
            m = QMatrix(self.target.dim(self.image_key(key)), self.source.dim(key))
        return m

    def apply_vec(self, key: HomKey, vec: Vec) -> Vec:
        m = self.mat(key)
        out: Vec = {}
        for (r, c), mv in m.entries.items():
            x = vec.get(c)
            if x:
                nv = out.get(r, Fraction(0)) + mv * x
                if nv == 0:
                    out.pop(r, None)
                else:
                    out[r] = nv
        return out

    def set_map(self) -> GradedSetMap:
        return GradedSetMap(self.base_functor, dict(self.obj_map))


def validate_graded_functor(f: GradedFunctor) -> GradedFunctor:
    fc.validate_functor(f.base_functor)
    for v in f.source.base.objects:
        for b in f.source.fiber[v]:
            a = f.obj_map.get(b)
            if a is None or f.target.fiber_of.get(a) != f.base_functor.obj_map[v]:
                raise GradedError(f"object map wrong on {b}")
    for key in f.source.hom_keys():
        m = f.mat(key)
        if (m.rows, m.cols) != (f.target.dim(f.image_key(key)), f.source.dim(key)):
            raise GradedError(f"matrix shape wrong at {key}")
    for b in f.source.fiber_of:
        ikey = f.source.identity_key(b)
        img = f.apply_vec(ikey, f.source.id_elt[b])
        if img != f.target.id_elt[f.obj_map[b]]:
            raise GradedError(f"functor breaks identity at {b}")
    for fkey in f.source.hom_keys():
        for gkey in f.source.hom_keys():
            if gkey[1] != fkey[2]:
                continue
            for i in range(f.source.dim(gkey)):
                for j in range(f.source.dim(fkey)):
                    inside = f.source.compose_basis(gkey, i, fkey, j)
                    lhs = f.apply_vec(f.source.composite_key(gkey, fkey), inside)
                    rhs = f.target.compose_vec(
                        f.image_key(gkey), f.apply_vec(gkey, {i: Fraction(1)}),
                        f.image_key(fkey), f.apply_vec(fkey, {j: Fraction(1)}),
                    )
                    if lhs != rhs:
                        raise GradedError(f"functor breaks composition at {(gkey, i, fkey, j)}")
    return f


def identity_graded_functor(a: GradedCat) -> GradedFunctor:
    mats = {k: QMatrix.identity(a.dim(k)) for k in a.hom}
    return GradedFunctor(a, a, fc.identity_functor(a.base), {x: x for x in a.fiber_of}, mats)


def compose_graded_functors(g: GradedFunctor, f: GradedFunctor) -> GradedFunctor:
    mats = {}
    for key in f.source.hom_keys():
        mats[key] = g.mat(f.image_key(key)) * f.mat(key)
    return GradedFunctor(
        f.source, g.target, fc.compose_functors(g.base_functor, f.base_functor),
        {b: g.obj_map[f.obj_map[b]] for b in f.obj_map}, mats,
    )


def is_subcartesian(f: GradedFunctor) -> bool:
    """All hom matrices invertible (square of full rank)."""
    for key in f.source.hom_keys():
        m = f.mat(key)
        if m.rows != m.cols or ql.rank(m) != m.rows:
            return False
    return True


def is_cartesian(f: GradedFunctor) -> bool:
    """Subcartesian and bijective on each fiber."""
    if not is_subcartesian(f):
        return False
    for v in f.source.base.objects:
        img = [f.obj_map[b] for b in f.source.fiber[v]]
        if sorted(img) != sorted(f.target.fiber[f.base_functor.obj_map[v]]):
            return False
    return True


# sharp construction ----------------------------------------------------------


def sharp(a: GradedCat) -> tuple[GradedCat, GradedFunctor]:
    """Singleton-fiber version of a graded category, with its counit functor."""
    sbase, meta = a.sharp_base()
    fiber = {obj: (obj,) for obj in sbase.objects}
    hom = {}
    comp = {}
    for m, key in meta.items():
        u, x, y = key
        if a.dim(key):
            hom[(m, x, y)] = a.labels(key)
    for m2, k2 in meta.items():
        for m1, k1 in meta.items():
            if k1[2] != k2[1]:
                continue
            for i in range(a.dim(k2)):
                for j in range(a.dim(k1)):
                    vec = a.compose_basis(k2, i, k1, j)
                    if vec:
                        comp[((m2, k2[1], k2[2]), i, (m1, k1[1], k1[2]), j)] = vec
    id_elt = {x: dict(a.id_elt[x]) for x in a.fiber_of}
    sharped = GradedCat(sbase, fiber, hom, comp, id_elt, name=f"sharp({a.name})")
    counit_base = Functor(
        sbase, a.base,
        {x: a.fiber_of[x] for x in sbase.objects},
        {m: key[0] for m, key in meta.items()},
    )
    mats = {(m, key[1], key[2]): QMatrix.identity(a.dim(key)) for m, key in meta.items()}
    counit = GradedFunctor(sharped, a, counit_base, {x: x for x in a.fiber_of}, mats)
    return sharped, counit


def sharp_graded_functor(f: GradedFunctor) -> GradedFunctor:
    """The induced graded functor between the singleton-fiber versions."""
    src_sharp, _ = sharp(f.source)
    tgt_sharp, _ = sharp(f.target)
    base = sharp_functor(f)
    mats = {}
    for m, key in f.source.sharp_base()[1].items():
        mats[(m, key[1], key[2])] = f.mat(key)
    return GradedFunctor(src_sharp, tgt_sharp, base, dict(f.obj_map), mats)


def sharp_functor(f: GradedFunctor) -> Functor:
    """The plain functor between singleton-fiber base categories."""
    sb, smeta = f.source.sharp_base()
    tb, _ = f.target.sharp_base()
    obj_map = {x: f.obj_map[x] for x in sb.objects}
    mor_map = {}
    for m, (v, b, b2) in smeta.items():
        u = f.base_functor.mor_map[v]
        mor_map[m] = f"{u}@{f.obj_map[b]}>{f.obj_map[b2]}"
    return fc.validate_functor(Functor(sb, tb, obj_map, mor_map))


def sharp_set_functor(a_shape: GradedSet, b_shape: GradedSet, m: GradedSetMap) -> Functor:
    """Sharp of a graded-set map: a functor between singleton-fiber bases."""
    sb = _set_sharp_base(b_shape)
    tb = _set_sharp_base(a_shape)
    obj_map = {x: m.fiber_map[x] for x in sb.objects}
    mor_map = {}
    for mor, s, t in sb.morphisms:
        v = mor.split("@", 1)[0]
        u = m.base_functor.mor_map[v]
        mor_map[mor] = f"{u}@{m.fiber_map[s]}>{m.fiber_map[t]}"
    return fc.validate_functor(Functor(sb, tb, obj_map, mor_map))


def _set_sharp_base(x: GradedSet) -> FinCat:
    objs = [a for u in x.base.objects for a in x.fiber.get(u, ())]
    fiber_of = {a: u for u in x.base.objects for a in x.fiber.get(u, ())}
    mors = []
    for u in x.base.mors():
        for a in x.fiber.get(x.base.src[u], ()):
            for b in x.fiber.get(x.base.tgt[u], ()):
                mors.append((f"{u}@{a}>{b}", a, b))
    identity = {a: f"{x.base.identity[fiber_of[a]]}@{a}>{a}" for a in objs}
    comp = {}
    for m2, s2, t2 in mors:
        u2 = m2.split("@", 1)[0]
        for m1, s1, t1 in mors:
            if t1 != s2:
                continue
            u1 = m1.split("@", 1)[0]
            comp[(m2, m1)] = f"{x.base.comp[(u2, u1)]}@{s1}>{t2}"
    return fc.validate_fincat(objs, mors, identity, comp)


def is_graded_n_cover(legs: Sequence[GradedFunctor], n, depth=None) -> fc.CoverVerdict:
    """n-cover at the graded level: joint surjectivity of the sharp nerves."""
    return fc.is_n_cover([sharp_functor(f) for f in legs], n, depth=depth)


def is_set_n_cover(shape: GradedSet, legs: Sequence[tuple[GradedSet, GradedSetMap]], n, depth=None) -> fc.CoverVerdict:
    return fc.is_n_cover(
        [sharp_set_functor(shape, piece_shape, m) for piece_shape, m in legs], n, depth=depth
    )


# restriction -----------------------------------------------------------------


def restrict(a: GradedCat, functor: Functor) -> tuple[GradedCat, GradedFunctor]:
    """Pull a graded category back along a functor into its base.

    Fiber labels are reused verbatim when the functor is injective on
    objects (restriction is then strictly functorial); otherwise they are
    pair-encoded to keep fibers disjoint.
    """
    if functor.target != a.base:
        raise fc.TargetMismatch("restriction functor must land in the base")
    injective = len(set(functor.obj_map.values())) == len(functor.obj_map)
    sub = functor.source

    def lab(v: str, x: str) -> str:
        return x if injective else f"{v}|{x}"

    fiber = {v: tuple(lab(v, x) for x in a.fiber[functor.obj_map[v]]) for v in sub.objects}
    hom = {}
    comp = {}
    for v in sub.mors():
        u = functor.mor_map[v]
        sv, tv = sub.src[v], sub.tgt[v]
        for x in a.fiber[functor.obj_map[sv]]:
            for y in a.fiber[functor.obj_map[tv]]:
                key_up = (u, x, y)
                if a.dim(key_up):
                    hom[(v, lab(sv, x), lab(tv, y))] = a.labels(key_up)
    for v2 in sub.mors():
        for v1 in sub.mors():
            if sub.tgt[v1] != sub.src[v2]:
                continue
            u2, u1 = functor.mor_map[v2], functor.mor_map[v1]
            for x in a.fiber[functor.obj_map[sub.src[v1]]]:
                for y in a.fiber[functor.obj_map[sub.src[v2]]]:
                    for z in a.fiber[functor.obj_map[sub.tgt[v2]]]:
                        k2, k1 = (u2, y, z), (u1, x, y)
                        for i in range(a.dim(k2)):
                            for j in range(a.dim(k1)):
                                vec = a.compose_basis(k2, i, k1, j)
                                if vec:
                                    comp[((v2, lab(sub.src[v2], y), lab(sub.tgt[v2], z)), i,
                                          (v1, lab(sub.src[v1], x), lab(sub.tgt[v1], y)), j)] = vec
    id_elt = {}
    for v in sub.objects:
        for x in a.fiber[functor.obj_map[v]]:
            id_elt[lab(v, x)] = dict(a.id_elt[x])
    restricted = GradedCat(sub, fiber, hom, comp, id_elt, name=f"{a.name}|res")
    mats = {key: QMatrix.identity(restricted.dim(key)) for key in restricted.hom}
    comparison = GradedFunctor(
        restricted, a, functor,
        {lab(v, x): x for v in sub.objects for x in a.fiber[functor.obj_map[v]]},
        mats,
    )
    return restricted, comparison


# pullbacks -------------------------------------------------------------------


def pullback_graded(f1: GradedFunctor, f2: GradedFunctor):
    """Pullback of graded categories; hom spaces are kernels of difference maps."""
    if f1.target is not f2.target and f1.target.hom != f2.target.hom:
        raise fc.TargetMismatch("pullback legs have different graded targets")
    pb_base, p1, p2 = fc.pullback_cat(f1.base_functor, f2.base_functor)
    b1, b2 = f1.source, f2.source
    fiber = {}
    pair_of: dict[str, tuple[str, str]] = {}
    for vpair in pb_base.objects:
        v1, v2 = pair_of_name(vpair)
        elts = []
        for x1 in b1.fiber[v1]:
            for x2 in b2.fiber[v2]:
                if f1.obj_map[x1] == f2.obj_map[x2]:
                    nm = fc.pair_name(x1, x2)
                    elts.append(nm)
                    pair_of[nm] = (x1, x2)
        fiber[vpair] = tuple(elts)
    hom = {}
    kernels: dict[HomKey, list[tuple]] = {}
    key_parts: dict[HomKey, tuple[HomKey, HomKey]] = {}
    for vpair_m in pb_base.mors():
        v1m, v2m = pair_of_name(vpair_m)
        s_pair = pb_base.src[vpair_m]
        t_pair = pb_base.tgt[vpair_m]
        for xp in fiber[s_pair]:
            for yp in fiber[t_pair]:
                x1, x2 = pair_of[xp]
                y1, y2 = pair_of[yp]
                k1 = (v1m, x1, y1)
                k2 = (v2m, x2, y2)
                m1 = f1.mat(k1)
                m2 = f2.mat(k2)
                if m1.rows != m2.rows:
                    raise fc.TargetMismatch("pullback hom target mismatch")
                diff = m1.hstack(m2.scale(-1))
                ker = ql.kernel_basis(diff)
                if ker:
                    key = (vpair_m, xp, yp)
                    hom[key] = tuple(f"k{i}" for i in range(len(ker)))
                    kernels[key] = ker
                    key_parts[key] = (k1, k2)
    comp = {}

    def split(key: HomKey, vec_idx: int):
        k1, k2 = key_parts[key]
        d1 = b1.dim(k1)
        kv = kernels[key][vec_idx]
        left = {i: kv[i] for i in range(d1) if kv[i] != 0}
        right = {i - d1: kv[i] for i in range(d1, len(kv)) if kv[i] != 0}
        return left, right

    for gkey in hom:
        for fkey in hom:
            if fkey[2] != gkey[1]:
                continue
            g1, g2 = key_parts[gkey]
            h1, h2 = key_parts[fkey]
            tkey = None
            for i in range(len(hom[gkey])):
                gl, gr = split(gkey, i)
                for j in range(len(hom[fkey])):
                    fl, fr = split(fkey, j)
                    c1 = b1.compose_vec(g1, gl, h1, fl)
                    c2 = b2.compose_vec(g2, gr, h2, fr)
                    gkey_f = (gkey, fkey)
                    tkey = (pb_base.comp[(gkey[0], fkey[0])], fkey[1], gkey[2])
                    if tkey not in kernels:
                        if c1 or c2:
                            raise GradedError("pullback composition escapes its space")
                        continue
                    t1, t2 = key_parts[tkey]
                    amb = [c1.get(r, Fraction(0)) for r in range(b1.dim(t1))]
                    amb += [c2.get(r, Fraction(0)) for r in range(b2.dim(t2))]
                    coords = ql.Subspace(len(amb), kernels[tkey]).coords(amb)
                    if coords is None:
                        raise GradedError("pullback composition escapes the kernel")
                    vec = {t: c for t, c in enumerate(coords) if c != 0}
                    if vec:
                        comp[(gkey, i, fkey, j)] = vec
    id_elt = {}
    for vpair in pb_base.objects:
        for xp in fiber[vpair]:
            x1, x2 = pair_of[xp]
            key = (pb_base.identity[vpair], xp, xp)
            i1 = b1.id_elt[x1]
            i2 = b2.id_elt[x2]
            k1, k2 = key_parts[key]
            amb = [i1.get(r, Fraction(0)) for r in range(b1.dim(k1))]
            amb += [i2.get(r, Fraction(0)) for r in range(b2.dim(k2))]
            coords = ql.Subspace(len(amb), kernels[key]).coords(amb)
            if coords is None:
                raise GradedError("pullback identity escapes the kernel")
            id_elt[xp] = {t: c for t, c in enumerate(coords) if c != 0}
    pb = GradedCat(pb_base, fiber, hom, comp, id_elt, name="pullback")
    mats1 = {}
    mats2 = {}
    for key, kers in kernels.items():
        k1, k2 = key_parts[key]
        d1 = b1.dim(k1)
        m1 = QMatrix(d1, len(kers), {(r, c): kers[c][r] for c in range(len(kers)) for r in range(d1) if kers[c][r] != 0})
        d2 = b2.dim(k2)
        m2 = QMatrix(d2, len(kers), {(r, c): kers[c][r + d1] for c in range(len(kers)) for r in range(d2) if kers[c][r + d1] != 0})
        mats1[key] = m1
        mats2[key] = m2
    g1 = GradedFunctor(pb, b1, p1, {xp: pair_of[xp][0] for xp in pair_of}, mats1)
    g2 = GradedFunctor(pb, b2, p2, {xp: pair_of[xp][1] for xp in pair_of}, mats2)
    return pb, g1, g2


def pair_of_name(name: str) -> tuple[str, str]:
    assert name.startswith("(") and name.endswith(")")
    depth = 0
    for i, ch in enumerate(name):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 1:
            return name[1:i], name[i + 1:-1]
    raise ValueError(f"not a pair name: {name}")


# structural equality ---------------------------------------------------------


def graded_cats_equal(a: GradedCat, b: GradedCat, obj_bij=None, basis_bij=None,
                      base_obj_bij=None, base_mor_bij=None) -> bool:
    """Equality up to the supplied structure-preserving relabelling.

    All bijections default to the identity; no isomorphism search happens
    here.  `basis_bij` maps (a hom key, index) to an index in b's space.
    """
    bo = base_obj_bij or (lambda o: o)
    bm = base_mor_bij or (lambda m: m)
    ob = obj_bij or (lambda x: x)
    if sorted(bo(o) for o in a.base.objects) != sorted(b.base.objects):
        return False
    for u in a.base.objects:
        if sorted(ob(x) for x in a.fiber[u]) != sorted(b.fiber[bo(u)]):
            return False

    def map_key(key: HomKey) -> HomKey:
        u, x, y = key
        return (bm(u), ob(x), ob(y))

    bij = basis_bij or (lambda key, i: i)
    for key in a.hom_keys():
        if a.dim(key) != b.dim(map_key(key)):
            return False
    for key, vec in a.id_elt.items():
        mapped = {bij(a.identity_key(key), t): c for t, c in vec.items()}
        if mapped != b.id_elt[ob(key)]:
            return False
    for gkey in a.hom_keys():
        for fkey in a.hom_keys():
            if fkey[2] != gkey[1]:
                continue
            tkey = a.composite_key(gkey, fkey)
            for i in range(a.dim(gkey)):
                for j in range(a.dim(fkey)):
                    vec = a.compose_basis(gkey, i, fkey, j)
                    mapped = {bij(tkey, t): c for t, c in vec.items()}
                    other = b.compose_basis(map_key(gkey), bij(gkey, i), map_key(fkey), bij(fkey, j))
                    if mapped != other:
                        return False
    return True


# descent ----------------------------------------------------------------------


@dataclass
class DescentDatum:
    """Local graded categories on a cover of a graded set, plus overlap isos.

    `legs[i]` is (piece, set map into the target shape); `overlap_isos[(i, j)]`
    assigns to every pair of sharp morphisms with equal image a matrix from
    piece i's hom space to piece j's.  Identity pairs (i, i) may be omitted
    (defaulting to identities).
    """

    shape: GradedSet
    legs: list[tuple[GradedCat, GradedSetMap]]
    overlap_isos: dict[tuple[int, int], dict[tuple, QMatrix]]

    def iso(self, i: int, j: int, mi, mj) -> QMatrix:
        if (i, j) in self.overlap_isos and (mi, mj) in self.overlap_isos[(i, j)]:
            return self.overlap_isos[(i, j)][(mi, mj)]
        if i == j and mi == mj:
            piece = self.legs[i][0]
            return QMatrix.identity(piece.dim(mi))
        raise GradedError(f"missing overlap iso ({i},{j}) at {(mi, mj)}")


def _sharp_morphisms(gc: GradedCat) -> list[HomKey]:
    return [k for k in gc.hom_keys()]


def _sharp_image(m: GradedSetMap, key: HomKey) -> HomKey:
    v, b, b2 = key
    return (m.base_functor.mor_map[v], m.fiber_map[b], m.fiber_map[b2])


@dataclass
class GlueResult:
    glued: GradedCat
    comparisons: list[GradedFunctor]  # piece_i -> glued restricted along leg i
    chosen_lift: dict[HomKey, tuple[int, HomKey]]


def glue_descent(datum: DescentDatum, cover_degree: int = 3, override_cover: bool = False) -> GlueResult:
    """Glue a descent datum over an n-cover (n >= 3) of the underlying shape.

    Follows the constructive argument: hom spaces of the glued category are
    the local spaces transported along the overlap isomorphisms to a chosen
    (lexicographically first) lift; composition is computed through a chosen
    composable lift and re-checked against every other one; associativity is
    verified post hoc, which re-establishes the cover hypothesis on the
    instance.
    """
    legs_for_cover = [(piece.graded_set(), m) for piece, m in datum.legs]
    if not override_cover:
        verdict = is_set_n_cover(datum.shape, legs_for_cover, cover_degree)
        if not verdict:
            raise NotACover(f"not a {cover_degree}-cover; unhit simplex {verdict.witness}")
    # cocycle on triple overlaps (checked on every triple of lifts)
    lifts: dict[HomKey, list[tuple[int, HomKey]]] = {}
    for i, (piece, m) in enumerate(datum.legs):
        for key in _sharp_morphisms(piece):
            lifts.setdefault(_sharp_image(m, key), []).append((i, key))
    for target_key, lift_list in sorted(lifts.items()):
        for (i, mi) in lift_list:
            for (j, mj) in lift_list:
                for (k, mk) in lift_list:
                    lhs = datum.iso(j, k, mj, mk) * datum.iso(i, j, mi, mj)
                    rhs = datum.iso(i, k, mi, mk)
                    if lhs != rhs:
                        raise CocycleViolated(i, j, k, (mi, mj, mk))
    # glued spaces: basis of the lexicographically first lift
    base = datum.shape.base
    fiber = {u: tuple(datum.shape.fiber.get(u, ())) for u in base.objects}
    hom: dict[HomKey, tuple[str, ...]] = {}
    chosen: dict[HomKey, tuple[int, HomKey]] = {}
    transport: dict[tuple[int, HomKey], QMatrix] = {}
    for target_key, lift_list in lifts.items():
        lift_list.sort(key=lambda t: (t[0], t[1]))
        i0, m0 = lift_list[0]
        piece0 = datum.legs[i0][0]
        if piece0.dim(m0):
            hom[target_key] = piece0.labels(m0)
        chosen[target_key] = (i0, m0)
        for (i, mi) in lift_list:
            transport[(i, mi)] = datum.iso(i, i0, mi, m0)
    # composition through a chosen composable lift, checked on all lifts
    comp: dict[tuple[HomKey, int, HomKey, int], Vec] = {}
    all_keys = [k for k in hom]
    for gkey in all_keys:
        for fkey in all_keys:
            if fkey[2] != gkey[1]:
                continue
            tkey = (base.comp[(gkey[0], fkey[0])], fkey[1], gkey[2])
            candidates = []
            for i, (piece, m) in enumerate(datum.legs):
                for g_l in lifts.get(gkey, []):
                    if g_l[0] != i:
                        continue
                    for f_l in lifts.get(fkey, []):
                        if f_l[0] != i:
                            continue
                        if f_l[1][2] == g_l[1][1]:
                            candidates.append((i, g_l[1], f_l[1]))
            if not candidates:
                raise NotACover(f"no composable lift for {(gkey, fkey)}")
            candidates.sort()
            mats = []
            for (i, gm, fm) in candidates:
                piece = datum.legs[i][0]
                tg = transport[(i, gm)]
                tf = transport[(i, fm)]
                tt = transport[(i, piece.composite_key(gm, fm))]
                dim_g, dim_f = piece.dim(gm), piece.dim(fm)
                # matrix of the induced bilinear map in glued coordinates
                entries = {}
                ginv = _invert(tg)
                finv = _invert(tf)
                for gi in range(dim_g):
                    gvec = {r: ginv.get((r, gi), Fraction(0)) for r in range(dim_g)}
                    gvec = {r: c for r, c in gvec.items() if c != 0}
                    for fi in range(dim_f):
                        fvec = {r: finv.get((r, fi), Fraction(0)) for r in range(dim_f)}
                        fvec = {r: c for r, c in fvec.items() if c != 0}
                        local = piece.compose_vec(gm, gvec, fm, fvec)
                        out: Vec = {}
                        for (r, c), tv in tt.entries.items():
                            x = local.get(c)
                            if x:
                                nv = out.get(r, Fraction(0)) + tv * x
                                if nv == 0:
                                    out.pop(r, None)
                                else:
                                    out[r] = nv
                        entries[(gi, fi)] = out
                mats.append(((i, gm, fm), entries))
            first = mats[0][1]
            for ident, entries in mats[1:]:
                if entries != first:
                    raise CompositionIllDefined((gkey, fkey), (mats[0][0], ident))
            for (gi, fi), vec in first.items():
                if vec:
                    comp[(gkey, gi, fkey, fi)] = vec
    # identity elements: transported from a lift that is itself an identity
    id_elt: dict[str, Vec] = {}
    for u in base.objects:
        for x in datum.shape.fiber.get(u, ()):
            ikey = (base.identity[u], x, x)
            id_lift = None
            for (i, m) in lifts.get(ikey, []):
                piece = datum.legs[i][0]
                v, y, y2 = m
                if y == y2 and v == piece.base.identity[piece.fiber_of[y]]:
                    id_lift = (i, m)
                    break
            if id_lift is None:
                raise NotACover(f"no identity lift of object {x}")
            i0, m0 = id_lift
            piece = datum.legs[i0][0]
            vec = piece.id_elt[m0[1]]
            t = transport[(i0, m0)]
            out: Vec = {}
            for (r, c), tv in t.entries.items():
                xv = vec.get(c)
                if xv:
                    out[r] = out.get(r, Fraction(0)) + tv * xv
            id_elt[x] = {r: c for r, c in out.items() if c != 0}
    try:
        glued = validate_graded_cat(base, fiber, hom, comp, id_elt, name="glued")
    except NonAssociativeGraded as exc:
        raise AssociativityFailed(exc.triple) from exc
    # canonical comparison functors piece_i -> glued restricted along leg i
    comparisons = []
    for i, (piece, m) in enumerate(datum.legs):
        mats = {}
        for key in piece.hom_keys():
            mats[key] = transport[(i, key)]
        comparisons.append(
            GradedFunctor(piece, glued, m.base_functor, dict(m.fiber_map), mats)
        )
    for f in comparisons:
        validate_graded_functor(f)
    return GlueResult(glued, comparisons, chosen)


def _invert(m: QMatrix) -> dict[tuple[int, int], Fraction]:
    if m.rows != m.cols:
        raise GradedError("cannot invert non-square transport")
    n = m.rows
    aug = m.hstack(QMatrix.identity(n))
    pivots, reduced = ql.rref(aug)
    if pivots[:n] != list(range(n)):
        raise GradedError("transport matrix not invertible")
    inv = {}
    for r, row in enumerate(reduced):
        for c, v in row.items():
            if c >= n and v != 0:
                inv[(r, c - n)] = v
    return inv


# coproducts -------------------------------------------------------------------


def coproduct_graded(cats: Sequence[GradedCat], tags: Sequence[str]) -> tuple[GradedCat, list[GradedFunctor]]:
    base, incls = fc.coproduct([c.base for c in cats], tags)
    fiber = {}
    hom = {}
    comp = {}
    id_elt = {}
    for c, tag, incl in zip(cats, tags, incls):
        for u in c.base.objects:
            fiber[incl.obj_map[u]] = tuple(f"{tag}{x}" for x in c.fiber[u])
        for (u, x, y), labels in c.hom.items():
            hom[(incl.mor_map[u], f"{tag}{x}", f"{tag}{y}")] = labels
        for (gk, i, fk, j), vec in c.comp.items():
            gk2 = (incl.mor_map[gk[0]], f"{tag}{gk[1]}", f"{tag}{gk[2]}")
            fk2 = (incl.mor_map[fk[0]], f"{tag}{fk[1]}", f"{tag}{fk[2]}")
            comp[(gk2, i, fk2, j)] = vec
        for x, vec in c.id_elt.items():
            id_elt[f"{tag}{x}"] = dict(vec)
    total = GradedCat(base, fiber, hom, comp, id_elt, name="+".join(c.name for c in cats))
    gfs = []
    for c, tag, incl in zip(cats, tags, incls):
        mats = {key: QMatrix.identity(c.dim(key)) for key in c.hom}
        gfs.append(GradedFunctor(c, total, incl, {x: f"{tag}{x}" for x in c.fiber_of}, mats))
    return total, gfs
