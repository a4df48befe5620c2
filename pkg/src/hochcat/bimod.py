"""Bimodules over map-graded categories.

A bimodule between two graded categories assigns a Q-vector space with a
chosen basis to every element of a carrier set-bifunctor (together with a
compatible pair of fiber objects), acted on by the left category after and
by the right category before.  Tensor products are computed as explicit
cokernels of the middle-action relation map, Hom spaces as kernels of the
equivariance system, so every derived space again has a deterministic basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import fincat as fc
from . import graded as gr
from . import qlinalg as ql
from .fincat import SetBifunctor
from .graded import GradedCat, GradedFunctor, Vec
from .qlinalg import QMatrix

F0 = Fraction(0)
F1 = Fraction(1)

SpaceKey = tuple[str, str, str]  # (carrier element, right fiber elt, left fiber elt)


class BimodError(Exception):
    pass


class MiddleMismatch(BimodError):
    pass


class ShapeMismatch(BimodError):
    pass


class NotADecomposition(BimodError):
    pass


class Bimodule:
    """Spaces M_s(B, A) with a left action of `left` and right action of `right`."""

    def __init__(self, left: GradedCat, right: GradedCat, carrier: SetBifunctor,
                 basis, left_act, right_act, name: str = ""):
        self.left = left
        self.right = right
        self.carrier = carrier
        self.basis: dict[SpaceKey, tuple[str, ...]] = {k: tuple(v) for k, v in basis.items() if v}
        self.left_act: dict[tuple, Vec] = {k: dict(v) for k, v in left_act.items() if v}
        self.right_act: dict[tuple, Vec] = {k: dict(v) for k, v in right_act.items() if v}
        self.name = name
        self.cell = carrier.cell_of()

    def dim(self, key: SpaceKey) -> int:
        return len(self.basis.get(key, ()))

    def labels(self, key: SpaceKey) -> tuple[str, ...]:
        return self.basis.get(key, ())

    def space_keys(self) -> list[SpaceKey]:
        out = []
        for s in self.carrier.all_elements():
            v, u = self.cell[s]
            for b in self.right.fiber[v]:
                for a in self.left.fiber[u]:
                    out.append((s, b, a))
        return out

    def left_target(self, lkey, skey) -> SpaceKey:
        u, a, a2 = lkey
        s, b, a_ = skey
        return (self.carrier.left_action[(u, s)], b, a2)

    def right_target(self, skey, rkey) -> SpaceKey:
        s, b, a = skey
        v, b2, b_ = rkey
        return (self.carrier.right_action[(s, v)], b2, a)

    def apply_left(self, lkey, avec: Vec, skey, mvec: Vec) -> Vec:
        out: Vec = {}
        for i, ac in avec.items():
            for j, mc in mvec.items():
                for t, c in self.left_act.get((lkey, i, skey, j), {}).items():
                    nv = out.get(t, F0) + ac * mc * c
                    if nv == 0:
                        out.pop(t, None)
                    else:
                        out[t] = nv
        return out

    def apply_right(self, skey, mvec: Vec, rkey, bvec: Vec) -> Vec:
        out: Vec = {}
        for j, mc in mvec.items():
            for k, bc in bvec.items():
                for t, c in self.right_act.get((skey, j, rkey, k), {}).items():
                    nv = out.get(t, F0) + mc * bc * c
                    if nv == 0:
                        out.pop(t, None)
                    else:
                        out[t] = nv
        return out


def validate_bimodule(m: Bimodule) -> Bimodule:
    """Exhaustive action axioms: units, both associativities, commutation."""
    fc.validate_bifunctor(m.carrier)
    valid = set(m.space_keys())
    for key in m.basis:
        if key not in valid:
            raise BimodError(f"space on invalid key {key}")
    for (lkey, i, skey, j), vec in m.left_act.items():
        tkey = m.left_target(lkey, skey)
        if lkey[1] != skey[2]:
            raise BimodError(f"left action on mismatched objects {(lkey, skey)}")
        if any(t >= m.dim(tkey) for t in vec):
            raise BimodError(f"left action leaves {tkey}")
    for (skey, j, rkey, k), vec in m.right_act.items():
        tkey = m.right_target(skey, rkey)
        if skey[1] != rkey[2]:
            raise BimodError(f"right action on mismatched objects {(skey, rkey)}")
        if any(t >= m.dim(tkey) for t in vec):
            raise BimodError(f"right action leaves {tkey}")
    lcat, rcat = m.left, m.right
    for skey in m.basis:
        s, b, a = skey
        for j in range(m.dim(skey)):
            mj = {j: F1}
            ik = lcat.identity_key(a)
            if m.apply_left(ik, lcat.id_elt[a], skey, mj) != mj:
                raise BimodError(f"left unit fails at {skey}[{j}]")
            ikr = rcat.identity_key(b)
            if m.apply_right(skey, mj, ikr, rcat.id_elt[b]) != mj:
                raise BimodError(f"right unit fails at {skey}[{j}]")
    lkeys_by_src: dict[str, list] = {}
    for k in lcat.hom:
        lkeys_by_src.setdefault(k[1], []).append(k)
    rkeys_by_tgt: dict[str, list] = {}
    for k in rcat.hom:
        rkeys_by_tgt.setdefault(k[2], []).append(k)
    for skey in m.basis:
        s, b, a = skey
        for j in range(m.dim(skey)):
            mj = {j: F1}
            for lk1 in lkeys_by_src.get(a, ()):
                for i1 in range(lcat.dim(lk1)):
                    a1 = {i1: F1}
                    am = m.apply_left(lk1, a1, skey, mj)
                    t1 = m.left_target(lk1, skey)
                    for lk2 in lkeys_by_src.get(lk1[2], ()):
                        for i2 in range(lcat.dim(lk2)):
                            a2 = {i2: F1}
                            lhs = m.apply_left(lk2, a2, t1, am)
                            comp = lcat.compose_vec(lk2, a2, lk1, a1)
                            rhs = m.apply_left(lcat.composite_key(lk2, lk1), comp, skey, mj)
                            if lhs != rhs:
                                raise BimodError(f"left assoc fails at {(lk2, lk1, skey)}")
            for rk1 in rkeys_by_tgt.get(b, ()):
                for k1 in range(rcat.dim(rk1)):
                    b1 = {k1: F1}
                    mb = m.apply_right(skey, mj, rk1, b1)
                    t1 = m.right_target(skey, rk1)
                    for rk2 in rkeys_by_tgt.get(rk1[1], ()):
                        for k2 in range(rcat.dim(rk2)):
                            b2 = {k2: F1}
                            lhs = m.apply_right(t1, mb, rk2, b2)
                            comp = rcat.compose_vec(rk1, b1, rk2, b2)
                            rhs = m.apply_right(skey, mj, rcat.composite_key(rk1, rk2), comp)
                            if lhs != rhs:
                                raise BimodError(f"right assoc fails at {(skey, rk1, rk2)}")
            for lk1 in lkeys_by_src.get(a, ()):
                for i1 in range(lcat.dim(lk1)):
                    a1 = {i1: F1}
                    for rk1 in rkeys_by_tgt.get(b, ()):
                        for k1 in range(rcat.dim(rk1)):
                            b1 = {k1: F1}
                            am = m.apply_left(lk1, a1, skey, mj)
                            lhs = m.apply_right(m.left_target(lk1, skey), am, rk1, b1)
                            mb = m.apply_right(skey, mj, rk1, b1)
                            rhs = m.apply_left(lk1, a1, m.right_target(skey, rk1), mb)
                            if lhs != rhs:
                                raise BimodError(f"actions do not commute at {(lk1, skey, rk1)}")
    return m


def identity_bimodule(a: GradedCat) -> Bimodule:
    """The category acting on itself; spaces are its own hom spaces."""
    carrier = fc.identity_bifunctor(a.base)
    basis = {}
    for key in a.hom_keys():
        if a.dim(key):
            basis[key] = a.labels(key)
    left_act = {}
    right_act = {}
    for (gk, i, fk, j), vec in a.comp.items():
        left_act[(gk, i, fk, j)] = dict(vec)
        right_act[(gk, i, fk, j)] = dict(vec)
    return Bimodule(a, a, carrier, basis, left_act, right_act, name=f"1_{a.name}")


@dataclass
class BimoduleMorphism:
    """Index-wise linear map between bimodules over the same carrier."""

    src: Bimodule
    dst: Bimodule
    mats: dict[SpaceKey, QMatrix]

    def mat(self, key: SpaceKey) -> QMatrix:
        m = self.mats.get(key)
        if m is None:
            m = QMatrix(self.dst.dim(key), self.src.dim(key))
        return m

    def apply(self, key: SpaceKey, vec: Vec) -> Vec:
        out: Vec = {}
        for (r, c), v in self.mat(key).entries.items():
            x = vec.get(c)
            if x:
                nv = out.get(r, F0) + v * x
                if nv == 0:
                    out.pop(r, None)
                else:
                    out[r] = nv
        return out


def validate_bimodule_morphism(f: BimoduleMorphism) -> BimoduleMorphism:
    m, n = f.src, f.dst
    for skey in set(m.space_keys()):
        mm = f.mat(skey)
        if (mm.rows, mm.cols) != (n.dim(skey), m.dim(skey)):
            raise ShapeMismatch(f"morphism matrix shape at {skey}")
    for (lkey, i, skey, j), vec in m.left_act.items():
        tkey = m.left_target(lkey, skey)
        lhs = f.apply(tkey, vec)
        rhs = n.apply_left(lkey, {i: F1}, skey, f.apply(skey, {j: F1}))
        if lhs != rhs:
            raise BimodError(f"morphism breaks left action at {(lkey, i, skey, j)}")
    # left_act only covers nonzero structure constants; also check zero ones
    for skey in m.basis:
        for lkey in m.left.hom_keys():
            if lkey[1] != skey[2]:
                continue
            for i in range(m.left.dim(lkey)):
                for j in range(m.dim(skey)):
                    lhs = f.apply(m.left_target(lkey, skey), m.apply_left(lkey, {i: F1}, skey, {j: F1}))
                    rhs = n.apply_left(lkey, {i: F1}, skey, f.apply(skey, {j: F1}))
                    if lhs != rhs:
                        raise BimodError(f"morphism breaks left action at {(lkey, i, skey, j)}")
        for rkey in m.right.hom_keys():
            if rkey[2] != skey[1]:
                continue
            for k in range(m.right.dim(rkey)):
                for j in range(m.dim(skey)):
                    lhs = f.apply(m.right_target(skey, rkey), m.apply_right(skey, {j: F1}, rkey, {k: F1}))
                    rhs = n.apply_right(skey, f.apply(skey, {j: F1}), rkey, {k: F1})
                    if lhs != rhs:
                        raise BimodError(f"morphism breaks right action at {(skey, rkey, k)}")
    return f


# tensor ---------------------------------------------------------------------


class QuotientSpace:
    """Cokernel of a relation map, with pivot-eliminated coordinates."""

    def __init__(self, slots: list, relations: list[dict[int, Fraction]]):
        self.slots = slots
        rel = QMatrix(len(relations), len(slots))
        for r, row in enumerate(relations):
            for c, v in row.items():
                rel.set(r, c, v)
        pivots, reduced = ql.rref(rel)
        self.pivots = pivots
        self.reduced = reduced
        pivot_set = set(pivots)
        self.free = [i for i in range(len(slots)) if i not in pivot_set]
        self.free_index = {s: i for i, s in enumerate(self.free)}

    @property
    def dim(self):
        return len(self.free)

    def project(self, vec: dict[int, Fraction]) -> Vec:
        work = dict(vec)
        for pcol, row in zip(self.pivots, self.reduced):
            f = work.get(pcol)
            if f:
                for c, v in row.items():
                    nv = work.get(c, F0) - f * v
                    if nv == 0:
                        work.pop(c, None)
                    else:
                        work[c] = nv
        out = {}
        for c, v in work.items():
            if v != 0:
                out[self.free_index[c]] = v
        return out


@dataclass
class TensorResult:
    bimodule: Bimodule
    class_of: dict[tuple[str, str], str]  # (s, t) -> composite carrier element
    # pairing: ((s, B, A), i, (t, C, B), j) -> vector in the tensor space
    pairing: dict[tuple, Vec]


def compose_bifunctors(s: SetBifunctor, t: SetBifunctor):
    """Composite carrier: classes of pairs under the middle-action relation."""
    if s.right != t.left:
        raise MiddleMismatch("bifunctor middles disagree")
    mid = s.right
    cell_s = s.cell_of()
    cell_t = t.cell_of()
    pairs = [
        (x, y)
        for x, (v, u) in sorted(cell_s.items())
        for y, (w, v2) in sorted(cell_t.items())
        if v2 == v
    ]
    parent = {p: p for p in pairs}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    def union(p, q):
        rp, rq = find(p), find(q)
        if rp != rq:
            parent[max(rp, rq)] = min(rp, rq)

    for x, (v, u) in cell_s.items():
        for vm in mid.mors():
            if mid.tgt[vm] != v:
                continue
            xv = s.right_action[(x, vm)]
            for y, (w, v2) in cell_t.items():
                if v2 == mid.src[vm]:
                    union((xv, y), (x, t.left_action[(vm, y)]))
    class_of = {}
    elements: dict[tuple[str, str], list[str]] = {}
    for p in pairs:
        rep = find(p)
        name = f"[{rep[0]},{rep[1]}]"
        class_of[p] = name
        w = cell_t[p[1]][0]
        u = cell_s[p[0]][1]
        cellkey = (w, u)
        elements.setdefault(cellkey, [])
        if name not in elements[cellkey]:
            elements[cellkey].append(name)
    rep_of = {class_of[p]: p for p in pairs if f"[{p[0]},{p[1]}]" == class_of[p]}
    left_action = {}
    for name, (x, y) in rep_of.items():
        u = cell_s[x][1]
        for um in s.left.mors():
            if s.left.src[um] == u:
                left_action[(um, name)] = class_of[(s.left_action[(um, x)], y)]
    right_action = {}
    for name, (x, y) in rep_of.items():
        w = cell_t[y][0]
        for wm in t.right.mors():
            if t.right.tgt[wm] == w:
                right_action[(name, wm)] = class_of[(x, t.right_action[(y, wm)])]
    composite = fc.validate_bifunctor(
        SetBifunctor(s.left, t.right, {k: tuple(v) for k, v in elements.items()},
                     left_action, right_action)
    )
    return composite, class_of


def tensor(m: Bimodule, n: Bimodule, name: str = "") -> TensorResult:
    """Tensor over the shared middle category.

    Each composite space is the quotient of the direct sum of pair spaces by
    the relation (x . b) @ y - x @ (b . y); the basis is the set of non-pivot
    slots of the relation map, in lexicographic slot order.
    """
    if m.right.hom != n.left.hom or m.right.base != n.left.base:
        raise MiddleMismatch("tensor middles disagree")
    mid = m.right
    carrier, class_of = compose_bifunctors(m.carrier, n.carrier)
    cell_s = m.carrier.cell_of()
    cell_t = n.carrier.cell_of()
    members: dict[tuple[str, str, str], list] = {}
    for (x, y), cls in class_of.items():
        v, u = cell_s[x]
        w = cell_t[y][0]
        for c_elt in n.right.fiber[w]:
            for a_elt in m.left.fiber[u]:
                key = (cls, c_elt, a_elt)
                members.setdefault(key, [])
    slots: dict[tuple[str, str, str], list] = {k: [] for k in members}
    for (x, y), cls in sorted(class_of.items()):
        v, u = cell_s[x]
        for b_elt in mid.fiber[v]:
            for a_elt in m.left.fiber[u]:
                for c_elt in n.right.fiber[cell_t[y][0]]:
                    dm = m.dim((x, b_elt, a_elt))
                    dn = n.dim((y, c_elt, b_elt))
                    for i in range(dm):
                        for j in range(dn):
                            slots[(cls, c_elt, a_elt)].append((x, y, b_elt, i, j))
    # relations (x.b) @ y - x @ (b.y); each lands in the class of (x.v, y)
    relation_lists: dict[tuple[str, str, str], list] = {k: [] for k in slots}
    slot_indices = {k: {slot: i for i, slot in enumerate(v)} for k, v in slots.items()}
    for x, (v, u) in sorted(cell_s.items()):
        for rk in mid.hom_keys():
            if not mid.dim(rk):
                continue
            vm, b2_elt, b_elt = rk
            if mid.fiber_of[b_elt] != v:
                continue
            xv = m.carrier.right_action[(x, vm)]
            for y, (w, v2) in sorted(cell_t.items()):
                if v2 != mid.base.src[vm]:
                    continue
                cls = class_of[(xv, y)]
                vy = n.carrier.left_action[(vm, y)]
                for a_elt in m.left.fiber[u]:
                    mkey = (x, b_elt, a_elt)
                    if not m.dim(mkey):
                        continue
                    for c_elt in n.right.fiber[w]:
                        nkey = (y, c_elt, b2_elt)
                        if not n.dim(nkey):
                            continue
                        key = (cls, c_elt, a_elt)
                        slot_index = slot_indices[key]
                        for k in range(mid.dim(rk)):
                            bvec = {k: F1}
                            for i in range(m.dim(mkey)):
                                mb = m.apply_right(mkey, {i: F1}, rk, bvec)
                                for j in range(n.dim(nkey)):
                                    bn = n.apply_left(rk, bvec, nkey, {j: F1})
                                    row: dict[int, Fraction] = {}
                                    for p, cv in mb.items():
                                        idx = slot_index[(xv, y, b2_elt, p, j)]
                                        row[idx] = row.get(idx, F0) + cv
                                    for q, cv in bn.items():
                                        idx = slot_index[(x, vy, b_elt, i, q)]
                                        row[idx] = row.get(idx, F0) - cv
                                    row = {c: v3 for c, v3 in row.items() if v3 != 0}
                                    if row:
                                        relation_lists[key].append(row)
    quotients: dict[tuple[str, str, str], QuotientSpace] = {}
    for key, slot_list in slots.items():
        quotients[key] = QuotientSpace(slot_list, relation_lists[key])
    basis = {}
    for key, q in quotients.items():
        if q.dim:
            basis[key] = tuple(f"t{i}" for i in range(q.dim))
    pairing: dict[tuple, Vec] = {}
    for (x, y), cls in class_of.items():
        v, u = cell_s[x]
        for b_elt in mid.fiber[v]:
            for a_elt in m.left.fiber[u]:
                for c_elt in n.right.fiber[cell_t[y][0]]:
                    mkey = (x, b_elt, a_elt)
                    nkey = (y, c_elt, b_elt)
                    q = quotients[(cls, c_elt, a_elt)]
                    slot_index = {slot: i for i, slot in enumerate(q.slots)}
                    for i in range(m.dim(mkey)):
                        for j in range(n.dim(nkey)):
                            vecq = q.project({slot_index[(x, y, b_elt, i, j)]: F1})
                            pairing[(mkey, i, nkey, j)] = vecq
    # actions: act on a representative slot and project back
    left_act = {}
    right_act = {}
    for key, q in quotients.items():
        cls, c_elt, a_elt = key
        slot_index = {slot: i for i, slot in enumerate(q.slots)}
        for qi, free_slot_pos in enumerate(q.free):
            (x, y, b_elt, i, j) = q.slots[free_slot_pos]
            for lk in m.left.hom_keys():
                if lk[1] != a_elt or not m.left.dim(lk):
                    continue
                tcls = carrier.left_action[(lk[0], cls)]
                tkey = (tcls, c_elt, lk[2])
                tq = quotients[tkey]
                t_index = {slot: ii for ii, slot in enumerate(tq.slots)}
                for li in range(m.left.dim(lk)):
                    am = m.apply_left(lk, {li: F1}, (x, b_elt, a_elt), {i: F1})
                    xv = m.carrier.left_action[(lk[0], x)]
                    vec = {}
                    for p, cv in am.items():
                        vec[t_index[(xv, y, b_elt, p, j)]] = cv
                    out = tq.project(vec)
                    if out:
                        left_act[((lk), li, (cls, c_elt, a_elt), qi)] = out
            for rk in n.right.hom_keys():
                if rk[2] != c_elt or not n.right.dim(rk):
                    continue
                tcls = carrier.right_action[(cls, rk[0])]
                tkey = (tcls, rk[1], a_elt)
                tq = quotients[tkey]
                t_index = {slot: ii for ii, slot in enumerate(tq.slots)}
                for ki in range(n.right.dim(rk)):
                    nb = n.apply_right((y, c_elt, b_elt), {j: F1}, rk, {ki: F1})
                    yw = n.carrier.right_action[(y, rk[0])]
                    vec = {}
                    for p, cv in nb.items():
                        vec[t_index[(x, yw, b_elt, i, p)]] = cv
                    out = tq.project(vec)
                    if out:
                        right_act[((cls, c_elt, a_elt), qi, rk, ki)] = out
    result = Bimodule(m.left, n.right, carrier, basis, left_act, right_act,
                      name=name or f"{m.name}(x){n.name}")
    return TensorResult(result, class_of, pairing)


# hom -------------------------------------------------------------------------


def _check_same_shape(m: Bimodule, n: Bimodule):
    if (m.left.hom != n.left.hom or m.right.hom != n.right.hom
            or m.carrier.elements != n.carrier.elements):
        raise ShapeMismatch("bimodules do not share a shape")


@dataclass
class HomResult:
    bimodule: Bimodule
    # per hom key (u, A, A'): ordered variable slots (s, B, row q, col i) and
    # the kernel basis spanning the solution space in those coordinates
    var_slots: dict[tuple, list]
    solutions: dict[tuple, list[tuple[Fraction, ...]]]


def hom_bimodules(m: Bimodule, n: Bimodule, name: str = "") -> HomResult:
    """Right-module maps M -> u* N, as a bimodule over the left category."""
    _check_same_shape(m, n)
    lcat, rcat = m.left, m.right
    carrier = fc.identity_bifunctor(lcat.base)
    cell = m.cell
    var_slots: dict[tuple, list] = {}
    solutions: dict[tuple, list] = {}
    basis = {}
    for u in lcat.base.mors():
        uu, u2 = lcat.base.src[u], lcat.base.tgt[u]
        for a_elt in lcat.fiber[uu]:
            for a2_elt in lcat.fiber[u2]:
                key = (u, a_elt, a2_elt)
                slots = []
                for s in m.carrier.all_elements():
                    v, ucell = cell[s]
                    if ucell != uu:
                        continue
                    us = m.carrier.left_action[(u, s)]
                    for b_elt in rcat.fiber[v]:
                        dm = m.dim((s, b_elt, a_elt))
                        dn = n.dim((us, b_elt, a2_elt))
                        for q in range(dn):
                            for i in range(dm):
                                slots.append((s, b_elt, q, i))
                slot_index = {slot: ii for ii, slot in enumerate(slots)}
                rows = []
                for s in m.carrier.all_elements():
                    v, ucell = cell[s]
                    if ucell != uu:
                        continue
                    us = m.carrier.left_action[(u, s)]
                    for b_elt in rcat.fiber[v]:
                        mkey = (s, b_elt, a_elt)
                        if not m.dim(mkey):
                            continue
                        for rk in rcat.hom_keys():
                            if rk[2] != b_elt or not rcat.dim(rk):
                                continue
                            sv = m.carrier.right_action[(s, rk[0])]
                            nus_key = (us, b_elt, a2_elt)
                            for i in range(m.dim(mkey)):
                                for k in range(rcat.dim(rk)):
                                    mb = m.apply_right(mkey, {i: F1}, rk, {k: F1})
                                    target_dim = n.dim((m.carrier.left_action[(u, sv)], rk[1], a2_elt))
                                    for qq in range(target_dim):
                                        row: dict[int, Fraction] = {}
                                        for p, cv in mb.items():
                                            row[slot_index[(sv, rk[1], qq, p)]] = cv
                                        for q in range(n.dim(nus_key)):
                                            nb = n.apply_right(nus_key, {q: F1}, rk, {k: F1})
                                            cv = nb.get(qq)
                                            if cv:
                                                idx = slot_index[(s, b_elt, q, i)]
                                                row[idx] = row.get(idx, F0) - cv
                                        row = {c: v2 for c, v2 in row.items() if v2 != 0}
                                        if row:
                                            rows.append(row)
                sysmat = QMatrix(len(rows), len(slots))
                for r, row in enumerate(rows):
                    for c, v2 in row.items():
                        sysmat.set(r, c, v2)
                ker = ql.kernel_basis(sysmat)
                var_slots[key] = slots
                solutions[key] = ker
                if ker:
                    basis[key] = tuple(f"h{i}" for i in range(len(ker)))
    left_act = {}
    right_act = {}
    spaces = {k: ql.Subspace(len(var_slots[k]), solutions[k]) for k in var_slots}

    def coords(key, raw: dict[int, Fraction]) -> Vec:
        vec = [raw.get(i, F0) for i in range(len(var_slots[key]))]
        cs = spaces[key].coords(vec)
        if cs is None:
            raise BimodError("action leaves the solution space")
        return {i: c for i, c in enumerate(cs) if c != 0}

    for key in var_slots:
        u, a_elt, a2_elt = key
        slot_index = {slot: ii for ii, slot in enumerate(var_slots[key])}
        for hi, sol in enumerate(solutions[key]):
            # left action by lk = (w, a2_elt, a3): (a.f)(x) = a.(f(x))
            for lk in lcat.hom_keys():
                if lk[1] != a2_elt or not lcat.dim(lk):
                    continue
                tkey = (lcat.base.comp[(lk[0], u)], a_elt, lk[2])
                raw: dict[int, Fraction] = {}
                t_index = {slot: ii for ii, slot in enumerate(var_slots[tkey])}
                for li in range(lcat.dim(lk)):
                    raw.clear()
                    for pos, cv in enumerate(sol):
                        if cv == 0:
                            continue
                        (s, b_elt, q, i) = var_slots[key][pos]
                        us = m.carrier.left_action[(u, s)]
                        an = n.apply_left(lk, {li: F1}, (us, b_elt, a2_elt), {q: cv})
                        for q2, cv2 in an.items():
                            idx = t_index[(s, b_elt, q2, i)]
                            raw[idx] = raw.get(idx, F0) + cv2
                    out = coords(tkey, raw)
                    if out:
                        left_act[(lk, li, key, hi)] = out
            # right action by rk = (w, a0, a_elt): (f.a)(x) = f(a.x)
            for rk in lcat.hom_keys():
                if rk[2] != a_elt or not lcat.dim(rk):
                    continue
                tkey = (lcat.base.comp[(u, rk[0])], rk[1], a2_elt)
                t_index = {slot: ii for ii, slot in enumerate(var_slots[tkey])}
                for ri in range(lcat.dim(rk)):
                    raw = {}
                    for (s0, b_elt, q, i) in var_slots[tkey]:
                        # f.a at slot (s0, b, q, i): apply a to m-basis i then f
                        u_r_s0 = m.carrier.left_action[(rk[0], s0)]
                        am = m.apply_left(rk, {ri: F1}, (s0, b_elt, rk[1]), {i: F1})
                        for p, cv in am.items():
                            pos = slot_index.get((u_r_s0, b_elt, q, p))
                            if pos is not None and sol[pos] != 0:
                                idx = t_index[(s0, b_elt, q, i)]
                                raw[idx] = raw.get(idx, F0) + cv * sol[pos]
                    out = coords(tkey, raw)
                    if out:
                        right_act[(key, hi, rk, ri)] = out
    hom_bim = Bimodule(lcat, lcat, carrier, basis, left_act, right_act,
                       name=name or f"Hom({m.name},{n.name})")
    return HomResult(hom_bim, var_slots, solutions)


def hom_unit_map(m: Bimodule, hom_mm: HomResult) -> BimoduleMorphism:
    """The canonical map from the identity bimodule to Hom(M, M)."""
    lcat = m.left
    one = identity_bimodule(lcat)
    mats = {}
    for key, slots in hom_mm.var_slots.items():
        u, a_elt, a2_elt = key
        dim_src = lcat.dim(key)
        space = ql.Subspace(len(slots), hom_mm.solutions[key])
        cols = []
        slot_index = {slot: ii for ii, slot in enumerate(slots)}
        for li in range(dim_src):
            raw = [F0] * len(slots)
            for s in m.carrier.all_elements():
                v, ucell = m.cell[s]
                if ucell != lcat.base.src[u]:
                    continue
                for b_elt in m.right.fiber[v]:
                    mkey = (s, b_elt, a_elt)
                    for i in range(m.dim(mkey)):
                        am = m.apply_left(key, {li: F1}, mkey, {i: F1})
                        for q, cv in am.items():
                            raw[slot_index[(s, b_elt, q, i)]] += cv
            cs = space.coords(raw)
            if cs is None:
                raise BimodError("unit map leaves the solution space")
            cols.append(cs)
        mats[key] = QMatrix.from_columns(cols) if cols else QMatrix(len(hom_mm.solutions[key]), 0)
    return BimoduleMorphism(one, hom_mm.bimodule, mats)


def hom_op(m: Bimodule, n: Bimodule, name: str = "") -> HomResult:
    """Left-module maps, as a bimodule over the right category."""
    _check_same_shape(m, n)
    lcat, rcat = m.left, m.right
    carrier = fc.identity_bifunctor(rcat.base)
    cell = m.cell
    var_slots: dict[tuple, list] = {}
    solutions: dict[tuple, list] = {}
    basis = {}
    for v in rcat.base.mors():
        v0, v1 = rcat.base.src[v], rcat.base.tgt[v]
        for b_elt in rcat.fiber[v0]:
            for b1_elt in rcat.fiber[v1]:
                key = (v, b_elt, b1_elt)
                slots = []
                for s in m.carrier.all_elements():
                    vc, uc = cell[s]
                    if vc != v1:
                        continue
                    sv = m.carrier.right_action[(s, v)]
                    for a_elt in lcat.fiber[uc]:
                        dm = m.dim((s, b1_elt, a_elt))
                        dn = n.dim((sv, b_elt, a_elt))
                        for q in range(dn):
                            for i in range(dm):
                                slots.append((s, a_elt, q, i))
                slot_index = {slot: ii for ii, slot in enumerate(slots)}
                rows = []
                for s in m.carrier.all_elements():
                    vc, uc = cell[s]
                    if vc != v1:
                        continue
                    sv = m.carrier.right_action[(s, v)]
                    for a_elt in lcat.fiber[uc]:
                        mkey = (s, b1_elt, a_elt)
                        if not m.dim(mkey):
                            continue
                        for lk in lcat.hom_keys():
                            if lk[1] != a_elt or not lcat.dim(lk):
                                continue
                            us = m.carrier.left_action[(lk[0], s)]
                            nsv_key = (sv, b_elt, a_elt)
                            for i in range(m.dim(mkey)):
                                for k in range(lcat.dim(lk)):
                                    am = m.apply_left(lk, {k: F1}, mkey, {i: F1})
                                    tdim = n.dim((m.carrier.right_action[(us, v)], b_elt, lk[2]))
                                    for qq in range(tdim):
                                        row: dict[int, Fraction] = {}
                                        for p, cv in am.items():
                                            row[slot_index[(us, lk[2], qq, p)]] = cv
                                        for q in range(n.dim(nsv_key)):
                                            an = n.apply_left(lk, {k: F1}, nsv_key, {q: F1})
                                            cv = an.get(qq)
                                            if cv:
                                                idx = slot_index[(s, a_elt, q, i)]
                                                row[idx] = row.get(idx, F0) - cv
                                        row = {c: v2 for c, v2 in row.items() if v2 != 0}
                                        if row:
                                            rows.append(row)
                sysmat = QMatrix(len(rows), len(slots))
                for r, row in enumerate(rows):
                    for c, v2 in row.items():
                        sysmat.set(r, c, v2)
                ker = ql.kernel_basis(sysmat)
                var_slots[key] = slots
                solutions[key] = ker
                if ker:
                    basis[key] = tuple(f"h{i}" for i in range(len(ker)))
    left_act = {}
    right_act = {}
    spaces = {k: ql.Subspace(len(var_slots[k]), solutions[k]) for k in var_slots}

    def coords(key, raw: dict[int, Fraction]) -> Vec:
        vec = [raw.get(i, F0) for i in range(len(var_slots[key]))]
        cs = spaces[key].coords(vec)
        if cs is None:
            raise BimodError("action leaves the solution space")
        return {i: c for i, c in enumerate(cs) if c != 0}

    for key in var_slots:
        v, b_elt, b1_elt = key
        slot_index = {slot: ii for ii, slot in enumerate(var_slots[key])}
        for hi, sol in enumerate(solutions[key]):
            # left action by lk2 = (v2, b1_elt, b2): (b.g)(x) = g(x.b)
            for lk2 in rcat.hom_keys():
                if lk2[1] != b1_elt or not rcat.dim(lk2):
                    continue
                tkey = (rcat.base.comp[(lk2[0], v)], b_elt, lk2[2])
                t_index = {slot: ii for ii, slot in enumerate(var_slots[tkey])}
                for li in range(rcat.dim(lk2)):
                    raw: dict[int, Fraction] = {}
                    for (s0, a_elt, q, i) in var_slots[tkey]:
                        s0v2 = m.carrier.right_action[(s0, lk2[0])]
                        mb = m.apply_right((s0, lk2[2], a_elt), {i: F1}, lk2, {li: F1})
                        for p, cv in mb.items():
                            pos = slot_index.get((s0v2, a_elt, q, p))
                            if pos is not None and sol[pos] != 0:
                                idx = t_index[(s0, a_elt, q, i)]
                                raw[idx] = raw.get(idx, F0) + cv * sol[pos]
                    out = coords(tkey, raw)
                    if out:
                        left_act[(lk2, li, key, hi)] = out
            # right action by rk2 = (v2, b3, b_elt): (g.b)(x) = g(x).b
            for rk2 in rcat.hom_keys():
                if rk2[2] != b_elt or not rcat.dim(rk2):
                    continue
                tkey = (rcat.base.comp[(v, rk2[0])], rk2[1], b1_elt)
                t_index = {slot: ii for ii, slot in enumerate(var_slots[tkey])}
                for ri in range(rcat.dim(rk2)):
                    raw = {}
                    for pos, cv in enumerate(sol):
                        if cv == 0:
                            continue
                        (s, a_elt, q, i) = var_slots[key][pos]
                        sv = m.carrier.right_action[(s, v)]
                        nb = n.apply_right((sv, b_elt, a_elt), {q: cv}, rk2, {ri: F1})
                        for q2, cv2 in nb.items():
                            idx = t_index[(s, a_elt, q2, i)]
                            raw[idx] = raw.get(idx, F0) + cv2
                    out = coords(tkey, raw)
                    if out:
                        right_act[(key, hi, rk2, ri)] = out
    hom_bim = Bimodule(rcat, rcat, carrier, basis, left_act, right_act,
                       name=name or f"Hom_op({m.name},{n.name})")
    return HomResult(hom_bim, var_slots, solutions)


def rename_carrier(b: Bimodule, elt_map: dict[str, str], new_carrier: SetBifunctor) -> Bimodule:
    """Transport a bimodule along a carrier bijection (cell-preserving)."""
    if sorted(elt_map) != sorted(b.cell) or sorted(elt_map.values()) != sorted(new_carrier.cell_of()):
        raise ShapeMismatch("carrier relabelling is not a bijection")
    basis = {(elt_map[s], x, y): v for (s, x, y), v in b.basis.items()}
    left_act = {(lk, i, (elt_map[sk[0]], sk[1], sk[2]), j): v
                for (lk, i, sk, j), v in b.left_act.items()}
    right_act = {((elt_map[sk[0]], sk[1], sk[2]), j, rk, k): v
                 for (sk, j, rk, k), v in b.right_act.items()}
    return Bimodule(b.left, b.right, new_carrier, basis, left_act, right_act, name=b.name)


def collapse_unit_left(tres: TensorResult, m: Bimodule) -> Bimodule:
    """Identify (1 o S, X (x) M) with an S-shaped bimodule via [(u, s)] -> u.s."""
    elt_map = {}
    for (u, s), cls in tres.class_of.items():
        target = m.carrier.left_action[(u, s)]
        if cls in elt_map and elt_map[cls] != target:
            raise ShapeMismatch("unit collapse is not well defined")
        elt_map[cls] = target
    return rename_carrier(tres.bimodule, elt_map, m.carrier)


def collapse_unit_right(tres: TensorResult, m: Bimodule) -> Bimodule:
    """Identify (S o 1, M (x) X) with an S-shaped bimodule via [(s, v)] -> s.v."""
    elt_map = {}
    for (s, v), cls in tres.class_of.items():
        target = m.carrier.right_action[(s, v)]
        if cls in elt_map and elt_map[cls] != target:
            raise ShapeMismatch("unit collapse is not well defined")
        elt_map[cls] = target
    return rename_carrier(tres.bimodule, elt_map, m.carrier)


def bimodule_morphism_space_dim(m: Bimodule, n: Bimodule) -> int:
    """Dimension of the space of bimodule morphisms M -> N (same shape)."""
    _check_same_shape(m, n)
    slots = []
    for skey in sorted(set(m.space_keys())):
        for q in range(n.dim(skey)):
            for i in range(m.dim(skey)):
                slots.append((skey, q, i))
    slot_index = {s: i for i, s in enumerate(slots)}
    rows = []
    for skey in m.space_keys():
        for lk in m.left.hom_keys():
            if lk[1] != skey[2] or not m.left.dim(lk):
                continue
            tkey = m.left_target(lk, skey)
            for li in range(m.left.dim(lk)):
                for i in range(m.dim(skey)):
                    am = m.apply_left(lk, {li: F1}, skey, {i: F1})
                    for qq in range(n.dim(tkey)):
                        row: dict[int, Fraction] = {}
                        for p, cv in am.items():
                            row[slot_index[(tkey, qq, p)]] = cv
                        for q in range(n.dim(skey)):
                            an = n.apply_left(lk, {li: F1}, skey, {q: F1})
                            cv = an.get(qq)
                            if cv:
                                idx = slot_index[(skey, q, i)]
                                row[idx] = row.get(idx, F0) - cv
                        row = {c: v for c, v in row.items() if v != 0}
                        if row:
                            rows.append(row)
        for rk in m.right.hom_keys():
            if rk[2] != skey[1] or not m.right.dim(rk):
                continue
            tkey = m.right_target(skey, rk)
            for ki in range(m.right.dim(rk)):
                for i in range(m.dim(skey)):
                    mb = m.apply_right(skey, {i: F1}, rk, {ki: F1})
                    for qq in range(n.dim(tkey)):
                        row = {}
                        for p, cv in mb.items():
                            row[slot_index[(tkey, qq, p)]] = cv
                        for q in range(n.dim(skey)):
                            nb = n.apply_right(skey, {q: F1}, rk, {ki: F1})
                            cv = nb.get(qq)
                            if cv:
                                idx = slot_index[(skey, q, i)]
                                row[idx] = row.get(idx, F0) - cv
                        row = {c: v for c, v in row.items() if v != 0}
                        if row:
                            rows.append(row)
    sysmat = QMatrix(len(rows), len(slots))
    for r, row in enumerate(rows):
        for c, v in row.items():
            sysmat.set(r, c, v)
    return len(ql.kernel_basis(sysmat))


# restriction ------------------------------------------------------------------


def restrict_bimodule(f: GradedFunctor, m: Bimodule, name: str = "") -> Bimodule:
    """Pull an identity-carrier bimodule back along a graded functor."""
    if m.left is not m.right and m.left.hom != m.right.hom:
        raise ShapeMismatch("restriction needs a bimodule over one category")
    b = f.source
    carrier = fc.identity_bifunctor(b.base)
    basis = {}
    left_act = {}
    right_act = {}
    for v in b.base.mors():
        for x in b.fiber[b.base.src[v]]:
            for y in b.fiber[b.base.tgt[v]]:
                up = (f.base_functor.mor_map[v], f.obj_map[x], f.obj_map[y])
                if m.dim(up):
                    basis[(v, x, y)] = m.labels(up)
    for skey in basis:
        v, x, y = skey
        up = (f.base_functor.mor_map[v], f.obj_map[x], f.obj_map[y])
        for lk in b.hom_keys():
            if lk[1] != y or not b.dim(lk):
                continue
            up_l = f.image_key(lk)
            for li in range(b.dim(lk)):
                fa = f.apply_vec(lk, {li: F1})
                for j in range(m.dim(up)):
                    vec = m.apply_left(up_l, fa, up, {j: F1})
                    if vec:
                        left_act[(lk, li, skey, j)] = vec
        for rk in b.hom_keys():
            if rk[2] != x or not b.dim(rk):
                continue
            up_r = f.image_key(rk)
            for ki in range(b.dim(rk)):
                fb = f.apply_vec(rk, {ki: F1})
                for j in range(m.dim(up)):
                    vec = m.apply_right(up, {j: F1}, up_r, fb)
                    if vec:
                        right_act[(skey, j, rk, ki)] = vec
    return Bimodule(b, b, carrier, basis, left_act, right_act, name=name or f"res({m.name})")


# support ----------------------------------------------------------------------


@dataclass
class SupportSplit:
    inside: Bimodule  # zero outside the ideal
    total: Bimodule
    quotient: Bimodule  # zero on the ideal
    inclusion: BimoduleMorphism
    projection: BimoduleMorphism


def support_split(m: Bimodule, ideal: fc.Ideal, sub: fc.FinCat) -> SupportSplit:
    """Split an identity-carrier bimodule along an ideal-subcategory decomposition."""
    cat = m.left
    if not fc.decomposition_check(cat.base, ideal, sub):
        raise NotADecomposition("not an ideal-subcategory decomposition")
    mem = set(ideal.members)

    def filtered(keep):
        basis = {k: v for k, v in m.basis.items() if keep(k[0])}
        left_act = {}
        for (lk, i, sk, j), vec in m.left_act.items():
            if keep(sk[0]) and keep(m.left_target(lk, sk)[0]):
                left_act[(lk, i, sk, j)] = vec
        right_act = {}
        for (sk, j, rk, k), vec in m.right_act.items():
            if keep(sk[0]) and keep(m.right_target(sk, rk)[0]):
                right_act[(sk, j, rk, k)] = vec
        return Bimodule(m.left, m.right, m.carrier, basis, left_act, right_act)

    inside = filtered(lambda u: u in mem)
    inside.name = f"{m.name}|ideal"
    quotient = filtered(lambda u: u not in mem)
    quotient.name = f"{m.name}|sub"
    validate_bimodule(inside)
    validate_bimodule(quotient)
    incl = BimoduleMorphism(inside, m, {
        k: QMatrix.identity(m.dim(k)) for k in inside.basis
    })
    proj = BimoduleMorphism(m, quotient, {
        k: QMatrix.identity(m.dim(k)) for k in quotient.basis
    })
    validate_bimodule_morphism(incl)
    validate_bimodule_morphism(proj)
    for k in m.basis:
        seq = ql.is_exact_sequence([incl.mat(k), proj.mat(k)])
        if not seq:
            raise BimodError(f"support split not exact at {k}: {seq.reason}")
    return SupportSplit(inside, m, quotient, incl, proj)


# arrow category ---------------------------------------------------------------


@dataclass
class ArrowCategory:
    category: GradedCat
    from_lower: GradedFunctor  # right side of the bimodule
    from_upper: GradedFunctor  # left side
    base: fc.FinCat
    cross_ideal: fc.Ideal


def arrow_category(m: Bimodule, name: str = "") -> ArrowCategory:
    """Glue the two categories along the bimodule, cross morphisms one way."""
    wbase, inc_low, inc_high = fc.arrow_cat_base(m.carrier)
    lower, upper = m.right, m.left
    fiber = {}
    for v in lower.base.objects:
        fiber[fc.LOW + v] = tuple(fc.LOW + x for x in lower.fiber[v])
    for u in upper.base.objects:
        fiber[fc.HIGH + u] = tuple(fc.HIGH + x for x in upper.fiber[u])
    hom = {}
    comp = {}
    id_elt = {}

    def lo_key(k):
        return (fc.LOW + k[0], fc.LOW + k[1], fc.LOW + k[2])

    def up_key(k):
        return (fc.HIGH + k[0], fc.HIGH + k[1], fc.HIGH + k[2])

    def x_key(k):
        return (fc.CROSS + k[0], fc.LOW + k[1], fc.HIGH + k[2])

    for k, labels in lower.hom.items():
        hom[lo_key(k)] = labels
    for k, labels in upper.hom.items():
        hom[up_key(k)] = labels
    for k, labels in m.basis.items():
        hom[x_key(k)] = labels
    for (gk, i, fk, j), vec in lower.comp.items():
        comp[(lo_key(gk), i, lo_key(fk), j)] = vec
    for (gk, i, fk, j), vec in upper.comp.items():
        comp[(up_key(gk), i, up_key(fk), j)] = vec
    for (lk, i, sk, j), vec in m.left_act.items():
        comp[(up_key(lk), i, x_key(sk), j)] = vec
    for (sk, j, rk, k), vec in m.right_act.items():
        comp[(x_key(sk), j, lo_key(rk), k)] = vec
    for x, vec in lower.id_elt.items():
        id_elt[fc.LOW + x] = dict(vec)
    for x, vec in upper.id_elt.items():
        id_elt[fc.HIGH + x] = dict(vec)
    cat = gr.validate_graded_cat(wbase, fiber, hom, comp, id_elt,
                                 name=name or f"arrow({m.name})")
    low_f = gr.GradedFunctor(
        lower, cat, inc_low, {x: fc.LOW + x for x in lower.fiber_of},
        {k: QMatrix.identity(lower.dim(k)) for k in lower.hom},
    )
    up_f = gr.GradedFunctor(
        upper, cat, inc_high, {x: fc.HIGH + x for x in upper.fiber_of},
        {k: QMatrix.identity(upper.dim(k)) for k in upper.hom},
    )
    cross = fc.Ideal(wbase, frozenset(x for x in wbase.src if x.startswith(fc.CROSS)))
    return ArrowCategory(cat, low_f, up_f, wbase, cross)
