"""Finite categories given by explicit tables, and their constructions.

A FinCat stores a total composition table, so every categorical axiom can
be (and is) checked exhaustively.  All constructions sort their raw
object/morphism labels before interning ids, which makes every output
deterministic and comparable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class FinCat:
    """A finite category: dense object/morphism ids plus a composition table.

    compose[(g, f)] = g o f is defined exactly when dst(f) = src(g).
    Labels, when present, record the construction data each id came from.
    """

    def __init__(self, n_objects, mor_src, mor_dst, identity, compose,
                 obj_labels=None, mor_labels=None):
        self.n_objects = n_objects
        self.mor_src = list(mor_src)
        self.mor_dst = list(mor_dst)
        self.identity = list(identity)
        self.compose_table = dict(compose)
        self.obj_labels = list(obj_labels) if obj_labels is not None else None
        self.mor_labels = list(mor_labels) if mor_labels is not None else None
        self._hom = None

    # -- basic access -------------------------------------------------------

    @property
    def objects(self):
        return range(self.n_objects)

    @property
    def n_morphisms(self):
        return len(self.mor_src)

    @property
    def morphisms(self):
        return range(self.n_morphisms)

    def src(self, m):
        return self.mor_src[m]

    def dst(self, m):
        return self.mor_dst[m]

    def is_identity(self, m):
        return self.identity[self.mor_src[m]] == m and self.mor_src[m] == self.mor_dst[m]

    def compose(self, g, f):
        """g o f (f first); raises KeyError if not composable."""
        return self.compose_table[(g, f)]

    def hom(self, a, b):
        if self._hom is None:
            table = {}
            for m in self.morphisms:
                table.setdefault((self.mor_src[m], self.mor_dst[m]), []).append(m)
            self._hom = {k: tuple(v) for k, v in table.items()}
        return self._hom.get((a, b), ())

    def obj_label(self, o):
        return self.obj_labels[o] if self.obj_labels is not None else o

    def mor_label(self, m):
        return self.mor_labels[m] if self.mor_labels is not None else m

    def __repr__(self):
        return f"FinCat({self.n_objects} objects, {self.n_morphisms} morphisms)"

    def __eq__(self, other):
        """Structural equality of the tables (labels are ignored)."""
        if self is other:
            return True
        return (
            isinstance(other, FinCat)
            and self.n_objects == other.n_objects
            and self.mor_src == other.mor_src
            and self.mor_dst == other.mor_dst
            and self.identity == other.identity
            and self.compose_table == other.compose_table
        )

    __hash__ = None

    # -- construction helpers -----------------------------------------------

    @classmethod
    def from_labeled(cls, obj_labels, mor_entries, identity_of, compose_of):
        """Intern a category given by labels.

        mor_entries: iterable of (mor_label, src_label, dst_label).
        identity_of: obj_label -> mor_label.
        compose_of: (g_label, f_label) -> gf_label for composable pairs, or a
        dict of the same shape.  Labels are sorted, so ids are canonical.
        """
        objs = sorted(obj_labels)
        oidx = {lab: i for i, lab in enumerate(objs)}
        mors = sorted(mor_entries)
        midx = {lab: i for i, (lab, _, _) in enumerate(mors)}
        src = [oidx[s] for (_, s, _) in mors]
        dst = [oidx[d] for (_, _, d) in mors]
        ident = [midx[identity_of(lab) if callable(identity_of) else identity_of[lab]]
                 for lab in objs]
        table = {}
        for gi, (glab, gs, gd) in enumerate(mors):
            for fi, (flab, fs, fd) in enumerate(mors):
                if fd == gs:
                    gf = compose_of(glab, flab) if callable(compose_of) \
                        else compose_of[(glab, flab)]
                    table[(gi, fi)] = midx[gf]
        return cls(len(objs), src, dst, ident, table,
                   obj_labels=objs, mor_labels=[lab for (lab, _, _) in mors])

    @classmethod
    def point(cls):
        """The category * with one object and one morphism."""
        return cls(1, [0], [0], [0], {(0, 0): 0}, obj_labels=[0], mor_labels=[(0, 0)])

    @classmethod
    def discrete(cls, k):
        return cls(k, list(range(k)), list(range(k)), list(range(k)),
                   {(m, m): m for m in range(k)},
                   obj_labels=list(range(k)), mor_labels=[(o, o) for o in range(k)])

    @classmethod
    def from_poset(cls, elements, leq):
        """Poset as a category: at most one morphism a -> b, present iff a <= b."""
        elements = sorted(elements)
        mors = []
        for a in elements:
            for b in elements:
                if leq(a, b):
                    mors.append(((a, b), a, b))
        return cls.from_labeled(
            elements, mors,
            identity_of=lambda o: (o, o),
            compose_of=lambda g, f: (f[0], g[1]),
        )

    @classmethod
    def ordinal(cls, n):
        """The totally ordered set {0, ..., n} as a category."""
        return cls.from_poset(range(n + 1), lambda a, b: a <= b)

    @classmethod
    def free_on_dag(cls, n_vertices, edges):
        """Free category on an acyclic multigraph.

        edges: list of (a, b) with a != b; parallel edges allowed.  Morphisms
        are paths (tuples of edge indices); raises if the graph has a cycle.
        """
        adj = {}
        for e, (a, b) in enumerate(edges):
            if a == b:
                raise ValueError("free category needs an acyclic graph")
            adj.setdefault(a, []).append((e, b))
        # paths by DFS; a cycle would blow through the cap below
        all_paths = []
        for v in range(n_vertices):
            stack = [((), v)]
            while stack:
                word, at = stack.pop()
                all_paths.append((word, v, at))
                if len(all_paths) > 4096 * max(1, n_vertices):
                    raise ValueError("graph is not acyclic or far too large")
                for e, b in adj.get(at, ()):
                    stack.append((word + (e,), b))
        mors = [((a, word, b), a, b) for (word, a, b) in all_paths]
        return cls.from_labeled(
            range(n_vertices), mors,
            identity_of=lambda o: (o, (), o),
            compose_of=lambda g, f: (f[0], f[1] + g[1], g[2]),
        )

    def full_subcategory(self, objs):
        """Full subcategory on the given object ids, with its inclusion."""
        objs = sorted(objs)
        keep = set(objs)
        oidx = {o: i for i, o in enumerate(objs)}
        mors = [m for m in self.morphisms
                if self.mor_src[m] in keep and self.mor_dst[m] in keep]
        midx = {m: i for i, m in enumerate(mors)}
        table = {}
        for g in mors:
            for f in mors:
                if self.mor_dst[f] == self.mor_src[g]:
                    table[(midx[g], midx[f])] = midx[self.compose(g, f)]
        sub = FinCat(
            len(objs),
            [oidx[self.mor_src[m]] for m in mors],
            [oidx[self.mor_dst[m]] for m in mors],
            [midx[self.identity[o]] for o in objs],
            table,
            obj_labels=[self.obj_label(o) for o in objs],
            mor_labels=[self.mor_label(m) for m in mors],
        )
        incl = CatFunctor(sub, self, objs, mors)
        return sub, incl

    # -- serialization --------------------------------------------------------

    def to_json(self):
        return {
            "objects": list(self.objects),
            "morphisms": [
                {"id": m, "src": self.mor_src[m], "dst": self.mor_dst[m]}
                for m in self.morphisms
            ],
            "identities": {str(o): self.identity[o] for o in self.objects},
            "compose": [[g, f, gf] for (g, f), gf in sorted(self.compose_table.items())],
        }

    @classmethod
    def from_json(cls, data):
        objs = data["objects"]
        if sorted(objs) != list(range(len(objs))):
            raise ValueError("objects: expected dense ids 0..n-1")
        n = len(objs)
        mors = sorted(data["morphisms"], key=lambda m: m["id"])
        if [m["id"] for m in mors] != list(range(len(mors))):
            raise ValueError("morphisms: expected dense ids 0..m-1")
        src = [m["src"] for m in mors]
        dst = [m["dst"] for m in mors]
        ident = [None] * n
        for o, m in data["identities"].items():
            ident[int(o)] = m
        if any(i is None for i in ident):
            raise ValueError("identities: missing an object")
        table = {(g, f): gf for g, f, gf in data["compose"]}
        return cls(n, src, dst, ident, table)


def validate(C, max_triples=None):
    """Exhaustive category-axiom check; returns a list of violations.

    Empty list iff C is a category.  max_triples caps the associativity
    sweep (None checks every composable triple).
    """
    errors = []
    n, m = C.n_objects, C.n_morphisms
    for f in range(m):
        if not (0 <= C.mor_src[f] < n) or not (0 <= C.mor_dst[f] < n):
            errors.append(f"morphism {f} has an invalid endpoint")
            return errors
    for o in range(n):
        e = C.identity[o]
        if not (0 <= e < m) or C.mor_src[e] != o or C.mor_dst[e] != o:
            errors.append(f"identity of object {o} is not an endomorphism of it")
    # composition table totality and endpoint sanity
    for g in range(m):
        for f in range(m):
            if C.mor_dst[f] == C.mor_src[g]:
                gf = C.compose_table.get((g, f))
                if gf is None:
                    errors.append(f"missing composite for ({g}, {f})")
                elif C.mor_src[gf] != C.mor_src[f] or C.mor_dst[gf] != C.mor_dst[g]:
                    errors.append(f"composite of ({g}, {f}) has wrong endpoints")
            elif (g, f) in C.compose_table:
                errors.append(f"spurious composite for non-composable ({g}, {f})")
    if errors:
        return errors
    for f in range(m):
        e_dst = C.identity[C.mor_dst[f]]
        e_src = C.identity[C.mor_src[f]]
        if C.compose(e_dst, f) != f:
            errors.append(f"identity axiom fails: id o {f} != {f}")
        if C.compose(f, e_src) != f:
            errors.append(f"identity axiom fails: {f} o id != {f}")
    checked = 0
    for g in range(m):
        for f in range(m):
            if C.mor_dst[f] != C.mor_src[g]:
                continue
            gf = C.compose(g, f)
            for h in range(m):
                if C.mor_dst[g] != C.mor_src[h]:
                    continue
                if max_triples is not None and checked >= max_triples:
                    return errors
                checked += 1
                if C.compose(h, gf) != C.compose(C.compose(h, g), f):
                    errors.append(
                        f"associativity fails on ({h}, {g}, {f})"
                    )
                    if len(errors) > 20:
                        return errors
    return errors


def final_objects(C):
    """Objects receiving exactly one morphism from every object."""
    out = []
    for z in C.objects:
        if all(len(C.hom(a, z)) == 1 for a in C.objects):
            out.append(z)
    return out


class CatFunctor:
    """Functor between FinCats, as object and morphism tables."""

    def __init__(self, src, dst, obj_map, mor_map):
        self.src = src
        self.dst = dst
        self.obj_map = list(obj_map)
        self.mor_map = list(mor_map)

    @classmethod
    def identity_of(cls, C):
        return cls(C, C, list(C.objects), list(C.morphisms))

    def on_obj(self, o):
        return self.obj_map[o]

    def on_mor(self, m):
        return self.mor_map[m]

    def validate(self):
        errors = []
        C, D = self.src, self.dst
        if len(self.obj_map) != C.n_objects or len(self.mor_map) != C.n_morphisms:
            return ["functor tables have the wrong length"]
        for m in C.morphisms:
            fm = self.mor_map[m]
            if D.mor_src[fm] != self.obj_map[C.mor_src[m]] or \
               D.mor_dst[fm] != self.obj_map[C.mor_dst[m]]:
                errors.append(f"morphism {m}: image endpoints disagree")
        for o in C.objects:
            if self.mor_map[C.identity[o]] != D.identity[self.obj_map[o]]:
                errors.append(f"identity of {o} not preserved")
        for g in C.morphisms:
            for f in C.morphisms:
                if C.mor_dst[f] == C.mor_src[g]:
                    if self.mor_map[C.compose(g, f)] != \
                       D.compose(self.mor_map[g], self.mor_map[f]):
                        errors.append(f"composition not preserved on ({g}, {f})")
                        if len(errors) > 20:
                            return errors
        return errors

    def then(self, other):
        """other o self."""
        if other.src != self.dst:
            raise ValueError("functors not composable")
        return CatFunctor(
            self.src, other.dst,
            [other.obj_map[o] for o in self.obj_map],
            [other.mor_map[m] for m in self.mor_map],
        )

    def is_injective_on_objects(self):
        return len(set(self.obj_map)) == len(self.obj_map)

    def is_faithful(self):
        for a in self.src.objects:
            for b in self.src.objects:
                seen = {}
                for m in self.src.hom(a, b):
                    fm = self.mor_map[m]
                    if fm in seen:
                        return False
                    seen[fm] = m
        return True

    def __eq__(self, other):
        return (
            isinstance(other, CatFunctor)
            and self.src == other.src
            and self.dst == other.dst
            and self.obj_map == other.obj_map
            and self.mor_map == other.mor_map
        )

    def to_json(self):
        return {"obj_map": self.obj_map, "mor_map": self.mor_map}


class NatTransformation:
    """Natural transformation between parallel functors.

    components[c] is a morphism source(c) -> target(c) in the codomain.
    """

    def __init__(self, source, target, components):
        self.source = source
        self.target = target
        self.components = list(components)

    def validate(self):
        F, G = self.source, self.target
        if F.src != G.src or F.dst != G.dst:
            return ["functors are not parallel"]
        C, D = F.src, F.dst
        errors = []
        for c in C.objects:
            comp = self.components[c]
            if D.mor_src[comp] != F.obj_map[c] or D.mor_dst[comp] != G.obj_map[c]:
                errors.append(f"component at {c} has wrong endpoints")
        if errors:
            return errors
        for m in C.morphisms:
            a, b = C.mor_src[m], C.mor_dst[m]
            left = D.compose(self.components[b], F.mor_map[m])
            right = D.compose(G.mor_map[m], self.components[a])
            if left != right:
                errors.append(f"naturality square fails at morphism {m}")
        return errors

    def compose_vertical(self, other):
        """self after other (other: F => G, self: G => H)."""
        D = self.source.dst
        comps = [
            D.compose(self.components[c], other.components[c])
            for c in self.source.src.objects
        ]
        return NatTransformation(other.source, self.target, comps)


class SetValuedDiagram:
    """Covariant functor base -> Set with finite fibers.

    fibers[d] is a sorted list of elements; transports[m] maps elements of
    the fiber at src(m) to elements of the fiber at dst(m).
    """

    def __init__(self, base, fibers, transports):
        self.base = base
        self.fibers = [list(f) for f in fibers]
        self.transports = [dict(t) for t in transports]

    def fiber(self, d):
        return self.fibers[d]

    def transport(self, m):
        return self.transports[m]

    def validate(self):
        errors = []
        C = self.base
        for m in C.morphisms:
            t = self.transports[m]
            dom = set(self.fibers[C.mor_src[m]])
            cod = set(self.fibers[C.mor_dst[m]])
            if set(t) != dom or not set(t.values()) <= cod:
                errors.append(f"transport of morphism {m} is not a map of fibers")
        if errors:
            return errors
        for o in C.objects:
            t = self.transports[C.identity[o]]
            if any(t[x] != x for x in self.fibers[o]):
                errors.append(f"transport of identity at {o} is not the identity")
        for g in C.morphisms:
            for f in C.morphisms:
                if C.mor_dst[f] == C.mor_src[g]:
                    gf = C.compose(g, f)
                    tf, tg, tgf = self.transports[f], self.transports[g], self.transports[gf]
                    if any(tg[tf[x]] != tgf[x] for x in self.fibers[C.mor_src[f]]):
                        errors.append(f"functoriality fails on ({g}, {f})")
        return errors


class CatValuedDiagram:
    """Strict covariant functor base -> Cat with finite fibers."""

    def __init__(self, base, fibers, transports):
        self.base = base
        self.fibers = list(fibers)
        self.transports = list(transports)

    def fiber(self, d):
        return self.fibers[d]

    def transport(self, m):
        return self.transports[m]

    def validate(self):
        errors = []
        C = self.base
        for m in C.morphisms:
            t = self.transports[m]
            if t.src != self.fibers[C.mor_src[m]] or \
               t.dst != self.fibers[C.mor_dst[m]]:
                errors.append(f"transport of {m} connects the wrong fibers")
            else:
                errors.extend(f"transport of {m}: {e}" for e in t.validate())
        if errors:
            return errors
        for o in C.objects:
            t = self.transports[C.identity[o]]
            if t.obj_map != list(self.fibers[o].objects) or \
               t.mor_map != list(self.fibers[o].morphisms):
                errors.append(f"transport of identity at {o} is not the identity")
        for g in C.morphisms:
            for f in C.morphisms:
                if C.mor_dst[f] == C.mor_src[g]:
                    gf = C.compose(g, f)
                    comp = self.transports[f].then(self.transports[g])
                    if comp != self.transports[gf]:
                        errors.append(f"strict functoriality fails on ({g}, {f})")
        return errors

    @classmethod
    def constant(cls, base, fiber):
        ident = CatFunctor.identity_of(fiber)
        return cls(base, [fiber] * base.n_objects,
                   [CatFunctor(fiber, fiber, ident.obj_map, ident.mor_map)
                    for _ in base.morphisms])


class DiagramMorphism:
    """Morphism of Cat-valued diagrams over the same base.

    components[d] : F(d) -> G(d) must commute strictly with transports.
    """

    def __init__(self, source, target, components):
        self.source = source
        self.target = target
        self.components = list(components)

    @classmethod
    def to_point(cls, diagram):
        pt = FinCat.point()
        target = CatValuedDiagram.constant(diagram.base, pt)
        comps = [
            CatFunctor(diagram.fibers[d], pt,
                       [0] * diagram.fibers[d].n_objects,
                       [0] * diagram.fibers[d].n_morphisms)
            for d in diagram.base.objects
        ]
        return cls(diagram, target, comps)

    def validate(self):
        errors = []
        base = self.source.base
        if self.target.base != base:
            return ["diagrams live over different bases"]
        for d in base.objects:
            comp = self.components[d]
            if comp.src != self.source.fibers[d] or \
               comp.dst != self.target.fibers[d]:
                errors.append(f"component at {d} connects the wrong fibers")
            else:
                errors.extend(f"component at {d}: {e}" for e in comp.validate())
        if errors:
            return errors
        for m in base.morphisms:
            a, b = base.mor_src[m], base.mor_dst[m]
            left = self.source.transports[m].then(self.components[b])
            right = self.components[a].then(self.target.transports[m])
            if left != right:
                errors.append(f"square at morphism {m} does not commute")
        return errors


# ---------------------------------------------------------------------------
# comma categories


@dataclass
class CommaResult:
    category: FinCat
    proj_left: CatFunctor
    proj_right: CatFunctor


def comma(F, G):
    """Comma category F|G for F : C -> E and G : C' -> E.

    Objects are triples (c, c', f : F(c) -> G(c')); morphisms are pairs
    (u, v) making the evident square commute.  Returns the category with
    its two projections.
    """
    if F.dst != G.dst:
        raise ValueError("comma requires functors with the same target")
    C, Cp, E = F.src, G.src, F.dst
    objs = []
    for c in C.objects:
        for cp in Cp.objects:
            for f in E.hom(F.obj_map[c], G.obj_map[cp]):
                objs.append((c, cp, f))
    obj_set = set(objs)
    mors = []
    for (c, cp, f) in objs:
        for u in C.morphisms:
            if C.mor_src[u] != c:
                continue
            for v in Cp.morphisms:
                if Cp.mor_src[v] != cp:
                    continue
                c2, cp2 = C.mor_dst[u], Cp.mor_dst[v]
                f2 = E.compose(G.mor_map[v], f)
                # square condition: G(v) o f == f' o F(u)
                for fp in E.hom(F.obj_map[c2], G.obj_map[cp2]):
                    if E.compose(fp, F.mor_map[u]) == f2:
                        mors.append((((c, cp, f), (c2, cp2, fp), u, v),
                                     (c, cp, f), (c2, cp2, fp)))
    def ident(o):
        c, cp, f = o
        return (o, o, C.identity[c], Cp.identity[cp])

    def comp(g, f):
        (_, tgt, u2, v2) = g
        (src, _, u1, v1) = f
        return (src, tgt, C.compose(u2, u1), Cp.compose(v2, v1))

    cat = FinCat.from_labeled(objs, mors, ident, comp)
    proj_l = CatFunctor(
        cat, C,
        [lab[0] for lab in cat.obj_labels],
        [lab[2] for lab in cat.mor_labels],
    )
    proj_r = CatFunctor(
        cat, Cp,
        [lab[1] for lab in cat.obj_labels],
        [lab[3] for lab in cat.mor_labels],
    )
    return CommaResult(cat, proj_l, proj_r)


def functor_from_object(C, d):
    """The functor * -> C picking out the object d."""
    pt = FinCat.point()
    return CatFunctor(pt, C, [d], [C.identity[d]])


def comma_to_object(F, d):
    """F | d, the comma of F with the constant functor at d."""
    return comma(F, functor_from_object(F.dst, d))


# ---------------------------------------------------------------------------
# categories of elements and the Grothendieck construction


def elements(D):
    """Category of elements of a Set-valued diagram.

    Objects (d, x) with x in the fiber at d; a morphism (d, x) -> (d', x')
    is a base morphism f with transport(f)(x) = x'.
    """
    C = D.base
    objs = [(d, x) for d in C.objects for x in D.fibers[d]]
    mors = []
    for f in C.morphisms:
        a, b = C.mor_src[f], C.mor_dst[f]
        t = D.transports[f]
        for x in D.fibers[a]:
            mors.append(((f, x), (a, x), (b, t[x])))

    def ident(o):
        d, x = o
        return (C.identity[d], x)

    def comp(g, f):
        gf = C.compose(g[0], f[0])
        return (gf, f[1])

    return FinCat.from_labeled(objs, mors, ident, comp)


@dataclass
class GrothendieckResult:
    category: FinCat
    augmentation: CatFunctor


def grothendieck(D):
    """Grothendieck construction of a Cat-valued diagram.

    Objects (d, x); a morphism (d, x) -> (d', x') is (f : d -> d',
    g : F(f)(x) -> x'); composition twists by the transport.  The
    augmentation projects to the base.
    """
    C = D.base
    objs = [(d, x) for d in C.objects for x in D.fibers[d].objects]
    mors = []
    for f in C.morphisms:
        a, b = C.mor_src[f], C.mor_dst[f]
        t = D.transports[f]
        fiber_b = D.fibers[b]
        for x in D.fibers[a].objects:
            tx = t.obj_map[x]
            for g in fiber_b.morphisms:
                if fiber_b.mor_src[g] == tx:
                    mors.append(((f, x, g), (a, x), (b, fiber_b.mor_dst[g])))

    def ident(o):
        d, x = o
        return (C.identity[d], x, D.fibers[d].identity[x])

    def comp(gm, fm):
        f, x, g = fm
        f2, x2, g2 = gm
        ff = C.compose(f2, f)
        fiber = D.fibers[C.mor_dst[f2]]
        moved = D.transports[f2].mor_map[g]
        return (ff, x, fiber.compose(g2, moved))

    cat = FinCat.from_labeled(objs, mors, ident, comp)
    aug = CatFunctor(
        cat, C,
        [lab[0] for lab in cat.obj_labels],
        [lab[0] for lab in cat.mor_labels],
    )
    return GrothendieckResult(cat, aug)


# ---------------------------------------------------------------------------
# slice diagrams d |-> T|d and the section/projection adjunction


@dataclass
class SliceDiagram:
    diagram: CatValuedDiagram
    total: FinCat                # Grothendieck construction of the diagram
    augmentation: CatFunctor     # total -> base (p_2)
    projection: CatFunctor       # total -> source of T (p_1)
    section: CatFunctor          # source of T -> total (s)
    unit: NatTransformation      # Id => p_1 o s  (identity on the nose)
    counit: NatTransformation    # s o p_1 => Id


def slice_fiber(T, d):
    """The comma category T | d: objects (c, f : T(c) -> d)."""
    C, D = T.src, T.dst
    objs = []
    for c in C.objects:
        for f in D.hom(T.obj_map[c], d):
            objs.append((c, f))
    mors = []
    for (c, f) in objs:
        for u in C.morphisms:
            if C.mor_src[u] != c:
                continue
            c2 = C.mor_dst[u]
            # f factors as f' o T(u)
            for f2 in D.hom(T.obj_map[c2], d):
                if D.compose(f2, T.mor_map[u]) == f:
                    mors.append((((c, f), (c2, f2), u), (c, f), (c2, f2)))

    def ident(o):
        return (o, o, C.identity[o[0]])

    def comp(g, f):
        return (f[0], g[1], C.compose(g[2], f[2]))

    return FinCat.from_labeled(objs, mors, ident, comp)


def slice_diagram(T):
    """The diagram d |-> T|d over dst(T), with section and projection.

    Also returns the Grothendieck construction of the diagram (which is the
    comma category T | Id), the functors s and p_1 with s left adjoint to
    p_1, and explicit unit/counit transformations.
    """
    C, D = T.src, T.dst
    fibers = [slice_fiber(T, d) for d in D.objects]
    transports = []
    for g in D.morphisms:
        a, b = D.mor_src[g], D.mor_dst[g]
        fa, fb = fibers[a], fibers[b]
        omap = []
        for lab in fa.obj_labels:
            c, f = lab
            omap.append(fb.obj_labels.index((c, D.compose(g, f))))
        mmap = []
        for lab in fa.mor_labels:
            (c, f), (c2, f2), u = lab
            new = ((c, D.compose(g, f)), (c2, D.compose(g, f2)), u)
            mmap.append(fb.mor_labels.index(new))
        transports.append(CatFunctor(fa, fb, omap, mmap))
    diagram = CatValuedDiagram(D, fibers, transports)
    groth = grothendieck(diagram)
    total = groth.category
    obj_idx = {lab: i for i, lab in enumerate(total.obj_labels)}
    mor_idx = {lab: i for i, lab in enumerate(total.mor_labels)}

    # p_1 : (d, (c, f)) |-> c
    p1_obj = [fibers[d].obj_labels[x][0] for (d, x) in total.obj_labels]
    p1_mor = []
    for (f, x, g) in total.mor_labels:
        b = D.mor_dst[f]
        _, _, u = fibers[b].mor_labels[g]
        p1_mor.append(u)
    p1 = CatFunctor(total, C, p1_obj, p1_mor)

    # s : c |-> (T(c), (c, id))
    s_obj = []
    for c in C.objects:
        d = T.obj_map[c]
        x = fibers[d].obj_labels.index((c, D.identity[d]))
        s_obj.append(obj_idx[(d, x)])
    s_mor = []
    for u in C.morphisms:
        c, c2 = C.mor_src[u], C.mor_dst[u]
        d, d2 = T.obj_map[c], T.obj_map[c2]
        f = T.mor_map[u]
        x = fibers[d].obj_labels.index((c, D.identity[d]))
        g_lab = ((c, f), (c2, D.identity[d2]), u)
        g = fibers[d2].mor_labels.index(g_lab)
        s_mor.append(mor_idx[(f, x, g)])
    s = CatFunctor(C, total, s_obj, s_mor)

    unit = NatTransformation(
        CatFunctor.identity_of(C), s.then(p1),
        [C.identity[c] for c in C.objects],
    )
    counit_comps = []
    for (d, x) in total.obj_labels:
        c, phi = fibers[d].obj_labels[x]
        x0 = fibers[T.obj_map[c]].obj_labels.index((c, D.identity[T.obj_map[c]]))
        g_lab = ((c, phi), (c, phi), C.identity[c])
        g = fibers[d].mor_labels.index(g_lab)
        counit_comps.append(mor_idx[(phi, x0, g)])
    counit = NatTransformation(
        p1.then(s), CatFunctor.identity_of(total), counit_comps
    )
    return SliceDiagram(diagram, total, groth.augmentation, p1, s, unit, counit)


def verify_adjunction(sd):
    """Check naturality of unit/counit and both triangle identities."""
    errors = []
    errors.extend(f"unit: {e}" for e in sd.unit.validate())
    errors.extend(f"counit: {e}" for e in sd.counit.validate())
    C = sd.section.src
    total = sd.total
    # triangle: counit(s c) o s(unit_c) = id_{s c}
    for c in C.objects:
        sc = sd.section.obj_map[c]
        lhs = total.compose(sd.counit.components[sc],
                            sd.section.mor_map[sd.unit.components[c]])
        if lhs != total.identity[sc]:
            errors.append(f"triangle (s) fails at object {c}")
    # triangle: p1(counit_x) o unit(p1 x) = id_{p1 x}
    for x in total.objects:
        px = sd.projection.obj_map[x]
        lhs = C.compose(sd.projection.mor_map[sd.counit.components[x]],
                        sd.unit.components[px])
        if lhs != C.identity[px]:
            errors.append(f"triangle (p1) fails at object {x}")
    return errors


# ---------------------------------------------------------------------------
# cellular functors


@dataclass
class CellularityResult:
    ok: bool
    witness: object = None

    def __bool__(self):
        return self.ok


def is_cellular(T):
    """Is T fully faithful with no morphisms from outside its image into it?

    On failure the witness names the offending pair of objects or morphism.
    """
    C, D = T.src, T.dst
    for c in C.objects:
        for c2 in C.objects:
            images = {}
            for m in C.hom(c, c2):
                fm = T.mor_map[m]
                if fm in images:
                    return CellularityResult(
                        False, ("not faithful", c, c2, images[fm], m))
                images[fm] = m
            for w in D.hom(T.obj_map[c], T.obj_map[c2]):
                if w not in images:
                    return CellularityResult(False, ("not full", c, c2, w))
    image = set(T.obj_map)
    for m in D.morphisms:
        if D.mor_src[m] not in image and D.mor_dst[m] in image:
            return CellularityResult(False, ("incoming morphism", m))
    return CellularityResult(True)


def complement_subcategory(T):
    """Full subcategory of dst(T) on the objects outside the image of T."""
    image = set(T.obj_map)
    objs = [d for d in T.dst.objects if d not in image]
    return T.dst.full_subcategory(objs)


def cellular_factorization(T, phi):
    """Factor phi : F1 => F2 through the functor that switches along T.

    Requires T cellular.  Returns (F_phi, phi1, phi2) with F_phi equal to
    F1 on the image of T and to F2 outside it, phi1 the identity on the
    image, phi2 the identity outside, and phi2 o phi1 = phi.
    """
    cell = is_cellular(T)
    if not cell:
        raise ValueError(f"functor is not cellular: {cell.witness}")
    F1, F2 = phi.source, phi.target
    Dcat, E = F1.src, F1.dst
    image = set(T.obj_map)
    obj_map = [F1.obj_map[d] if d in image else F2.obj_map[d] for d in Dcat.objects]
    mor_map = []
    for m in Dcat.morphisms:
        a, b = Dcat.mor_src[m], Dcat.mor_dst[m]
        if a in image and b in image:
            mor_map.append(F1.mor_map[m])
        elif a not in image and b not in image:
            mor_map.append(F2.mor_map[m])
        elif a in image and b not in image:
            mor_map.append(E.compose(phi.components[b], F1.mor_map[m]))
        else:
            raise ValueError("cellularity violated: morphism into the image")
    F_phi = CatFunctor(Dcat, E, obj_map, mor_map)
    phi1 = NatTransformation(
        F1, F_phi,
        [E.identity[F1.obj_map[d]] if d in image else phi.components[d]
         for d in Dcat.objects],
    )
    phi2 = NatTransformation(
        F_phi, F2,
        [phi.components[d] if d in image else E.identity[F2.obj_map[d]]
         for d in Dcat.objects],
    )
    return F_phi, phi1, phi2


def chain_colimit(functors):
    """Colimit of a finite chain C_0 -> C_1 -> ... -> C_n of embeddings.

    Each stage must be injective on objects and morphisms; the colimit is
    then the last category, and the insertions are the composites into it.
    """
    if not functors:
        raise ValueError("empty chain")
    for k, T in enumerate(functors):
        if k + 1 < len(functors) and functors[k + 1].src != T.dst:
            raise ValueError("chain is not composable")
        if not T.is_injective_on_objects():
            raise ValueError(f"stage {k} is not injective on objects")
        if len(set(T.mor_map)) != len(T.mor_map):
            raise ValueError(f"stage {k} is not injective on morphisms")
    last = functors[-1].dst
    insertions = []
    for k in range(len(functors) + 1):
        if k == len(functors):
            insertions.append(CatFunctor.identity_of(last))
            continue
        ins = functors[k]
        for T in functors[k + 1:]:
            ins = ins.then(T)
        insertions.append(ins)
    return last, insertions
