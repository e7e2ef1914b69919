"""Truncated simplicial and bisimplicial sets, nerves, and chains.

Cells are stored nondegenerately: an arbitrary simplex is a pair
(sigma, cell) with sigma a monotone surjection recorded as the tuple of
its values, so face/degeneracy operators act by composing monotone maps
and consulting the face tables of nondegenerate cells.  This keeps nerve
growth manageable and makes the normalized chain complex immediate;
unnormalized chains can still be materialized on demand.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from . import zalg
from .fincat import CatFunctor, FinCat, grothendieck


# ---------------------------------------------------------------------------
# monotone surjections as value tuples


def identity_surj(n):
    return tuple(range(n + 1))


def is_identity_surj(sig):
    return all(v == t for t, v in enumerate(sig))


def compose_surj(outer, inner):
    """(outer o inner) as value tuples."""
    return tuple(outer[v] for v in inner)


def surjections(n, m):
    """All monotone surjections [n] ->> [m], as value tuples."""
    if m > n or m < 0:
        return
    # choose which of the n steps are collapses
    for collapse in combinations(range(1, n + 1), n - m):
        cset = set(collapse)
        sig = [0]
        for t in range(1, n + 1):
            sig.append(sig[-1] if t in cset else sig[-1] + 1)
        yield tuple(sig)


def drop_position(sig, i):
    return sig[:i] + sig[i + 1:]


def duplicate_position(sig, i):
    return sig[: i + 1] + (sig[i],) + sig[i + 1:]


def missing_value(sig, m):
    """The single value of [m] missed by a near-surjection, or None."""
    seen = set(sig)
    for v in range(m + 1):
        if v not in seen:
            return v
    return None


# ---------------------------------------------------------------------------
# simplicial sets


class SimplicialSet:
    """Truncated simplicial set in normalized form.

    cells[n] lists the nondegenerate n-cells (canonically sorted labels);
    faces[n][idx][i] is the i-th face as a pair (sigma, m, idx2) meaning
    "the degeneracy sigma applied to nondegenerate cell idx2 of degree m".
    exact_top certifies that no nondegenerate cells exist above the
    truncation degree.
    """

    def __init__(self, trunc, cells, faces, exact_top=False):
        self.trunc = trunc
        self.cells = {n: list(cs) for n, cs in cells.items()}
        for n in range(trunc + 1):
            self.cells.setdefault(n, [])
        self.faces = faces
        self.exact_top = exact_top
        self.index = {
            n: {lab: i for i, lab in enumerate(cs)} for n, cs in self.cells.items()
        }

    def n_cells(self, n):
        return len(self.cells.get(n, ()))

    def face(self, n, idx, i):
        return self.faces[n][idx][i]

    def pair_face(self, n, pair, i):
        """d_i applied to a (possibly degenerate) simplex of degree n."""
        sig, m, idx = pair
        tau = drop_position(sig, i)
        j = missing_value(tau, m)
        if j is None:
            return (tau, m, idx)
        sig2, m2, idx2 = self.face(m, idx, j)
        phi = tuple(v if v < j else v - 1 for v in tau)
        return (compose_surj(sig2, phi), m2, idx2)

    def pair_degeneracy(self, n, pair, i):
        sig, m, idx = pair
        return (duplicate_position(sig, i), m, idx)

    def nondeg_pair(self, n, idx):
        return (identity_surj(n), n, idx)

    def all_pairs(self, n):
        """Every n-simplex, degenerate ones included."""
        out = []
        for m in range(min(n, self.trunc) + 1):
            for sig in surjections(n, m):
                for idx in range(self.n_cells(m)):
                    out.append((sig, m, idx))
        return out

    def verify_identities(self):
        """Exhaustive simplicial-identity check in the truncation window.

        Checks d_i d_j = d_{j-1} d_i (i < j) on every nondegenerate cell and
        the face/degeneracy interchange on every pair arising from one; the
        remaining identities hold by construction of the pair calculus.
        """
        errors = []
        for n in range(2, self.trunc + 1):
            for idx in range(self.n_cells(n)):
                pair = self.nondeg_pair(n, idx)
                for j in range(1, n + 1):
                    for i in range(j):
                        a = self.pair_face(n - 1, self.pair_face(n, pair, j), i)
                        b = self.pair_face(n - 1, self.pair_face(n, pair, i), j - 1)
                        if a != b:
                            errors.append(
                                f"d_{i} d_{j} != d_{j-1} d_{i} on cell {idx} of degree {n}"
                            )
        for n in range(1, self.trunc):
            for idx in range(self.n_cells(n)):
                pair = self.nondeg_pair(n, idx)
                for i in range(n + 1):
                    s = self.pair_degeneracy(n, pair, i)
                    if self.pair_face(n + 1, s, i) != pair:
                        errors.append(f"d_i s_i != id on cell {idx} of degree {n}")
                    if self.pair_face(n + 1, s, i + 1) != pair:
                        errors.append(f"d_(i+1) s_i != id on cell {idx} of degree {n}")
        return errors

    def chains(self):
        """Normalized chain complex: free on nondegenerate cells."""
        ranks = {n: self.n_cells(n) for n in range(self.trunc + 1)}
        bounds = {}
        labels = {n: list(self.cells.get(n, ())) for n in ranks}
        for n in range(1, self.trunc + 1):
            ent = {}
            for idx in range(self.n_cells(n)):
                for i in range(n + 1):
                    sig, m, idx2 = self.face(n, idx, i)
                    if m == n - 1:  # nondegenerate face
                        key = (idx2, idx)
                        ent[key] = ent.get(key, 0) + (-1) ** i
            bounds[n] = zalg.SparseIntMatrix(
                self.n_cells(n - 1), self.n_cells(n), ent
            )
        cx = zalg.ChainComplex(ranks, bounds, exact_top=self.exact_top, labels=labels)
        return cx

    def unnormalized_chains(self):
        """Chains on every simplex, degenerate ones included."""
        basis = {n: self.all_pairs(n) for n in range(self.trunc + 1)}
        index = {n: {p: i for i, p in enumerate(ps)} for n, ps in basis.items()}
        ranks = {n: len(ps) for n, ps in basis.items()}
        bounds = {}
        for n in range(1, self.trunc + 1):
            ent = {}
            for col, pair in enumerate(basis[n]):
                for i in range(n + 1):
                    f = self.pair_face(n, pair, i)
                    key = (index[n - 1][f], col)
                    ent[key] = ent.get(key, 0) + (-1) ** i
            bounds[n] = zalg.SparseIntMatrix(ranks[n - 1], ranks[n], ent)
        return zalg.ChainComplex(ranks, bounds, exact_top=False,
                                 labels={n: list(ps) for n, ps in basis.items()})


class SimplicialMap:
    """Levelwise map determined by images of nondegenerate cells.

    maps[n][idx] is the image of cell idx of degree n as a pair in the
    target; values on degenerate simplices follow by composing words, so
    commuting with degeneracies is built in and only the face condition
    needs checking.
    """

    def __init__(self, source, target, maps):
        self.source = source
        self.target = target
        self.maps = maps

    def pair_image(self, n, pair):
        sig, m, idx = pair
        tau, k, idx2 = self.maps[m][idx]
        return (compose_surj(tau, sig), k, idx2)

    def validate(self):
        errors = []
        for n in range(self.source.trunc + 1):
            if len(self.maps.get(n, [])) != self.source.n_cells(n):
                errors.append(f"missing images in degree {n}")
                return errors
        for n in range(1, self.source.trunc + 1):
            for idx in range(self.source.n_cells(n)):
                img = self.maps[n][idx]
                for i in range(n + 1):
                    a = self.pair_image(n - 1, self.source.pair_face(
                        n, self.source.nondeg_pair(n, idx), i))
                    b = self.target.pair_face(n, img, i)
                    if a != b:
                        errors.append(
                            f"face {i} of cell {idx} in degree {n} disagrees")
        return errors

    def chain_map(self):
        """Induced map on normalized chains (degenerate images die)."""
        mats = {}
        hi = min(self.source.trunc, self.target.trunc)
        for n in range(hi + 1):
            ent = {}
            for idx in range(self.source.n_cells(n)):
                sig, m, idx2 = self.maps[n][idx]
                if m == n:
                    ent[(idx2, idx)] = 1
            mats[n] = zalg.SparseIntMatrix(
                self.target.n_cells(n), self.source.n_cells(n), ent
            )
        return zalg.ChainMap(self.source.chains(), self.target.chains(), mats)


# ---------------------------------------------------------------------------
# nerves


def _normalize_string(C, arrows):
    """Split a composable string into (degeneracy word, identity-free core)."""
    core = tuple(f for f in arrows if not C.is_identity(f))
    sig = [0]
    for f in arrows:
        sig.append(sig[-1] + (0 if C.is_identity(f) else 1))
    return tuple(sig), core


def _string_vertices(C, label, n):
    """Objects visited by a nerve cell label of degree n."""
    if n == 0:
        return [label[0]]
    verts = [C.mor_src[label[0]]]
    for f in label:
        verts.append(C.mor_dst[f])
    return verts


def nerve(C, N):
    """Nerve of a category, truncated at degree N.

    Nondegenerate n-cells are the composable strings of n non-identity
    morphisms; degree-0 cells are the objects (as 1-tuples).
    """
    cells = {0: sorted((o,) for o in C.objects)}
    nonident = [m for m in C.morphisms if not C.is_identity(m)]
    by_src = {}
    for m in nonident:
        by_src.setdefault(C.mor_src[m], []).append(m)
    if N >= 1:
        cells[1] = sorted((m,) for m in nonident)
    for n in range(2, N + 1):
        cur = []
        for s in cells[n - 1]:
            for m in by_src.get(C.mor_dst[s[-1]], ()):
                cur.append(s + (m,))
        cells[n] = sorted(cur)
        if not cur:
            break
    exact_top = any(not cells.get(n) for n in range(1, N + 1))
    X = SimplicialSet(N, cells, {}, exact_top=exact_top)
    faces = {}
    for n in range(1, N + 1):
        tab = []
        for lab in X.cells[n]:
            row = []
            for i in range(n + 1):
                if n == 1:
                    f = lab[0]
                    o = C.mor_dst[f] if i == 0 else C.mor_src[f]
                    row.append(((0,), 0, X.index[0][(o,)]))
                elif i == 0:
                    row.append((identity_surj(n - 1), n - 1, X.index[n - 1][lab[1:]]))
                elif i == n:
                    row.append((identity_surj(n - 1), n - 1, X.index[n - 1][lab[:-1]]))
                else:
                    g = C.compose(lab[i], lab[i - 1])
                    s = lab[: i - 1] + (g,) + lab[i + 1:]
                    sig, core = _normalize_string(C, s)
                    if core:
                        row.append((sig, len(core), X.index[len(core)][core]))
                    else:
                        o = C.mor_src[s[0]]
                        row.append((sig, 0, X.index[0][(o,)]))
            tab.append(tuple(row))
        faces[n] = tab
    X.faces = faces
    return X


def nerve_map(F, X, Y):
    """Simplicial map of nerves induced by a functor (X = nerve of src)."""
    C, D = F.src, F.dst
    maps = {}
    maps[0] = [
        ((0,), 0, Y.index[0][(F.obj_map[lab[0]],)]) for lab in X.cells[0]
    ]
    for n in range(1, X.trunc + 1):
        row = []
        for lab in X.cells[n]:
            mapped = tuple(F.mor_map[f] for f in lab)
            sig, core = _normalize_string(D, mapped)
            if core:
                row.append((sig, len(core), Y.index[len(core)][core]))
            else:
                d0 = D.mor_src[mapped[0]]
                row.append((sig, 0, Y.index[0][(d0,)]))
        maps[n] = row
    return SimplicialMap(X, Y, maps)


def nerve_coeff_set(D, N):
    """Nerve with coefficients in a Set-valued diagram.

    n-cells are (string, x) with x in the fiber over the first vertex; the
    0-th face pushes x along the first arrow.
    """
    C = D.base
    cells = {0: sorted((d, x) for d in C.objects for x in D.fibers[d])}
    nonident = [m for m in C.morphisms if not C.is_identity(m)]
    by_src = {}
    for m in nonident:
        by_src.setdefault(C.mor_src[m], []).append(m)
    strings = {1: [(m,) for m in nonident]}
    for n in range(2, N + 1):
        strings[n] = [
            s + (m,)
            for s in strings[n - 1]
            for m in by_src.get(C.mor_dst[s[-1]], ())
        ]
    for n in range(1, N + 1):
        cells[n] = sorted(
            (s, x) for s in strings.get(n, ()) for x in D.fibers[C.mor_src[s[0]]]
        )
    exact_top = any(not cells.get(n) for n in range(1, N + 1))
    X = SimplicialSet(N, cells, {}, exact_top=exact_top)
    faces = {}
    for n in range(1, N + 1):
        tab = []
        for (s, x) in X.cells[n]:
            row = []
            for i in range(n + 1):
                if i == 0:
                    x2 = D.transports[s[0]][x]
                    if n == 1:
                        row.append(((0,), 0, X.index[0][(C.mor_dst[s[0]], x2)]))
                    else:
                        row.append((identity_surj(n - 1), n - 1,
                                    X.index[n - 1][(s[1:], x2)]))
                elif i == n:
                    if n == 1:
                        row.append(((0,), 0, X.index[0][(C.mor_src[s[0]], x)]))
                    else:
                        row.append((identity_surj(n - 1), n - 1,
                                    X.index[n - 1][(s[:-1], x)]))
                else:
                    g = C.compose(s[i], s[i - 1])
                    s2 = s[: i - 1] + (g,) + s[i + 1:]
                    sig, core = _normalize_string(C, s2)
                    if core:
                        row.append((sig, len(core), X.index[len(core)][(core, x)]))
                    else:
                        row.append((sig, 0, X.index[0][(C.mor_src[s[0]], x)]))
            tab.append(tuple(row))
        faces[n] = tab
    X.faces = faces
    return X


# ---------------------------------------------------------------------------
# bisimplicial sets


class BiSimplicialSet:
    """Truncated bisimplicial set, normalized in both directions.

    cells[(p, q)] lists bi-nondegenerate cells; faces are triples
    (sig_h, sig_v, (p2, q2, idx)) applying independent degeneracy words in
    the two directions to a bi-nondegenerate cell.
    """

    def __init__(self, trunc_p, trunc_q, cells, hfaces, vfaces,
                 exact_p=False, exact_q=False):
        self.trunc_p = trunc_p
        self.trunc_q = trunc_q
        self.cells = {pq: list(cs) for pq, cs in cells.items()}
        for p in range(trunc_p + 1):
            for q in range(trunc_q + 1):
                self.cells.setdefault((p, q), [])
        self.hfaces = hfaces
        self.vfaces = vfaces
        self.exact_p = exact_p
        self.exact_q = exact_q
        self.index = {
            pq: {lab: i for i, lab in enumerate(cs)} for pq, cs in self.cells.items()
        }

    def n_cells(self, p, q):
        return len(self.cells.get((p, q), ()))

    def nondeg_triple(self, p, q, idx):
        return (identity_surj(p), identity_surj(q), (p, q, idx))

    def triple_hface(self, triple, i):
        sig_h, sig_v, (p0, q0, idx) = triple
        tau = drop_position(sig_h, i)
        j = missing_value(tau, p0)
        if j is None:
            return (tau, sig_v, (p0, q0, idx))
        a_h, a_v, base2 = self.hfaces[(p0, q0)][idx][j]
        phi = tuple(v if v < j else v - 1 for v in tau)
        return (compose_surj(a_h, phi), compose_surj(a_v, sig_v), base2)

    def triple_vface(self, triple, i):
        sig_h, sig_v, (p0, q0, idx) = triple
        tau = drop_position(sig_v, i)
        j = missing_value(tau, q0)
        if j is None:
            return (sig_h, tau, (p0, q0, idx))
        a_h, a_v, base2 = self.vfaces[(p0, q0)][idx][j]
        phi = tuple(v if v < j else v - 1 for v in tau)
        return (compose_surj(a_h, sig_h), compose_surj(a_v, phi), base2)

    def verify_identities(self):
        """Simplicial identities in both directions plus their commutation."""
        errors = []
        for (p, q), cs in self.cells.items():
            for idx in range(len(cs)):
                t = self.nondeg_triple(p, q, idx)
                if p >= 2:
                    for j in range(1, p + 1):
                        for i in range(j):
                            a = self.triple_hface(self.triple_hface(t, j), i)
                            b = self.triple_hface(self.triple_hface(t, i), j - 1)
                            if a != b:
                                errors.append(f"horizontal identities fail at {(p, q, idx)}")
                if q >= 2:
                    for j in range(1, q + 1):
                        for i in range(j):
                            a = self.triple_vface(self.triple_vface(t, j), i)
                            b = self.triple_vface(self.triple_vface(t, i), j - 1)
                            if a != b:
                                errors.append(f"vertical identities fail at {(p, q, idx)}")
                if p >= 1 and q >= 1:
                    for i in range(p + 1):
                        for j in range(q + 1):
                            a = self.triple_vface(self.triple_hface(t, i), j)
                            b = self.triple_hface(self.triple_vface(t, j), i)
                            if a != b:
                                errors.append(f"h/v faces do not commute at {(p, q, idx)}")
        return errors

    def bichains(self):
        """Normalized double complex (commuting differentials)."""
        ranks = {}
        d_h = {}
        d_v = {}
        for (p, q), cs in self.cells.items():
            if cs:
                ranks[(p, q)] = len(cs)
        for (p, q), cs in self.cells.items():
            if not cs:
                continue
            if p >= 1:
                ent = {}
                for col in range(len(cs)):
                    for i in range(p + 1):
                        sh, sv, (p2, q2, idx2) = self.hfaces[(p, q)][col][i]
                        if p2 == p - 1 and q2 == q:
                            key = (idx2, col)
                            ent[key] = ent.get(key, 0) + (-1) ** i
                d_h[(p, q)] = zalg.SparseIntMatrix(
                    self.n_cells(p - 1, q), len(cs), ent)
            if q >= 1:
                ent = {}
                for col in range(len(cs)):
                    for j in range(q + 1):
                        sh, sv, (p2, q2, idx2) = self.vfaces[(p, q)][col][j]
                        if p2 == p and q2 == q - 1:
                            key = (idx2, col)
                            ent[key] = ent.get(key, 0) + (-1) ** j
                d_v[(p, q)] = zalg.SparseIntMatrix(
                    self.n_cells(p, q - 1), len(cs), ent)
        return zalg.DoubleComplex(ranks, d_h, d_v,
                                  exact_p=self.exact_p, exact_q=self.exact_q)

    def transpose(self):
        cells = {(q, p): list(cs) for (p, q), cs in self.cells.items()}

        def flip(table):
            return {
                (q, p): [
                    tuple((sv, sh, (b[1], b[0], b[2])) for (sh, sv, b) in row)
                    for row in rows
                ]
                for (p, q), rows in table.items()
            }

        return BiSimplicialSet(
            self.trunc_q, self.trunc_p, cells,
            flip(self.vfaces), flip(self.hfaces),
            exact_p=self.exact_q, exact_q=self.exact_p,
        )


def nerve_coeff_cat(D, trunc_p, trunc_q):
    """Bisimplicial nerve of a Cat-valued diagram.

    A bi-nondegenerate (p, q) cell is (base cell, fiber cell): an
    identity-free p-string in the base together with an identity-free
    q-string in the nerve of the fiber over its first vertex.
    """
    C = D.base
    base_nerve = nerve(C, trunc_p)
    fiber_nerves = [nerve(D.fibers[d], trunc_q) for d in C.objects]
    cells = {}
    for p in range(trunc_p + 1):
        for q in range(trunc_q + 1):
            cs = []
            for blab in base_nerve.cells[p]:
                d0 = _string_vertices(C, blab, p)[0]
                for flab in fiber_nerves[d0].cells[q]:
                    cs.append((blab, flab))
            cells[(p, q)] = sorted(cs)
    exact_p = base_nerve.exact_top
    exact_q = all(fn.exact_top for fn in fiber_nerves)
    X = BiSimplicialSet(trunc_p, trunc_q, cells, {}, {},
                        exact_p=exact_p, exact_q=exact_q)

    def transport_fiber_cell(f, d0, flab, q):
        """Push a fiber cell along the transport of a base morphism."""
        t = D.transports[f]
        d1 = C.mor_dst[f]
        fib = D.fibers[d1]
        if q == 0:
            return identity_surj(0), 0, (t.obj_map[flab[0]],)
        mapped = tuple(t.mor_map[g] for g in flab)
        sig, core = _normalize_string(fib, mapped)
        if core:
            return sig, len(core), core
        x0 = fib.mor_src[mapped[0]]
        return sig, 0, (x0,)

    hfaces = {}
    vfaces = {}
    for (p, q), cs in X.cells.items():
        htab = []
        vtab = []
        for (blab, flab) in cs:
            d0 = _string_vertices(C, blab, p)[0]
            fnerve = fiber_nerves[d0]
            # vertical faces: act on the fiber cell only
            vrow = []
            for j in range(q + 1):
                if q == 0:
                    break
                sv, q2, fidx2 = fnerve.face(q, fnerve.index[q][flab], j)
                flab2 = fnerve.cells[q2][fidx2]
                vrow.append((identity_surj(p), sv,
                             (p, q2, X.index[(p, q2)][(blab, flab2)])))
            vtab.append(tuple(vrow))
            # horizontal faces
            hrow = []
            for i in range(p + 1):
                if p == 0:
                    break
                if i == 0:
                    f1 = blab[0]
                    sv, q2, flab2 = transport_fiber_cell(f1, d0, flab, q)
                    if p == 1:
                        blab2 = (C.mor_dst[f1],)
                    else:
                        blab2 = blab[1:]
                    hrow.append((identity_surj(p - 1), sv,
                                 (p - 1, q2, X.index[(p - 1, q2)][(blab2, flab2)])))
                else:
                    sh, p2, bidx2 = base_nerve.face(p, base_nerve.index[p][blab], i)
                    blab2 = base_nerve.cells[p2][bidx2]
                    hrow.append((sh, identity_surj(q),
                                 (p2, q, X.index[(p2, q)][(blab2, flab)])))
            htab.append(tuple(hrow))
        hfaces[(p, q)] = htab
        vfaces[(p, q)] = vtab
    X.hfaces = hfaces
    X.vfaces = vfaces
    return X


# ---------------------------------------------------------------------------
# diagonal


def _common_collapse(sig_h, sig_v):
    """Factor out positions collapsed by both words.

    Returns (rho, sig_h', sig_v') with sig = sig' o rho and the primed
    words sharing no collapse.
    """
    n = len(sig_h) - 1
    rho = [0]
    keep = [0]
    for t in range(1, n + 1):
        if sig_h[t] == sig_h[t - 1] and sig_v[t] == sig_v[t - 1]:
            rho.append(rho[-1])
        else:
            rho.append(rho[-1] + 1)
            keep.append(t)
    sh = tuple(sig_h[t] for t in keep)
    sv = tuple(sig_v[t] for t in keep)
    return tuple(rho), sh, sv


class DiagonalSSet(SimplicialSet):
    """Diagonal of a bisimplicial set; cells are no-common-collapse triples."""

    def __init__(self, bisset, trunc):
        self.bisset = bisset
        cells = {}
        for n in range(trunc + 1):
            cs = []
            for (p0, q0), base_cells in bisset.cells.items():
                if p0 > n or q0 > n or not base_cells:
                    continue
                for sig_h in surjections(n, p0):
                    hcol = {
                        t for t in range(1, n + 1) if sig_h[t] == sig_h[t - 1]
                    }
                    for sig_v in surjections(n, q0):
                        if any(sig_v[t] == sig_v[t - 1] for t in hcol):
                            continue
                        for idx in range(len(base_cells)):
                            cs.append((sig_h, sig_v, p0, q0, idx))
            cells[n] = sorted(cs)
        exact = bisset.exact_p and bisset.exact_q
        super().__init__(trunc, cells, {}, exact_top=exact)
        faces = {}
        for n in range(1, trunc + 1):
            tab = []
            for lab in self.cells[n]:
                sig_h, sig_v, p0, q0, idx = lab
                triple = (sig_h, sig_v, (p0, q0, idx))
                row = []
                for i in range(n + 1):
                    t1 = bisset.triple_hface(triple, i)
                    t2 = bisset.triple_vface(t1, i)
                    row.append(self._triple_to_pair(n - 1, t2))
                tab.append(tuple(row))
            faces[n] = tab
        self.faces = faces

    def _triple_to_pair(self, n, triple):
        sh, sv, (p0, q0, idx) = triple
        rho, sh2, sv2 = _common_collapse(sh, sv)
        lab = (sh2, sv2, p0, q0, idx)
        m = len(sh2) - 1
        return (rho, m, self.index[m][lab])

    def cell_triple(self, n, idx):
        sig_h, sig_v, p0, q0, bidx = self.cells[n][idx]
        return (sig_h, sig_v, (p0, q0, bidx))


def diagonal(bisset, trunc=None):
    if trunc is None:
        trunc = min(bisset.trunc_p, bisset.trunc_q)
    if trunc > min(bisset.trunc_p, bisset.trunc_q):
        raise ValueError("diagonal needs a square window")
    return DiagonalSSet(bisset, trunc)


# ---------------------------------------------------------------------------
# the comparison map from the diagonal into the nerve of the total category


def _unfold_base(C, blab, p, sig_h, n):
    """Arrows f_1..f_n (with identities) of the degenerated base string."""
    verts = _string_vertices(C, blab, p)
    arrows = []
    for t in range(1, n + 1):
        if sig_h[t] > sig_h[t - 1]:
            arrows.append(blab[sig_h[t] - 1])
        else:
            arrows.append(C.identity[verts[sig_h[t]]])
    return arrows, [verts[sig_h[t]] for t in range(n + 1)]


def thomason_map(D, trunc, groth=None, target=None):
    """The weak equivalence diag N(base, fibers) -> N(total category).

    Sends (d_0 -> ... -> d_n, x_0 -> ... -> x_n) with x_i in the fiber over
    d_0 to the string whose i-th arrow is (f_i, transport(f_i ... f_1)(g_i));
    the i-th vertex is (d_i, transport(f_i ... f_1)(x_i)).
    """
    C = D.base
    if groth is None:
        groth = grothendieck(D)
    total = groth.category
    if target is None:
        target = nerve(total, trunc)
    X = nerve_coeff_cat(D, trunc, trunc)
    diag = diagonal(X, trunc)
    obj_idx = {lab: i for i, lab in enumerate(total.obj_labels)}
    mor_idx = {lab: i for i, lab in enumerate(total.mor_labels)}
    maps = {}
    for n in range(trunc + 1):
        row = []
        for lab in diag.cells[n]:
            sig_h, sig_v, p0, q0, bidx = lab
            blab, flab = X.cells[(p0, q0)][bidx]
            d0 = _string_vertices(C, blab, p0)[0]
            fib0 = D.fibers[d0]
            base_arrows, base_verts = _unfold_base(C, blab, p0, sig_h, n)
            fiber_arrows, fiber_verts = _unfold_base(fib0, flab, q0, sig_v, n) \
                if q0 > 0 or n > 0 else ([], [flab[0]])
            if q0 == 0:
                fiber_verts = [flab[0]] * (n + 1)
                fiber_arrows = [fib0.identity[flab[0]]] * n
            # walk the string, transporting through the accumulated functor
            cur_obj = list(range(D.fibers[d0].n_objects))
            cur_mor = list(range(D.fibers[d0].n_morphisms))
            cur_fiber = d0
            ys = [fiber_verts[0]]
            hs = []
            for i in range(1, n + 1):
                f = base_arrows[i - 1]
                t = D.transports[f]
                cur_obj = [t.obj_map[o] for o in cur_obj]
                cur_mor = [t.mor_map[m] for m in cur_mor]
                cur_fiber = C.mor_dst[f]
                g = cur_mor[fiber_arrows[i - 1]]
                y_prev = ys[-1]
                ys.append(cur_obj[fiber_verts[i]])
                hs.append((f, cur_obj[fiber_verts[i - 1]], g, cur_fiber))
            # assemble the string in the total category
            mors = []
            for i, (f, y_prev, g, dfib) in enumerate(hs):
                src_obj = (base_verts[i], ys[i])
                m_lab = (f, ys[i], g)
                mors.append(mor_idx[m_lab])
            if n == 0:
                row.append(((0,), 0, target.index[0][
                    (obj_idx[(d0, fiber_verts[0])],)]))
                continue
            sig, core = _normalize_string(total, tuple(mors))
            if core:
                row.append((sig, len(core), target.index[len(core)][core]))
            else:
                o = total.mor_src[mors[0]]
                row.append((sig, 0, target.index[0][(o,)]))
        maps[n] = row
    return SimplicialMap(diag, target, maps), diag, groth, target


# ---------------------------------------------------------------------------
# natural transformations give chain homotopies on nerve chains


def prism_homotopy(eta, trunc, X=None, Y=None):
    """Chain homotopy between the nerve maps of two naturally isomorphic...

    For eta : F => G between functors C -> D, produces matrices
    h_n : C_n(N(C)) -> C_{n+1}(N(D)) (normalized nerves) with
    d h + h d = G_* - F_*; the identity is verified before returning.
    """
    F, G = eta.source, eta.target
    C, Dcat = F.src, F.dst
    if X is None:
        X = nerve(C, trunc)
    if Y is None:
        Y = nerve(Dcat, trunc + 1)
    mats = {}
    for n in range(trunc + 1):
        ent = {}
        for col, lab in enumerate(X.cells[n]):
            verts = _string_vertices(C, lab, n)
            arrows = list(lab) if n > 0 else []
            for i in range(n + 1):
                string = (
                    [F.mor_map[a] for a in arrows[:i]]
                    + [eta.components[verts[i]]]
                    + [G.mor_map[a] for a in arrows[i:]]
                )
                sig, core = _normalize_string(Dcat, tuple(string))
                if len(core) == n + 1:
                    key = (Y.index[n + 1][core], col)
                    ent[key] = ent.get(key, 0) + (-1) ** i
            # terms with identities or repeated composites die in the
            # normalized complex
        mats[n] = zalg.SparseIntMatrix(Y.n_cells(n + 1), X.n_cells(n), ent)
    # verify d h + h d = G_* - F_*
    f_map = nerve_map(F, X, Y).chain_map()
    g_map = nerve_map(G, X, Y).chain_map()
    CX = X.chains()
    CY = Y.chains()
    for n in range(trunc + 1):
        lhs = CY.boundary(n + 1) * mats[n]
        if n >= 1:
            lhs = lhs + mats[n - 1] * CX.boundary(n)
        rhs = g_map.mat(n) - f_map.mat(n)
        if lhs != rhs:
            raise ArithmeticError(f"prism homotopy identity fails in degree {n}")
    return mats, f_map, g_map, CX, CY


# ---------------------------------------------------------------------------
# reduced coefficients: the shifted cone of the collapse map


def diagonal_collapse_map(D, diag, base_nerve):
    """The map diag N(base, fibers) -> N(base) killing the fiber direction."""
    C = D.base
    maps = {}
    for n in range(diag.trunc + 1):
        row = []
        for lab in diag.cells[n]:
            sig_h, sig_v, p0, q0, bidx = lab
            blab, flab = diag.bisset.cells[(p0, q0)][bidx]
            if p0 == 0:
                d0 = blab[0]
                row.append((sig_h, 0, base_nerve.index[0][(d0,)]))
            else:
                row.append((sig_h, p0, base_nerve.index[p0][blab]))
        maps[n] = row
    return SimplicialMap(diag, base_nerve, maps)


def diagram_morphism_map(phi, diag_src, diag_tgt):
    """Map of diagonals induced by a morphism of Cat-valued diagrams."""
    D1, D2 = phi.source, phi.target
    C = D1.base
    maps = {}
    for n in range(diag_src.trunc + 1):
        row = []
        for lab in diag_src.cells[n]:
            sig_h, sig_v, p0, q0, bidx = lab
            blab, flab = diag_src.bisset.cells[(p0, q0)][bidx]
            d0 = _string_vertices(C, blab, p0)[0]
            comp = phi.components[d0]
            fib2 = D2.fibers[d0]
            if q0 == 0:
                flab2 = (comp.obj_map[flab[0]],)
                sv2, q2 = identity_surj(0), 0
            else:
                mapped = tuple(comp.mor_map[g] for g in flab)
                sv2, core = _normalize_string(fib2, mapped)
                if core:
                    flab2, q2 = core, len(core)
                else:
                    flab2, q2 = (fib2.mor_src[mapped[0]],), 0
            triple = (sig_h, compose_surj(sv2, sig_v),
                      (p0, q2, diag_tgt.bisset.index[(p0, q2)][(blab, flab2)]))
            row.append(diag_tgt._triple_to_pair(n, triple))
        maps[n] = row
    return SimplicialMap(diag_src, diag_tgt, maps)


def reduced_cone_complex(D, trunc, phi=None):
    """Chains of a diagram with reduced (cone) coefficients.

    For phi = None this is cone(C(diag N(base, F)) -> C(N(base)))[-1]; its
    homology in degree i is the reduced homology H_i(base, ~F) whenever the
    fibers are nonempty.  A DiagramMorphism phi : F -> G gives the general
    cone(C(base, F) -> C(base, G))[-1].
    """
    X = nerve_coeff_cat(D, trunc, trunc)
    diag = diagonal(X, trunc)
    if phi is None:
        base_nerve = nerve(D.base, trunc)
        smap = diagonal_collapse_map(D, diag, base_nerve)
    else:
        Xg = nerve_coeff_cat(phi.target, trunc, trunc)
        diag_g = diagonal(Xg, trunc)
        smap = diagram_morphism_map(phi, diag, diag_g)
    f = smap.chain_map()
    cone = zalg.mapping_cone(f)
    return zalg.shift_complex(cone, -1)
