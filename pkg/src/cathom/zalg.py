"""Exact linear algebra over Z and bounded chain complexes.

Everything in this module is exact: matrices carry arbitrary-precision
integer entries, homology groups come out as a free rank plus a chain of
invariant factors, and the Smith normal form re-verifies its own
transforms on every call.  Large complexes are first shrunk by repeated
elimination of +-1 pivots (which splits off acyclic two-term summands and
preserves homology on the nose); Smith reduction only ever sees the small
remaining core.
"""

from __future__ import annotations

from dataclasses import dataclass, field


# ---------------------------------------------------------------------------
# dense helpers (lists of lists of python ints)


def _mat_mul(A, B):
    n, k = len(A), len(B)
    m = len(B[0]) if B else 0
    Bc = [[B[r][c] for r in range(k)] for c in range(m)]
    out = []
    for row in A:
        out.append([sum(row[t] * col[t] for t in range(k)) for col in Bc])
    return out


def _identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _copy(M):
    return [row[:] for row in M]


def _transpose(M, rows=None, cols=None):
    if not M:
        return [[] for _ in range(cols or 0)]
    return [[M[i][j] for i in range(len(M))] for j in range(len(M[0]))]


# ---------------------------------------------------------------------------
# Hermite normal form (column operations) and lattice arithmetic
#
# Lattices are subgroups of Z^n given by generating vectors; the canonical
# column HNF makes membership, equality and sums cheap and deterministic.


def hnf_columns(M, transform=False):
    """Column-style Hermite form.

    Returns (H, V) with M @ V = H, V unimodular, H in column echelon form
    with positive pivots and with entries left of each pivot reduced into
    [0, pivot).  Pass transform=False to skip accumulating V.
    """
    rows = len(M)
    cols = len(M[0]) if M else 0
    H = _copy(M)
    V = _identity(cols) if transform else None

    def colop_sub(j, k, q):
        # col_j -= q * col_k
        for r in range(rows):
            H[r][j] -= q * H[r][k]
        if V is not None:
            for r in range(cols):
                V[r][j] -= q * V[r][k]

    def colswap(j, k):
        for r in range(rows):
            H[r][j], H[r][k] = H[r][k], H[r][j]
        if V is not None:
            for r in range(cols):
                V[r][j], V[r][k] = V[r][k], V[r][j]

    def colneg(j):
        for r in range(rows):
            H[r][j] = -H[r][j]
        if V is not None:
            for r in range(cols):
                V[r][j] = -V[r][j]

    pivots = []  # (row, col)
    c = 0
    for r in range(rows):
        if c >= cols:
            break
        # euclidean gcd dance on row r across columns c..cols-1
        while True:
            nz = [j for j in range(c, cols) if H[r][j] != 0]
            if not nz:
                break
            jmin = min(nz, key=lambda j: abs(H[r][j]))
            if jmin != c:
                colswap(c, jmin)
            done = True
            for j in range(c + 1, cols):
                if H[r][j] != 0:
                    q = H[r][j] // H[r][c]
                    colop_sub(j, c, q)
                    if H[r][j] != 0:
                        done = False
            if done:
                break
        if c < cols and H[r][c] != 0:
            if H[r][c] < 0:
                colneg(c)
            pivots.append((r, c))
            c += 1
    # canonical reduction: entries left of each pivot into [0, pivot)
    for (r, j) in pivots:
        for k in range(j):
            q = H[r][k] // H[r][j]
            if q:
                colop_sub(k, j, q)
    return H, V


def kernel_basis(M, rows=None, cols=None):
    """Basis (list of integer vectors) of ker(M : Z^cols -> Z^rows)."""
    if cols is None:
        cols = len(M[0]) if M else 0
    if cols == 0:
        return []
    if not M:
        return [[1 if a == b else 0 for a in range(cols)] for b in range(cols)]
    H, V = hnf_columns(M, transform=True)
    out = []
    for j in range(cols):
        if all(H[r][j] == 0 for r in range(len(M))):
            out.append([V[r][j] for r in range(cols)])
    return out


def solve_int(M, b, rows=None, cols=None):
    """One integer solution x of M x = b, or None."""
    rows = len(M) if rows is None else rows
    cols = (len(M[0]) if M else 0) if cols is None else cols
    if cols == 0 or rows == 0:
        return [0] * cols if all(v == 0 for v in b) else None
    H, V = hnf_columns(M, transform=True)
    # leading rows of the nonzero (pivot) columns, in increasing order
    pivots = []
    for j in range(cols):
        lead = next((r for r in range(rows) if H[r][j] != 0), None)
        if lead is not None:
            pivots.append((lead, j))
    y = [0] * cols
    resid = list(b)
    pos = 0
    for lead, j in pivots:
        for r in range(pos, lead):
            if resid[r] != 0:
                return None
        if resid[lead] % H[lead][j] != 0:
            return None
        q = resid[lead] // H[lead][j]
        if q:
            y[j] = q
            for r in range(lead, rows):
                resid[r] -= q * H[r][j]
        pos = lead + 1
    if any(v != 0 for v in resid):
        return None
    return [sum(V[i][j] * y[j] for j in range(cols) if y[j]) for i in range(cols)]


def lattice_canon(gens, ambient):
    """Canonical basis of the lattice spanned by gens inside Z^ambient.

    Returned as a tuple of tuples (one per basis vector); equal lattices
    give equal canonical bases.
    """
    if not gens:
        return ()
    M = [[g[i] for g in gens] for i in range(ambient)]
    H, _ = hnf_columns(M, transform=False)
    cols = []
    for j in range(len(gens)):
        col = tuple(H[r][j] for r in range(ambient))
        if any(col):
            cols.append(col)
    return tuple(cols)


def lattice_contains(canon, vec):
    """Membership test against a canonical (column HNF) basis."""
    if not canon:
        return all(v == 0 for v in vec)
    M = [[c[i] for c in canon] for i in range(len(vec))]
    return solve_int(M, list(vec)) is not None


def lattice_equal(gens_a, gens_b, ambient):
    return lattice_canon(gens_a, ambient) == lattice_canon(gens_b, ambient)


def lattice_leq(gens_a, gens_b, ambient):
    """Is span(gens_a) contained in span(gens_b)?"""
    canon = lattice_canon(gens_b, ambient)
    return all(lattice_contains(canon, g) for g in gens_a)


def preimage_lattice(F, den_gens, dom, cod):
    """Basis of {x in Z^dom : F x in span(den_gens)}.

    F is dense cod x dom; den_gens are vectors in Z^cod.
    """
    width = dom + len(den_gens)
    M = [[0] * width for _ in range(cod)]
    for i in range(cod):
        for j in range(dom):
            M[i][j] = F[i][j]
        for k, g in enumerate(den_gens):
            M[i][dom + k] = -g[i]
    ker = kernel_basis(M, cod, width)
    projected = [v[:dom] for v in ker]
    canon = lattice_canon(projected, dom)
    return [list(c) for c in canon]


# ---------------------------------------------------------------------------
# Smith normal form


def _snf_dense(M, transform=False):
    """Diagonalize M by unimodular row/column operations.

    Returns (diag, U, V, Uinv) with U @ M @ V diagonal; diag is the list of
    invariant factors d1 | d2 | ... (positive, 1s included, no zeros).
    Transforms are None unless requested.
    """
    A = _copy(M)
    rows = len(A)
    cols = len(A[0]) if A else 0
    U = _identity(rows) if transform else None
    Uinv = _identity(rows) if transform else None
    V = _identity(cols) if transform else None

    def rowop(i, k, q):  # row_i -= q*row_k ; Uinv col_k += q*col_i
        Ai, Ak = A[i], A[k]
        for c in range(cols):
            Ai[c] -= q * Ak[c]
        if transform:
            Ui, Uk = U[i], U[k]
            for c in range(rows):
                Ui[c] -= q * Uk[c]
            for r in range(rows):
                Uinv[r][k] += q * Uinv[r][i]

    def colop(j, k, q):  # col_j -= q*col_k
        for r in range(rows):
            A[r][j] -= q * A[r][k]
        if transform:
            for r in range(cols):
                V[r][j] -= q * V[r][k]

    def rowswap(i, k):
        A[i], A[k] = A[k], A[i]
        if transform:
            U[i], U[k] = U[k], U[i]
            for r in range(rows):
                Uinv[r][i], Uinv[r][k] = Uinv[r][k], Uinv[r][i]

    def colswap(j, k):
        for r in range(rows):
            A[r][j], A[r][k] = A[r][k], A[r][j]
        if transform:
            for r in range(cols):
                V[r][j], V[r][k] = V[r][k], V[r][j]

    def rowneg(i):
        for c in range(cols):
            A[i][c] = -A[i][c]
        if transform:
            for c in range(rows):
                U[i][c] = -U[i][c]
            for r in range(rows):
                Uinv[r][i] = -Uinv[r][i]

    t = 0
    limit = min(rows, cols)
    while t < limit:
        # locate a pivot: smallest nonzero absolute value in A[t:, t:]
        piv = None
        best = None
        for i in range(t, rows):
            Ai = A[i]
            for j in range(t, cols):
                v = Ai[j]
                if v:
                    a = abs(v)
                    if best is None or a < best:
                        best = a
                        piv = (i, j)
                        if a == 1:
                            break
            if best == 1:
                break
        if piv is None:
            break
        i, j = piv
        if i != t:
            rowswap(t, i)
        if j != t:
            colswap(t, j)
        if A[t][t] < 0:
            rowneg(t)
        clean = True
        for i in range(t + 1, rows):
            if A[i][t]:
                q = A[i][t] // A[t][t]
                rowop(i, t, q)
                if A[i][t]:
                    clean = False
        for j in range(t + 1, cols):
            if A[t][j]:
                q = A[t][j] // A[t][t]
                colop(j, t, q)
                if A[t][j]:
                    clean = False
        if not clean:
            continue  # remainder left somewhere; redo the pivot hunt at t
        # divisibility sweep: fold any non-multiple into the pivot's reach
        bad = None
        for i in range(t + 1, rows):
            Ai = A[i]
            for j in range(t + 1, cols):
                if Ai[j] % A[t][t] != 0:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            rowop(t, bad, -1)  # row_t += row_bad
            continue
        t += 1
    diag = [A[k][k] for k in range(t)]
    # pivots were always chosen minimal and the divisibility sweep runs
    # before advancing, so the diagonal is already a chain
    return diag, U, V, Uinv


def snf_invariants_dense(M):
    return _snf_dense(M, transform=False)[0]


def smith_normal_form(M):
    """Smith normal form with transforms, self-verified.

    Accepts a SparseIntMatrix or a dense list of rows.  Returns (D, U, V)
    where D is the full rows x cols diagonal matrix (dense), U, V are
    unimodular (built from elementary operations) and U @ M @ V == D; the
    product is re-checked exactly on every call.
    """
    if isinstance(M, SparseIntMatrix):
        dense = M.to_dense()
        rows, cols = M.rows, M.cols
    else:
        dense = _copy(M)
        rows = len(dense)
        cols = len(dense[0]) if dense else 0
    diag, U, V, _ = _snf_dense(dense, transform=True)
    D = [[0] * cols for _ in range(rows)]
    for k, d in enumerate(diag):
        D[k][k] = d
    prod = _mat_mul(_mat_mul(U, dense), V) if rows and cols else D
    if rows and cols and prod != D:
        raise ArithmeticError("Smith normal form self-check failed")
    for k in range(1, len(diag)):
        if diag[k] % diag[k - 1] != 0:
            raise ArithmeticError("invariant factors do not form a chain")
    return D, U, V


# ---------------------------------------------------------------------------
# sparse matrices


class SparseIntMatrix:
    """Integer matrix stored as {(i, j): value}; zeros are never stored."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows, cols, entries=None):
        self.rows = rows
        self.cols = cols
        self.entries = {}
        if entries:
            items = entries.items() if isinstance(entries, dict) else entries
            for key, v in items:
                if v:
                    i, j = key
                    self.entries[(i, j)] = self.entries.get((i, j), 0) + v
            self.entries = {k: v for k, v in self.entries.items() if v}

    @classmethod
    def from_triples(cls, rows, cols, triples):
        return cls(rows, cols, [((i, j), v) for i, j, v in triples])

    @classmethod
    def from_dense(cls, M):
        rows = len(M)
        cols = len(M[0]) if M else 0
        ent = {}
        for i, row in enumerate(M):
            for j, v in enumerate(row):
                if v:
                    ent[(i, j)] = v
        return cls(rows, cols, ent)

    @classmethod
    def identity(cls, n):
        return cls(n, n, {(i, i): 1 for i in range(n)})

    def to_dense(self):
        M = [[0] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            M[i][j] = v
        return M

    def to_triples(self):
        return sorted((i, j, v) for (i, j), v in self.entries.items())

    def nnz(self):
        return len(self.entries)

    def is_zero(self):
        return not self.entries

    def transpose(self):
        return SparseIntMatrix(
            self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()}
        )

    def apply(self, vec):
        """Matrix times sparse vector {col: value} -> {row: value}."""
        out = {}
        cols = {}
        for (i, j), v in self.entries.items():
            cols.setdefault(j, []).append((i, v))
        for j, x in vec.items():
            if not x:
                continue
            for i, v in cols.get(j, ()):
                out[i] = out.get(i, 0) + v * x
        return {i: v for i, v in out.items() if v}

    def __mul__(self, other):
        if not isinstance(other, SparseIntMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        by_row = {}
        for (i, j), v in other.entries.items():
            by_row.setdefault(i, []).append((j, v))
        out = {}
        for (i, k), v in self.entries.items():
            for j, w in by_row.get(k, ()):
                key = (i, j)
                out[key] = out.get(key, 0) + v * w
        return SparseIntMatrix(self.rows, other.cols, out)

    def __add__(self, other):
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError("shape mismatch")
        ent = dict(self.entries)
        for k, v in other.entries.items():
            ent[k] = ent.get(k, 0) + v
        return SparseIntMatrix(self.rows, self.cols, ent)

    def __neg__(self):
        return SparseIntMatrix(
            self.rows, self.cols, {k: -v for k, v in self.entries.items()}
        )

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return (
            isinstance(other, SparseIntMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(sorted(self.entries.items()))))

    def __repr__(self):
        return f"SparseIntMatrix({self.rows}x{self.cols}, nnz={self.nnz()})"


def snf_invariants(M):
    """Invariant factors of a SparseIntMatrix (no transforms).

    Unit pivots are eliminated sparsely first (each contributes an
    invariant factor 1); the dense Smith routine finishes the residue.
    """
    rows = {}
    cols = {}
    for (i, j), v in M.entries.items():
        rows.setdefault(i, {})[j] = v
        cols.setdefault(j, {})[i] = v
    ones = _sparse_unit_eliminate(rows, cols)
    live_rows = sorted(rows)
    live_cols = sorted(cols)
    inv = [1] * ones
    if live_rows and live_cols:
        ri = {i: a for a, i in enumerate(live_rows)}
        ci = {j: b for b, j in enumerate(live_cols)}
        dense = [[0] * len(live_cols) for _ in live_rows]
        for i, r in rows.items():
            for j, v in r.items():
                dense[ri[i]][ci[j]] = v
        inv.extend(snf_invariants_dense(dense))
    return inv


def _sparse_unit_eliminate(rows, cols):
    """Destructively eliminate +-1 pivots from a dict-of-dicts matrix.

    Returns how many pivots were eliminated.  Rows/cols that become empty
    are pruned.
    """
    units = [
        (i, j) for i, r in rows.items() for j, v in r.items() if v in (1, -1)
    ]
    count = 0
    while units:
        i, j = units.pop()
        v = rows.get(i, {}).get(j)
        if v not in (1, -1):
            continue
        count += 1
        row = rows.pop(i)
        del row[j]
        col = cols.pop(j)
        del col[i]
        for jj in row:
            cols[jj].pop(i, None)
        for ii in col:
            rows[ii].pop(j, None)
        if row and col:
            for ii, b in col.items():
                rii = rows[ii]
                for jj, a in row.items():
                    # Schur update for unit pivot v
                    w = rii.get(jj, 0) - a * b * v
                    if w:
                        rii[jj] = w
                        cols[jj][ii] = w
                        if w in (1, -1):
                            units.append((ii, jj))
                    else:
                        rii.pop(jj, None)
                        cols[jj].pop(ii, None)
        for ii in list(col):
            if ii in rows and not rows[ii]:
                del rows[ii]
        for jj in list(row):
            if jj in cols and not cols[jj]:
                del cols[jj]
    return count


# ---------------------------------------------------------------------------
# finitely generated abelian groups, presented in Smith coordinates


@dataclass(frozen=True)
class FgGroup:
    """Z^r plus cyclic torsion, in a fixed generator order.

    orders[k] is the order of the k-th generator: torsion generators come
    first with orders d1 | d2 | ... (each >= 2), free generators follow
    with order 0.
    """

    orders: tuple

    @property
    def ngens(self):
        return len(self.orders)

    @property
    def free_rank(self):
        return sum(1 for d in self.orders if d == 0)

    @property
    def torsion(self):
        return tuple(d for d in self.orders if d)

    def is_trivial(self):
        return not self.orders

    def relation_gens(self):
        """Generators of the relation lattice inside Z^ngens."""
        out = []
        for k, d in enumerate(self.orders):
            if d:
                v = [0] * self.ngens
                v[k] = d
                out.append(v)
        return out

    def reduce_vec(self, vec):
        return tuple(
            v % d if d else v for v, d in zip(vec, self.orders)
        )

    def __str__(self):
        if not self.orders:
            return "0"
        parts = []
        r = self.free_rank
        if r == 1:
            parts.append("Z")
        elif r > 1:
            parts.append(f"Z^{r}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " + ".join(parts)


@dataclass
class HomologyGroup:
    """A homology group in one degree: free rank plus invariant factors."""

    degree: int
    free_rank: int
    torsion: tuple = ()

    def __post_init__(self):
        self.torsion = tuple(self.torsion)
        for k in range(1, len(self.torsion)):
            if self.torsion[k] % self.torsion[k - 1] != 0:
                raise ValueError("torsion coefficients must form a chain")

    @classmethod
    def from_group(cls, degree, group):
        return cls(degree, group.free_rank, group.torsion)

    def group(self):
        return FgGroup(tuple(self.torsion) + (0,) * self.free_rank)

    def __str__(self):
        return f"H_{self.degree} = {self.group()}"

    def __eq__(self, other):
        if isinstance(other, HomologyGroup):
            return (
                self.degree == other.degree
                and self.free_rank == other.free_rank
                and self.torsion == other.torsion
            )
        return NotImplemented


class GroupHom:
    """Homomorphism between FgGroups, as a matrix on chosen generators.

    mat[i][j] is the coefficient of the i-th generator of cod in the image
    of the j-th generator of dom.
    """

    def __init__(self, dom, cod, mat):
        self.dom = dom
        self.cod = cod
        self.mat = [list(row) for row in mat]
        if len(self.mat) != cod.ngens or (
            self.mat and any(len(r) != dom.ngens for r in self.mat)
        ):
            raise ValueError("matrix shape does not match the groups")

    def column(self, j):
        return [self.mat[i][j] for i in range(self.cod.ngens)]

    def is_well_defined(self):
        """Do the relations of dom map into the relations of cod?"""
        rel = self.cod.relation_gens()
        canon = lattice_canon(rel, self.cod.ngens)
        for k, d in enumerate(self.dom.orders):
            if d:
                img = [d * self.mat[i][k] for i in range(self.cod.ngens)]
                if not lattice_contains(canon, img):
                    return False
        return True

    def compose(self, other):
        """self o other (other first)."""
        if other.cod is not self.dom and other.cod != self.dom:
            raise ValueError("homomorphisms not composable")
        mat = _mat_mul(self.mat, other.mat) if self.mat and other.mat else [
            [0] * other.dom.ngens for _ in range(self.cod.ngens)
        ]
        return GroupHom(other.dom, self.cod, mat)

    def equal_mod_relations(self, other):
        if self.dom.orders != other.dom.orders or self.cod.orders != other.cod.orders:
            return False
        rel = lattice_canon(self.cod.relation_gens(), self.cod.ngens)
        for j in range(self.dom.ngens):
            diff = [
                self.mat[i][j] - other.mat[i][j] for i in range(self.cod.ngens)
            ]
            if any(diff) and not lattice_contains(rel, diff):
                return False
        return True

    def is_zero(self):
        zero = GroupHom(
            self.dom,
            self.cod,
            [[0] * self.dom.ngens for _ in range(self.cod.ngens)],
        )
        return self.equal_mod_relations(zero)

    def kernel_lattice(self):
        """Lattice L with ker = L / relations(dom), inside Z^{dom.ngens}."""
        rel = self.cod.relation_gens()
        pre = preimage_lattice(self.mat, rel, self.dom.ngens, self.cod.ngens)
        return [list(v) for v in pre] + self.dom.relation_gens()

    def image_lattice(self):
        """Lattice spanned by the generator images plus cod relations."""
        cols = [self.column(j) for j in range(self.dom.ngens)]
        return cols + self.cod.relation_gens()

    def is_surjective(self):
        n = self.cod.ngens
        gens = self.image_lattice()
        canon = lattice_canon(gens, n)
        basis = _identity(n)
        return all(lattice_contains(canon, e) for e in basis)

    def is_injective(self):
        return lattice_leq(
            self.kernel_lattice(),
            self.dom.relation_gens(),
            self.dom.ngens,
        )

    def is_isomorphism(self):
        return self.is_surjective() and self.is_injective()

    def inverse(self):
        """Inverse of an isomorphism (raises if not one)."""
        n, m = self.cod.ngens, self.dom.ngens
        rel = self.cod.relation_gens()
        width = m + len(rel)
        out = []
        for k in range(n):
            M = [[0] * width for _ in range(n)]
            for i in range(n):
                for j in range(m):
                    M[i][j] = self.mat[i][j]
                for t, g in enumerate(rel):
                    M[i][m + t] = g[i]
            target = [1 if i == k else 0 for i in range(n)]
            sol = solve_int(M, target)
            if sol is None:
                raise ArithmeticError("homomorphism is not invertible")
            out.append(sol[:m])
        mat = [[out[k][j] for k in range(n)] for j in range(m)]
        inv = GroupHom(self.cod, self.dom, mat)
        return inv


@dataclass
class ExactnessReport:
    """Outcome of an exactness check along a sequence of homomorphisms."""

    ok: bool
    failures: list = field(default_factory=list)
    nodes_checked: int = 0

    def __bool__(self):
        return self.ok


def homology_at(f_in, f_out):
    """ker(f_out)/im(f_in) for composable GroupHoms, as an FgGroup."""
    if f_in.cod.orders != f_out.dom.orders:
        raise ValueError("homomorphisms are not composable")
    B = f_out.dom
    num = f_out.kernel_lattice()
    num_basis = [list(v) for v in lattice_canon(num, B.ngens)]
    den = f_in.image_lattice()
    return Subquotient(B.ngens, num_basis, den).group


def check_exact(homs, at_ends=False):
    """Verify exactness of a composable sequence of GroupHoms.

    Checks im(f_k) = ker(f_{k+1}) at every interior node.  With
    at_ends=True additionally requires the first map injective and the
    last surjective (i.e. the sequence extends by zeros).
    """
    failures = []
    for k in range(len(homs) - 1):
        f, g = homs[k], homs[k + 1]
        if f.cod.orders != g.dom.orders:
            failures.append((k, "maps are not composable"))
            continue
        if not g.compose(f).is_zero():
            failures.append((k, "composite is nonzero"))
            continue
        amb = f.cod.ngens
        if not lattice_equal(g.kernel_lattice(), f.image_lattice(), amb):
            failures.append((k, "kernel differs from image"))
    if at_ends and homs:
        if not homs[0].is_injective():
            failures.append((-1, "first map not injective"))
        if not homs[-1].is_surjective():
            failures.append((len(homs), "last map not surjective"))
    return ExactnessReport(not failures, failures, max(0, len(homs) - 1))


# ---------------------------------------------------------------------------
# subquotients of Z^N


class Subquotient:
    """A quotient (lattice num)/(lattice den) of subgroups of Z^N.

    Presents the quotient in Smith coordinates; keeps explicit ambient
    generator vectors and can classify arbitrary members of num.
    """

    def __init__(self, ambient_dim, num_basis, den_gens):
        self.ambient_dim = ambient_dim
        self._num = [list(v) for v in num_basis]
        k = len(self._num)
        self._num_cols = [[v[i] for v in self._num] for i in range(ambient_dim)]
        coords = []
        for g in den_gens:
            c = solve_int(self._num_cols, list(g), ambient_dim, k)
            if c is None:
                raise ValueError("denominator not contained in numerator")
            coords.append(c)
        if k:
            Y = [[c[i] for c in coords] for i in range(k)] if coords else [
                [0] * 0 for _ in range(k)
            ]
            if coords:
                diag, U, V, Uinv = _snf_dense(Y, transform=True)
            else:
                diag, U, Uinv = [], _identity(k), _identity(k)
        else:
            diag, U, Uinv = [], [], []
        orders = []
        keep = []
        for t in range(k):
            d = diag[t] if t < len(diag) else 0
            if d == 1:
                continue
            orders.append(d)
            keep.append(t)
        # torsion first (ascending), then free: diag is ascending with 1s
        # first, so filtering preserves the required order
        self._keep = keep
        self._U = U
        self._Uinv = Uinv
        self.group = FgGroup(tuple(orders))
        self.gens = []
        for t in keep:
            vec = [0] * ambient_dim
            for r in range(k):
                c = Uinv[r][t]
                if c:
                    for i in range(ambient_dim):
                        vec[i] += c * self._num[r][i]
            self.gens.append(vec)

    def classify(self, vec):
        """Coordinates of [vec] in the Smith presentation."""
        k = len(self._num)
        c = solve_int(self._num_cols, list(vec), self.ambient_dim, k)
        if c is None:
            raise ValueError("vector is not in the numerator lattice")
        y = [sum(self._U[t][r] * c[r] for r in range(k)) for t in range(k)]
        coords = [y[t] for t in self._keep]
        return self.group.reduce_vec(coords)


# ---------------------------------------------------------------------------
# chain complexes


class ChainComplex:
    """Bounded complex of free Z-modules with sparse boundary matrices.

    ranks[n] is the rank of C_n for lo <= n <= hi; boundaries[n] maps
    C_n -> C_{n-1} for lo < n <= hi.  exact_top=True asserts that the
    complex genuinely vanishes above hi (and not merely that the window
    was truncated there), which certifies homology at degree hi as well.
    """

    def __init__(self, ranks, boundaries, exact_top=False, labels=None):
        if not ranks:
            ranks = {0: 0}
        self.ranks = dict(ranks)
        self.lo = min(self.ranks)
        self.hi = max(self.ranks)
        for n in range(self.lo, self.hi + 1):
            self.ranks.setdefault(n, 0)
        self.boundaries = dict(boundaries)
        self.exact_top = exact_top
        self.labels = labels
        for n in range(self.lo + 1, self.hi + 1):
            if n not in self.boundaries:
                self.boundaries[n] = SparseIntMatrix(self.rank(n - 1), self.rank(n))

    def rank(self, n):
        return self.ranks.get(n, 0)

    def boundary(self, n):
        b = self.boundaries.get(n)
        if b is None:
            return SparseIntMatrix(self.rank(n - 1), self.rank(n))
        return b

    def certified_degrees(self):
        hi = self.hi if self.exact_top else self.hi - 1
        return range(self.lo, hi + 1)

    def validate(self):
        """Shape and d^2 = 0 checks; returns a list of violations."""
        errors = []
        for n in range(self.lo + 1, self.hi + 1):
            b = self.boundary(n)
            if b.rows != self.rank(n - 1) or b.cols != self.rank(n):
                errors.append(f"boundary {n} has wrong shape")
        for n in range(self.lo + 2, self.hi + 1):
            prod = self.boundary(n - 1) * self.boundary(n)
            if not prod.is_zero():
                errors.append(f"d^2 != 0 at degree {n}")
        return errors

    def euler_characteristic(self):
        return sum((-1) ** n * self.rank(n) for n in range(self.lo, self.hi + 1))

    def total_rank(self):
        return sum(self.ranks.values())

    def homology(self, degrees=None):
        """Homology groups at the certified degrees (dict n -> HomologyGroup)."""
        if degrees is None:
            degrees = list(self.certified_degrees())
        reduced = morse_reduce(self, track=False)
        out = {}
        for n in degrees:
            if n not in self.certified_degrees():
                raise ValueError(f"degree {n} is not certified by the window")
            out[n] = reduced.core_homology(n)
        return out

    def homology_with_basis(self, degrees=None):
        """HomologyBasis per degree: groups, generator cycles, classification."""
        if degrees is None:
            degrees = list(self.certified_degrees())
        reduced = morse_reduce(self, track=True)
        return {n: HomologyBasis(self, reduced, n) for n in degrees}

    def chain_map_to(self, target, mats):
        return ChainMap(self, target, mats)

    def to_json(self):
        return {
            "window": [self.lo, self.hi],
            "exact_top": self.exact_top,
            "ranks": {str(n): self.rank(n) for n in range(self.lo, self.hi + 1)},
            "boundaries": {
                str(n): self.boundary(n).to_triples()
                for n in range(self.lo + 1, self.hi + 1)
            },
        }

    @classmethod
    def from_json(cls, data):
        ranks = {int(n): r for n, r in data["ranks"].items()}
        lo = min(ranks)
        bounds = {}
        for n, triples in data.get("boundaries", {}).items():
            n = int(n)
            bounds[n] = SparseIntMatrix.from_triples(
                ranks.get(n - 1, 0), ranks.get(n, 0), triples
            )
        return cls(ranks, bounds, exact_top=data.get("exact_top", False))


class ChainMap:
    """Degreewise matrices commuting with the boundaries."""

    def __init__(self, source, target, mats):
        self.source = source
        self.target = target
        self.mats = dict(mats)
        for n in self._common_degrees():
            if n not in self.mats:
                self.mats[n] = SparseIntMatrix(target.rank(n), source.rank(n))

    def _common_degrees(self):
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        return range(lo, hi + 1)

    def mat(self, n):
        m = self.mats.get(n)
        if m is None:
            return SparseIntMatrix(self.target.rank(n), self.source.rank(n))
        return m

    def validate(self):
        errors = []
        for n in self._common_degrees():
            m = self.mat(n)
            if m.rows != self.target.rank(n) or m.cols != self.source.rank(n):
                errors.append(f"map at degree {n} has wrong shape")
        hi = min(self.source.hi, self.target.hi)
        lo = max(self.source.lo, self.target.lo)
        for n in range(lo + 1, hi + 1):
            lhs = self.target.boundary(n) * self.mat(n)
            rhs = self.mat(n - 1) * self.source.boundary(n)
            if lhs != rhs:
                errors.append(f"does not commute with boundaries at degree {n}")
        return errors

    def compose(self, other):
        """self o other."""
        mats = {}
        for n in self._common_degrees():
            mats[n] = self.mat(n) * other.mat(n)
        return ChainMap(other.source, self.target, mats)


def mapping_cone(f, with_maps=False):
    """Mapping cone of a chain map f : C -> D.

    cone(f)_n = C_{n-1} (+) D_n with d(c, d) = (-dc, dd - f(c)).  With
    with_maps=True also returns the inclusion D -> cone and the projection
    cone -> C(shifted, boundary negated), whose homology long exact
    sequence is the cone sequence.
    """
    C, D = f.source, f.target
    lo = min(C.lo + 1, D.lo)
    # a side that is genuinely bounded above does not limit the window
    cap_c = None if C.exact_top else C.hi + 1
    cap_d = None if D.exact_top else D.hi
    caps = [c for c in (cap_c, cap_d) if c is not None]
    hi = min(caps) if caps else max(C.hi + 1, D.hi)
    exact_top = C.exact_top and D.exact_top
    hi = max(hi, lo)
    ranks = {}
    for n in range(lo, hi + 1):
        ranks[n] = C.rank(n - 1) + D.rank(n)
    bounds = {}
    for n in range(lo + 1, hi + 1):
        rC, rD = C.rank(n - 1), D.rank(n)
        ent = {}
        for (i, j), v in C.boundary(n - 1).entries.items():
            ent[(i, j)] = -v
        for (i, j), v in D.boundary(n).entries.items():
            ent[(C.rank(n - 2) + i, rC + j)] = v
        for (i, j), v in f.mat(n - 1).entries.items():
            key = (C.rank(n - 2) + i, j)
            ent[key] = ent.get(key, 0) - v
        bounds[n] = SparseIntMatrix(ranks.get(n - 1, 0), ranks[n], ent)
    cone = ChainComplex(ranks, bounds, exact_top=exact_top)
    if not with_maps:
        return cone
    incl_mats = {}
    proj_mats = {}
    shifted_ranks = {n: C.rank(n - 1) for n in range(C.lo + 1, C.hi + 2)}
    shifted_bounds = {}
    for n in range(C.lo + 2, C.hi + 2):
        shifted_bounds[n] = -C.boundary(n - 1)
    shifted = ChainComplex(shifted_ranks, shifted_bounds, exact_top=C.exact_top)
    for n in range(lo, hi + 1):
        rC = C.rank(n - 1)
        incl_mats[n] = SparseIntMatrix(
            ranks[n], D.rank(n), {(rC + i, i): 1 for i in range(D.rank(n))}
        )
        proj_mats[n] = SparseIntMatrix(
            C.rank(n - 1), ranks[n], {(i, i): 1 for i in range(rC)}
        )
    incl = ChainMap(D, cone, incl_mats)
    proj = ChainMap(cone, shifted, proj_mats)
    return cone, incl, proj


def shift_complex(C, k=1):
    """C[k] with C[k]_n = C_{n-k}; odd shifts negate the boundary."""
    ranks = {n + k: C.rank(n) for n in range(C.lo, C.hi + 1)}
    sign = -1 if k % 2 else 1
    bounds = {}
    for n in range(C.lo + 1, C.hi + 1):
        b = C.boundary(n)
        bounds[n + k] = SparseIntMatrix(
            b.rows, b.cols, {key: sign * v for key, v in b.entries.items()}
        )
    return ChainComplex(ranks, bounds, exact_top=C.exact_top)


class DoubleComplex:
    """First-quadrant style double complex with commuting differentials.

    d_h[(p, q)] : C_{p,q} -> C_{p-1,q} and d_v[(p, q)] : C_{p,q} -> C_{p,q-1}
    commute; the total complex inserts the (-1)^p sign on d_v.
    exact_p / exact_q certify that nothing exists beyond the stated window
    in that direction.
    """

    def __init__(self, ranks, d_h, d_v, exact_p=False, exact_q=False):
        self.ranks = dict(ranks)
        self.d_h = dict(d_h)
        self.d_v = dict(d_v)
        self.pmax = max((p for p, _ in self.ranks), default=0)
        self.qmax = max((q for _, q in self.ranks), default=0)
        self.exact_p = exact_p
        self.exact_q = exact_q

    def rank(self, p, q):
        return self.ranks.get((p, q), 0)

    def dh(self, p, q):
        m = self.d_h.get((p, q))
        if m is None:
            return SparseIntMatrix(self.rank(p - 1, q), self.rank(p, q))
        return m

    def dv(self, p, q):
        m = self.d_v.get((p, q))
        if m is None:
            return SparseIntMatrix(self.rank(p, q - 1), self.rank(p, q))
        return m

    def validate(self):
        errors = []
        for (p, q) in self.ranks:
            if p >= 2 and not (self.dh(p - 1, q) * self.dh(p, q)).is_zero():
                errors.append(f"d_h^2 != 0 at {(p, q)}")
            if q >= 2 and not (self.dv(p, q - 1) * self.dv(p, q)).is_zero():
                errors.append(f"d_v^2 != 0 at {(p, q)}")
            if p >= 1 and q >= 1:
                a = self.dv(p - 1, q) * self.dh(p, q)
                b = self.dh(p, q - 1) * self.dv(p, q)
                if a != b:
                    errors.append(f"differentials do not commute at {(p, q)}")
        return errors

    def total_degree_bound(self):
        if self.exact_p and self.exact_q:
            return self.pmax + self.qmax
        if self.exact_p:
            return self.qmax
        if self.exact_q:
            return self.pmax
        return min(self.pmax, self.qmax)


def total_complex(DC):
    """Tot(C)_n = (+)_{p+q=n} C_{p,q} with d = d_h + (-1)^p d_v.

    Basis order inside a total degree is (p, q) lexicographic; labels
    record (p, q, index) so filtrations by columns can be formed.
    """
    hi = DC.total_degree_bound()
    positions = {}
    offsets = {}
    ranks = {}
    labels = {}
    for n in range(0, hi + 1):
        pos = [
            (p, n - p)
            for p in range(0, min(n, DC.pmax) + 1)
            if n - p <= DC.qmax and DC.rank(p, n - p) > 0
        ]
        positions[n] = pos
        off = {}
        total = 0
        labs = []
        for (p, q) in pos:
            off[(p, q)] = total
            r = DC.rank(p, q)
            labs.extend((p, q, t) for t in range(r))
            total += r
        offsets[n] = off
        ranks[n] = total
        labels[n] = labs
    bounds = {}
    for n in range(1, hi + 1):
        ent = {}
        for (p, q) in positions[n]:
            base = offsets[n][(p, q)]
            if p >= 1 and (p - 1, q) in offsets[n - 1]:
                tgt = offsets[n - 1][(p - 1, q)]
                for (i, j), v in DC.dh(p, q).entries.items():
                    ent[(tgt + i, base + j)] = v
            if q >= 1 and (p, q - 1) in offsets[n - 1]:
                tgt = offsets[n - 1][(p, q - 1)]
                sign = -1 if p % 2 else 1
                for (i, j), v in DC.dv(p, q).entries.items():
                    ent[(tgt + i, base + j)] = sign * v
        bounds[n] = SparseIntMatrix(ranks.get(n - 1, 0), ranks[n], ent)
    return ChainComplex(
        ranks, bounds, exact_top=DC.exact_p and DC.exact_q, labels=labels
    )


# ---------------------------------------------------------------------------
# unit-pivot reduction (preserves homology; tracks chain-level transport)


class ReducedComplex:
    """Outcome of eliminating unit pivots from a chain complex.

    Keeps the reduced boundary matrices (dict-of-dicts keyed by original
    basis ids) and, when tracking, a log that lets chains be projected to
    the core and core chains be lifted back.
    """

    def __init__(self, complex_, rows, cols, alive, log):
        self.complex = complex_
        self._rows = rows
        self._cols = cols
        self._alive = alive
        self.log = log
        self._core_index = {
            n: {b: t for t, b in enumerate(sorted(ids))}
            for n, ids in alive.items()
        }
        self._core_list = {n: sorted(ids) for n, ids in alive.items()}

    def core_rank(self, n):
        return len(self._alive.get(n, ()))

    def core_boundary_dense(self, n):
        """Dense core boundary C_n -> C_{n-1} in sorted-id coordinates."""
        src_idx = self._core_index.get(n, {})
        tgt = self._core_list.get(n - 1, [])
        tgt_idx = {b: i for i, b in enumerate(tgt)}
        M = [[0] * len(src_idx) for _ in tgt]
        for i, r in self._rows.get(n, {}).items():
            for j, v in r.items():
                M[tgt_idx[i]][src_idx[j]] = v
        return M

    def core_homology(self, n):
        """Homology group at degree n from the core matrices."""
        rn = self.core_rank(n)
        inv_n = self._core_invariants(n)
        inv_n1 = self._core_invariants(n + 1)
        rank_dn = len(inv_n)
        rank_dn1 = len(inv_n1)
        betti = rn - rank_dn - rank_dn1
        torsion = tuple(d for d in inv_n1 if d > 1)
        return HomologyGroup(n, betti, torsion)

    def _core_invariants(self, n):
        rows = self._rows.get(n)
        if not rows:
            return []
        ent = {}
        for i, r in rows.items():
            for j, v in r.items():
                ent[(i, j)] = v
        if not ent:
            return []
        live_r = sorted({i for i, _ in ent})
        live_c = sorted({j for _, j in ent})
        ri = {i: a for a, i in enumerate(live_r)}
        ci = {j: b for b, j in enumerate(live_c)}
        dense = [[0] * len(live_c) for _ in live_r]
        for (i, j), v in ent.items():
            dense[ri[i]][ci[j]] = v
        return snf_invariants_dense(dense)

    # --- chain transport -------------------------------------------------

    def project(self, n, vec):
        """Push an original-coordinates chain at degree n into the core."""
        v = {k: x for k, x in vec.items() if x}
        for rec in self.log:
            m, i, j, eps, row, col = rec
            if m == n:
                v.pop(j, None)
            elif m == n + 1:
                xi = v.pop(i, 0)
                if xi:
                    for l, b in col:
                        w = v.get(l, 0) - xi * eps * b
                        if w:
                            v[l] = w
                        else:
                            v.pop(l, None)
        return v

    def lift(self, n, vec):
        """Lift a core chain at degree n back to original coordinates."""
        v = {k: x for k, x in vec.items() if x}
        for rec in reversed(self.log):
            m, i, j, eps, row, col = rec
            if m == n:
                s = 0
                for k, a in row:
                    xk = v.get(k)
                    if xk:
                        s += a * xk
                if s:
                    v[j] = -eps * s
            elif m == n + 1:
                v.setdefault(i, 0)
        return {k: x for k, x in v.items() if x}

    def core_coords(self, n, vec):
        idx = self._core_index.get(n, {})
        out = [0] * len(idx)
        for k, x in vec.items():
            out[idx[k]] = x
        return out

    def from_core_coords(self, n, coords):
        lst = self._core_list.get(n, [])
        return {lst[t]: c for t, c in enumerate(coords) if c}


def morse_reduce(complex_, track=False):
    """Eliminate +-1 pivots across all boundary matrices of a complex.

    Each elimination splits off an acyclic two-term subcomplex, so the
    core has the same homology.  With track=True the elimination log is
    kept so chains can be moved between the original complex and the core.
    """
    rows = {}
    cols = {}
    alive = {
        n: set(range(complex_.rank(n)))
        for n in range(complex_.lo, complex_.hi + 1)
    }
    for n in range(complex_.lo + 1, complex_.hi + 1):
        rn = {}
        cn = {}
        for (i, j), v in complex_.boundary(n).entries.items():
            rn.setdefault(i, {})[j] = v
            cn.setdefault(j, {})[i] = v
        rows[n] = rn
        cols[n] = cn
    log = []
    units = []
    for n, rn in rows.items():
        for i, r in rn.items():
            for j, v in r.items():
                if v in (1, -1):
                    units.append((n, i, j))
    while units:
        n, i, j = units.pop()
        rn = rows.get(n, {})
        cn = cols.get(n, {})
        v = rn.get(i, {}).get(j)
        if v not in (1, -1):
            continue
        row = rn.pop(i)
        del row[j]
        col = cn.pop(j)
        del col[i]
        for jj in row:
            cn[jj].pop(i, None)
        for ii in col:
            rn[ii].pop(j, None)
        if track:
            log.append(
                (n, i, j, v, tuple(row.items()), tuple(col.items()))
            )
        # Schur update on the remaining block of d_n
        if row and col:
            for ii, b in col.items():
                rii = rn.setdefault(ii, {})
                for jj, a in row.items():
                    w = rii.get(jj, 0) - a * b * v
                    if w:
                        rii[jj] = w
                        cn.setdefault(jj, {})[ii] = w
                        if w in (1, -1):
                            units.append((n, ii, jj))
                    else:
                        rii.pop(jj, None)
                        cn.get(jj, {}).pop(ii, None)
        # remove the two cells; neighbours only lose a row/column
        alive[n].discard(j)
        alive[n - 1].discard(i)
        up = rows.get(n + 1)
        if up is not None:
            r_up = up.pop(j, None)
            if r_up:
                cup = cols[n + 1]
                for jj in r_up:
                    c = cup.get(jj)
                    if c:
                        c.pop(j, None)
        down = cols.get(n - 1)
        if down is not None:
            c_down = down.pop(i, None)
            if c_down:
                rdown = rows[n - 1]
                for ii in c_down:
                    r = rdown.get(ii)
                    if r:
                        r.pop(i, None)
    for n in list(rows):
        rows[n] = {i: r for i, r in rows[n].items() if r}
    return ReducedComplex(complex_, rows, cols, alive, log)


class HomologyBasis:
    """Homology at one degree with explicit generating cycles.

    generators() returns cycles in the original basis; classify(vec) maps
    any cycle to its coordinates in the Smith presentation of H_n.
    """

    def __init__(self, complex_, reduced, degree):
        self.complex = complex_
        self.degree = degree
        self._red = reduced
        n = degree
        rows_n = reduced._rows.get(n, {})
        core_n = reduced._core_list.get(n, [])
        core_n1 = reduced._core_list.get(n + 1, [])
        idx_n = reduced._core_index.get(n, {})
        # kernel of the core boundary at degree n
        tgt = reduced._core_list.get(n - 1, [])
        tgt_idx = {b: t for t, b in enumerate(tgt)}
        M = [[0] * len(core_n) for _ in tgt]
        for i, r in rows_n.items():
            for j, v in r.items():
                M[tgt_idx[i]][idx_n[j]] = v
        if core_n:
            K = kernel_basis(M, len(tgt), len(core_n)) if tgt else [
                [1 if a == b else 0 for a in range(len(core_n))]
                for b in range(len(core_n))
            ]
        else:
            K = []
        # image of the core boundary at degree n+1, in core_n coordinates
        rows_n1 = reduced._rows.get(n + 1, {})
        den = []
        for j in core_n1:
            colvec = [0] * len(core_n)
            nonzero = False
            for i, r in rows_n1.items():
                v = r.get(j)
                if v:
                    colvec[idx_n[i]] = v
                    nonzero = True
            if nonzero:
                den.append(colvec)
        self._subq = Subquotient(len(core_n), K, den)
        self.group = self._subq.group
        self.homology_group = HomologyGroup(n, self.group.free_rank, self.group.torsion)

    def generators(self):
        """Generating cycles in original coordinates (sparse dicts)."""
        out = []
        for g in self._subq.gens:
            core_vec = self._red.from_core_coords(self.degree, g)
            out.append(self._red.lift(self.degree, core_vec))
        return out

    def classify(self, vec):
        """Smith coordinates of the class of a cycle (sparse dict input)."""
        bn = self.complex.boundary(self.degree)
        img = bn.apply(vec)
        if img:
            raise ValueError("vector is not a cycle")
        core = self._red.project(self.degree, vec)
        coords = self._red.core_coords(self.degree, core)
        return self._subq.classify(coords)

    def zero_coords(self):
        return tuple([0] * self.group.ngens)


def induced_map(f, source_basis, target_basis):
    """GroupHom induced on homology by a chain map at one degree."""
    n = source_basis.degree
    if target_basis.degree != n:
        raise ValueError("degree mismatch")
    cols = []
    for gen in source_basis.generators():
        img = f.mat(n).apply(gen)
        cols.append(list(target_basis.classify(img)))
    mat = [
        [cols[j][i] for j in range(len(cols))]
        for i in range(target_basis.group.ngens)
    ]
    return GroupHom(source_basis.group, target_basis.group, mat)
