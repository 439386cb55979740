"""Exact checks of Schur-type averaging identities on finite groups.

For a finite group the Haar integral is the normalised sum over elements,
so the averaging identities for irreducible unitary representations hold
to machine precision. The catalog contains the cyclic groups Z/M and the
dihedral group of order 8.
"""
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

SCHUR_TOL = 1e-12
IRREDUCIBLE_RTOL = 1e-6
UNITARY_TOL = 1e-12


def inner(x, y):
    """<x, y> = sum_i x_i conj(y_i); linear in the first slot."""
    return np.vdot(y, x)


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    name: str
    cayley: np.ndarray
    identity: int = 0
    inverse: np.ndarray = field(init=False)

    def __post_init__(self):
        table = np.asarray(self.cayley, dtype=np.int64)
        n = table.shape[0]
        if table.shape != (n, n):
            raise ValueError("Cayley table must be square")
        ref = np.arange(n)
        for row, col in zip(table, table.T):
            if not (np.array_equal(np.sort(row), ref) and np.array_equal(np.sort(col), ref)):
                raise ValueError("Cayley table is not a Latin square")
        e = self.identity
        if not (np.array_equal(table[e], ref) and np.array_equal(table[:, e], ref)):
            raise ValueError("identity element does not act as identity")
        inv = np.argmax(table == e, axis=1)
        if n <= 32:
            # (ab)c == a(bc) for every triple
            left = table[table, :]          # left[a, b, c] = (ab)c
            right = table[:, table]         # right[a, b, c] = a(bc)
            if not np.array_equal(left, right):
                raise ValueError("Cayley table is not associative")
        table.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "cayley", table)
        object.__setattr__(self, "inverse", inv)

    @property
    def order(self):
        return self.cayley.shape[0]

    def mul(self, a, b):
        return int(self.cayley[a, b])


@dataclass(frozen=True, eq=False)
class UnitaryRep:
    """A unitary matrix per group element, with a catalog label."""

    group: FiniteGroup
    matrices: np.ndarray
    label: int = 0
    name: str = ""

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=np.complex128)
        if mats.ndim != 3 or mats.shape[0] != self.group.order or mats.shape[1] != mats.shape[2]:
            raise ValueError("need one square matrix per group element")
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @property
    def dim(self):
        return self.matrices.shape[1]

    def act(self, v):
        """gamma(v) for every element gamma; shape (|G|, dim)."""
        v = self._vec(v)
        return self.matrices @ v

    def _vec(self, v):
        v = np.atleast_1d(np.asarray(v, dtype=np.complex128))
        if v.shape != (self.dim,):
            raise ValueError(f"vector of length {v.shape} does not match rep dimension {self.dim}")
        return v

    def validate(self, tol=UNITARY_TOL):
        """Raise ValueError unless unitary, homomorphic and identity-preserving."""
        G = self.group
        eye = np.eye(self.dim)
        if np.abs(self.matrices[G.identity] - eye).max() > tol:
            raise ValueError(f"{self.name}: rho(identity) != I")
        gram = np.einsum("gji,gjk->gik", self.matrices.conj(), self.matrices)
        if np.abs(gram - eye).max() > tol:
            raise ValueError(f"{self.name}: not unitary")
        prod = np.einsum("aij,bjk->abik", self.matrices, self.matrices)
        if np.abs(prod - self.matrices[G.cayley]).max() > tol:
            raise ValueError(f"{self.name}: not a homomorphism")
        return self


def _same_group(rep1, rep2):
    if rep1.group is rep2.group:
        return True
    return np.array_equal(rep1.group.cayley, rep2.group.cayley)


def schur_bilinear_average(rep, x, y, v, w):
    """(1/|G|) sum_g <g(x), y> conj(<g(v), w>)."""
    y = rep._vec(y)
    w = rep._vec(w)
    a = rep.act(x) @ y.conj()
    b = rep.act(v) @ w.conj()
    return complex(np.mean(a * b.conj()))


def schur_prediction(rep, x, y, v, w):
    """Right-hand side for an irreducible rep: <x, v> conj(<y, w>) / dim."""
    x, y, v, w = (rep._vec(u) for u in (x, y, v, w))
    return complex(inner(x, v) * np.conj(inner(y, w)) / rep.dim)


def cross_rep_average(rep1, rep2, v1, w1, v2, w2):
    """(1/|G|) sum_g <g(v1), w1> conj(<g(v2), w2>) across two reps of one group."""
    if not _same_group(rep1, rep2):
        raise ValueError("representations belong to different groups")
    w1 = rep1._vec(w1)
    w2 = rep2._vec(w2)
    a = rep1.act(v1) @ w1.conj()
    b = rep2.act(v2) @ w2.conj()
    return complex(np.mean(a * b.conj()))


def characters(rep):
    return np.trace(rep.matrices, axis1=1, axis2=2)


def character_norm(rep):
    """sum_g |Tr rho(g)|^2; equals |G| exactly when rep is irreducible."""
    chi = characters(rep)
    return float(np.sum(np.abs(chi) ** 2))


def character_inner(rep1, rep2):
    """(1/|G|) sum_g chi1(g) conj(chi2(g)): 1 for isomorphic irreps, 0 otherwise."""
    if not _same_group(rep1, rep2):
        raise ValueError("representations belong to different groups")
    return complex(np.mean(characters(rep1) * characters(rep2).conj()))


def coefficient_orthogonality(rep, v):
    """Matrix M_ij = sum_g <g(v), b_i> conj(<g(v), b_j>) in the standard basis.

    For an irreducible rep this is (|G| / dim) * |v|^2 * I.
    """
    gv = rep.act(v)
    return gv.T @ gv.conj()


def check_irreducible(rep):
    n = rep.group.order
    return abs(character_norm(rep) - n) <= IRREDUCIBLE_RTOL * n


def direct_sum(rep1, rep2, label=-1):
    if not _same_group(rep1, rep2):
        raise ValueError("representations belong to different groups")
    d1, d2 = rep1.dim, rep2.dim
    mats = np.zeros((rep1.group.order, d1 + d2, d1 + d2), dtype=np.complex128)
    mats[:, :d1, :d1] = rep1.matrices
    mats[:, d1:, d1:] = rep2.matrices
    return UnitaryRep(rep1.group, mats, label=label, name=f"{rep1.name}+{rep2.name}")


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CatalogEntry:
    group: FiniteGroup
    irreps: tuple

    @property
    def name(self):
        return self.group.name


def cyclic_group(M):
    a = np.arange(M)
    return FiniteGroup(f"Z{M}", (a[:, None] + a[None, :]) % M)


def cyclic_irreps(group):
    M = group.order
    k = np.arange(M)
    reps = []
    for j in range(M):
        mats = np.exp(2j * np.pi * j * k / M).reshape(M, 1, 1)
        reps.append(UnitaryRep(group, mats, label=j, name=f"chi{j}"))
    return reps


def dihedral_group(n=4):
    """Dihedral group of order 2n; element r^k s^f has index k + n f."""
    size = 2 * n
    table = np.empty((size, size), dtype=np.int64)
    for a in range(size):
        ka, fa = a % n, a // n
        for b in range(size):
            kb, fb = b % n, b // n
            k = (ka + (kb if fa == 0 else -kb)) % n
            table[a, b] = k + n * ((fa + fb) % 2)
    return FiniteGroup(f"D{n}", table)


def _from_generators(group, r, s, label, name):
    n = group.order // 2
    r = np.atleast_2d(np.asarray(r, dtype=np.complex128))
    s = np.atleast_2d(np.asarray(s, dtype=np.complex128))
    mats = []
    for f in range(2):
        for k in range(n):
            mats.append(np.linalg.matrix_power(r, k) @ np.linalg.matrix_power(s, f))
    return UnitaryRep(group, np.array(mats), label=label, name=name)


def d4_irreps(group):
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    ref = np.array([[1.0, 0.0], [0.0, -1.0]])
    return [
        _from_generators(group, 1, 1, 0, "A1"),
        _from_generators(group, 1, -1, 1, "A2"),
        _from_generators(group, -1, 1, 2, "B1"),
        _from_generators(group, -1, -1, 3, "B2"),
        _from_generators(group, rot, ref, 4, "E"),
    ]


def builtin_group_catalog():
    """Z/2, Z/3, Z/4, Z/8 with all characters, and D4 with its five irreps."""
    entries = []
    for M in (2, 3, 4, 8):
        g = cyclic_group(M)
        entries.append(CatalogEntry(g, tuple(r.validate() for r in cyclic_irreps(g))))
    d4 = dihedral_group(4)
    irreps = tuple(r.validate() for r in d4_irreps(d4))
    if sum(r.dim ** 2 for r in irreps) != d4.order:
        raise RuntimeError("D4 irreps fail the dimension-count identity")
    entries.append(CatalogEntry(d4, irreps))
    return entries


def catalog_by_name():
    return {e.name: e for e in builtin_group_catalog()}


# ---------------------------------------------------------------------------
# batch verification (drives the verify-group command)
# ---------------------------------------------------------------------------

@dataclass
class CheckRow:
    group: str
    identity: str
    reps: str
    max_error: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.max_error <= self.tolerance)


def random_vector(rng, dim):
    return rng.standard_normal(dim) + 1j * rng.standard_normal(dim)


def verify_entry(entry, trials=64, tol=SCHUR_TOL, seed=0):
    """Check the four identity families on every irrep (pair) of one group."""
    rng = np.random.default_rng(seed)
    rows = []
    n = entry.group.order
    for rep in entry.irreps:
        err = 0.0
        for _ in range(trials):
            x, y, v, w = (random_vector(rng, rep.dim) for _ in range(4))
            lhs = schur_bilinear_average(rep, x, y, v, w)
            rhs = schur_prediction(rep, x, y, v, w)
            scale = 1.0 + np.prod([np.linalg.norm(u) for u in (x, y, v, w)])
            err = max(err, abs(lhs - rhs) / scale)
        rows.append(CheckRow(entry.name, "schur", rep.name, err, tol))

        err = 0.0
        for _ in range(trials):
            v = random_vector(rng, rep.dim)
            m = coefficient_orthogonality(rep, v)
            target = n / rep.dim * np.vdot(v, v).real * np.eye(rep.dim)
            err = max(err, np.abs(m - target).max() / (1.0 + np.vdot(v, v).real))
        rows.append(CheckRow(entry.name, "coeff-orth", rep.name, err, tol))

        cn = character_norm(rep)
        rows.append(CheckRow(entry.name, "character", rep.name, abs(cn - n) / n, 1e-9))

    for rep1, rep2 in combinations(entry.irreps, 2):
        err = 0.0
        for _ in range(trials):
            v1, w1 = random_vector(rng, rep1.dim), random_vector(rng, rep1.dim)
            v2, w2 = random_vector(rng, rep2.dim), random_vector(rng, rep2.dim)
            err = max(err, abs(cross_rep_average(rep1, rep2, v1, w1, v2, w2)))
        rows.append(CheckRow(entry.name, "cross", f"{rep1.name}|{rep2.name}", err, tol))
    return rows
