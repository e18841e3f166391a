"""Finite groups from Cayley tables, regular representations, irrep dimensions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .matcore import RandomSource, eigh


class GroupError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteGroup:
    name: str
    cayley: np.ndarray  # cayley[a, b] = index of a*b
    labels: tuple

    def __post_init__(self):
        t = np.asarray(self.cayley, dtype=int)
        object.__setattr__(self, "cayley", t)
        _validate_table(t)
        if len(self.labels) != t.shape[0]:
            raise GroupError("label count does not match group order")

    @property
    def order(self):
        return self.cayley.shape[0]

    @property
    def identity(self):
        return int(np.flatnonzero((self.cayley == np.arange(self.order)).all(axis=1))[0])

    @property
    def inverse(self):
        e = self.identity
        return np.array([int(np.flatnonzero(self.cayley[g] == e)[0]) for g in range(self.order)])

    def mul(self, a, b):
        return int(self.cayley[a, b])

    def inv(self, a):
        return int(self.inverse[a])

    def is_abelian(self):
        return bool((self.cayley == self.cayley.T).all())

    def conjugacy_classes(self):
        inv = self.inverse
        seen, classes = set(), []
        for g in range(self.order):
            if g in seen:
                continue
            cls = sorted({int(self.cayley[self.cayley[h, g], inv[h]]) for h in range(self.order)})
            seen.update(cls)
            classes.append(cls)
        return classes


def _validate_table(t):
    if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 1:
        raise GroupError("Cayley table must be a nonempty square array")
    n = t.shape[0]
    full = np.arange(n)
    if ((t < 0) | (t >= n)).any():
        raise GroupError("Cayley table entries out of range")
    for i in range(n):
        if not (np.array_equal(np.sort(t[i]), full) and np.array_equal(np.sort(t[:, i]), full)):
            raise GroupError("Cayley table is not a Latin square")
    if n <= 24:
        a = t[t, :]  # a[x, y, z] = (x*y)*z
        b = t[:, t]  # b[x, y, z] = x*(y*z)
        if not np.array_equal(a, b):
            raise GroupError("Cayley table is not associative")
    else:
        rng = np.random.default_rng(0)
        x, y, z = rng.integers(0, n, size=(3, 10_000))
        if not np.array_equal(t[t[x, y], z], t[x, t[y, z]]):
            raise GroupError("Cayley table is not associative")
    ids = np.flatnonzero((t == full).all(axis=1))
    if len(ids) != 1 or not (t[:, ids[0]] == full).all():
        raise GroupError("Cayley table has no two-sided identity")


def _from_elements(name, elems, mul, label):
    """Build a table from hashable elements listing the identity first."""
    index = {e: i for i, e in enumerate(elems)}
    n = len(elems)
    table = np.empty((n, n), dtype=int)
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            table[i, j] = index[mul(a, b)]
    return FiniteGroup(name, table, tuple(label(e) for e in elems))


def cyclic(n):
    if n < 1:
        raise GroupError("cyclic group order must be positive")
    return _from_elements(f"Z{n}", list(range(n)), lambda a, b: (a + b) % n, str)


def dihedral(n):
    """Symmetries of the n-gon, order 2n.  Rotations come first, then reflections."""
    if n < 1:
        raise GroupError("dihedral parameter must be positive")
    # (k, s) represents r^k s^s with s r = r^{-1} s
    elems = [(k, s) for s in (0, 1) for k in range(n)]

    def mul(a, b):
        k1, s1 = a
        k2, s2 = b
        return ((k1 + (-k2 if s1 else k2)) % n, (s1 + s2) % 2)

    def label(e):
        k, s = e
        return ("r%d" % k if k else "") + ("s" if s else "") or "e"

    return _from_elements(f"D{2 * n}", elems, mul, label)


def _cycle_label(perm):
    n, seen, parts = len(perm), set(), []
    for i in range(n):
        if i in seen or perm[i] == i:
            seen.add(i)
            continue
        cyc, j = [], i
        while j not in seen:
            seen.add(j)
            cyc.append(j + 1)
            j = perm[j]
        parts.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(parts) or "e"


def symmetric(n):
    if n < 1:
        raise GroupError("symmetric group degree must be positive")
    if n > 5:
        raise GroupError("symmetric(n) is limited to n <= 5")
    elems = list(itertools.permutations(range(n)))  # identity is first

    def mul(a, b):  # (a*b)(i) = a(b(i))
        return tuple(a[b[i]] for i in range(n))

    return _from_elements(f"S{n}", elems, mul, _cycle_label)


def quaternion():
    # unit quaternions as (sign, axis) with axis in 1, i, j, k
    axes = ["1", "i", "j", "k"]
    prod = {
        ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
        ("i", "1"): (1, "i"), ("i", "i"): (-1, "1"), ("i", "j"): (1, "k"), ("i", "k"): (-1, "j"),
        ("j", "1"): (1, "j"), ("j", "i"): (-1, "k"), ("j", "j"): (-1, "1"), ("j", "k"): (1, "i"),
        ("k", "1"): (1, "k"), ("k", "i"): (1, "j"), ("k", "j"): (-1, "i"), ("k", "k"): (-1, "1"),
    }
    elems = [(s, a) for s in (1, -1) for a in axes]

    def mul(a, b):
        s, ax = prod[(a[1], b[1])]
        return (a[0] * b[0] * s, ax)

    def label(e):
        return ("-" if e[0] < 0 else "") + e[1]

    return _from_elements("Q8", elems, mul, label)


def semidirect_shift(d, l):
    """Z_d^l with Z_l acting by cyclic shift of coordinates; order d^l * l."""
    if d < 1 or l < 1:
        raise GroupError("semidirect parameters must be positive")
    elems = [(x, j) for j in range(l) for x in itertools.product(range(d), repeat=l)]

    def shift(x, j):
        return tuple(x[(i + j) % l] for i in range(l))

    def mul(a, b):
        (x, j), (y, k) = a, b
        sy = shift(y, j)
        return (tuple((x[i] + sy[i]) % d for i in range(l)), (j + k) % l)

    def label(e):
        return "".join(map(str, e[0])) + ":" + str(e[1])

    return _from_elements(f"Z{d}^{l}xZ{l}", elems, mul, label)


def from_cayley(table, name="custom"):
    t = np.asarray(table, dtype=int)
    _validate_table(t)
    return FiniteGroup(name, t, tuple(str(i) for i in range(t.shape[0])))


def read_cayley(path):
    """Read a table file: n on the first line, then n rows of 0-based indices."""
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 1:
        raise GroupError("first line of a Cayley file must hold the order")
    n = int(lines[0][0])
    rows = lines[1:]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise GroupError(f"expected {n} rows of {n} entries")
    return from_cayley([[int(v) for v in r] for r in rows], name=Path(path).stem)


def construct_group(kind, *params):
    builders = {
        "cyclic": cyclic,
        "dihedral": dihedral,
        "symmetric": symmetric,
        "quaternion": quaternion,
        "semidirect_shift": semidirect_shift,
        "from_cayley": from_cayley,
    }
    if kind not in builders:
        raise GroupError(f"unknown group kind {kind!r}")
    return builders[kind](*params)


def parse_group(text):
    """Parse short names: Z6, D8 (order 8), S3, Q8, SD2,3 (semidirect), cayley:PATH."""
    t = text.strip()
    try:
        if t.startswith("cayley:"):
            return read_cayley(t[len("cayley:"):])
        if t.upper() == "Q8":
            return quaternion()
        if t.upper().startswith("SD"):
            d, l = t[2:].split(",")
            return semidirect_shift(int(d), int(l))
        head, num = t[0].upper(), int(t[1:])
    except (ValueError, IndexError) as exc:
        raise GroupError(f"cannot parse group {text!r}") from exc
    if head == "Z":
        return cyclic(num)
    if head == "D":
        if num % 2:
            raise GroupError("dihedral groups are named by their (even) order, e.g. D8")
        return dihedral(num // 2)
    if head == "S":
        return symmetric(num)
    raise GroupError(f"cannot parse group {text!r}")


def _perm_matrix(targets):
    n = len(targets)
    m = np.zeros((n, n), dtype=complex)
    m[targets, np.arange(n)] = 1.0
    return m


def left_regular(g: FiniteGroup, a):
    """lambda(a) e_h = e_{a h}."""
    return _perm_matrix(g.cayley[a, :])


def right_regular(g: FiniteGroup, a):
    """r(a) e_h = e_{h a^-1}."""
    return _perm_matrix(g.cayley[:, g.inverse[a]])


def conjugation(g: FiniteGroup, a):
    """W_a e_h = e_{a h a^-1}."""
    inv = g.inverse[a]
    return _perm_matrix(g.cayley[g.cayley[a, :], inv])


def regular_representations(g: FiniteGroup, elem):
    if not 0 <= elem < g.order:
        raise GroupError("element index out of range")
    return left_regular(g, elem), right_regular(g, elem), conjugation(g, elem)


@dataclass(frozen=True)
class IrrepProfile:
    dims: tuple  # sorted ascending

    @property
    def d_max(self):
        return max(self.dims)

    def burnside_ok(self, order):
        return sum(d * d for d in self.dims) == order


def cluster_multiplicities(values, tol=1e-7):
    """Sizes of clusters of sorted reals whose consecutive gaps are <= tol."""
    v = np.sort(np.asarray(values, dtype=float))
    sizes, run = [], 1
    for a, b in zip(v[:-1], v[1:]):
        if b - a <= tol:
            run += 1
        else:
            sizes.append(run)
            run = 1
    sizes.append(run)
    return sizes


class IrrepError(RuntimeError):
    pass


def irrep_dimensions(g: FiniteGroup, rng: RandomSource, retries=8, tol=1e-7):
    """Irrep dimensions from eigenvalue multiplicities of a generic self-adjoint
    element of the group algebra in the left regular representation.
    """
    n = g.order
    inv = g.inverse
    lam = [left_regular(g, a) for a in range(n)]
    for _ in range(retries + 1):
        c = rng.ginibre(n, 1)[:, 0]
        c = 0.5 * (c + np.conj(c[inv]))  # c(g^-1) = conj c(g)
        a = sum(c[k] * lam[k] for k in range(n))
        # scale so the cluster tolerance is relative to O(1) spectra
        sizes = cluster_multiplicities(eigh(a).eigenvalues / max(1.0, np.abs(c).sum()), tol)
        dims = []
        for d in sorted(set(sizes)):
            count = sizes.count(d)
            if count % d:
                break
            dims += [d] * (count // d)
        else:
            prof = IrrepProfile(tuple(sorted(dims)))
            if prof.burnside_ok(n):
                return prof
    raise IrrepError(f"irrep clustering failed for {g.name} after {retries} retries")
