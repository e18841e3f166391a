"""Symbol algebras N with normalized trace and densities living in them.

Each algebra is realized as a set of D x D matrices with tau = tr / D, and
carries an orthonormal basis for L2(N, tau).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..groups import FiniteGroup, left_regular
from ..matcore import INF, RandomSource, dag, herm, lp_norm, random_density, unit


class SymbolError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SymbolAlgebra:
    kind: str  # diagonal | group_algebra | full_matrix | crossed_local
    n: int
    group: FiniteGroup | None = None

    @property
    def rep_dim(self):
        return self.n * self.n if self.kind == "crossed_local" else self.n

    @cached_property
    def basis(self):
        """Orthonormal basis for <a, b> = tau(a^* b)."""
        d, n = self.rep_dim, self.n
        if self.kind == "diagonal":
            return [np.sqrt(n) * unit(n, k, k) for k in range(n)]
        if self.kind == "full_matrix":
            return [np.sqrt(n) * unit(n, a, b) for a in range(n) for b in range(n)]
        if self.kind == "group_algebra":
            return [left_regular(self.group, g) for g in range(n)]
        if self.kind == "crossed_local":
            lam = [left_regular(self.group, h) for h in range(n)]
            # ordered (h, g) -> sqrt(n) lambda(h) (x) e_gg
            return [np.sqrt(n) * np.kron(lam[h], unit(n, g, g)) for h in range(n) for g in range(n)]
        raise SymbolError(f"unknown symbol algebra {self.kind!r}")

    @property
    def dim(self):
        return len(self.basis)

    def tau(self, a):
        return complex(np.trace(a)) / self.rep_dim

    def coords(self, a):
        """Coefficients tau(b_k^* a) in the orthonormal basis."""
        b = np.stack(self.basis)
        return np.einsum("kij,ij->k", b.conj(), a) / self.rep_dim

    def from_coords(self, c):
        return np.einsum("k,kij->ij", c, np.stack(self.basis))

    def contains(self, a, tol=1e-9):
        return np.abs(self.from_coords(self.coords(a)) - a).max() <= tol * max(1.0, np.abs(a).max())

    def label(self):
        g = f",{self.group.name}" if self.group is not None else ""
        return f"{self.kind}({self.n}{g})"


def diagonal(n):
    return SymbolAlgebra("diagonal", n)


def full_matrix(n):
    return SymbolAlgebra("full_matrix", n)


def group_algebra(g: FiniteGroup):
    return SymbolAlgebra("group_algebra", g.order, g)


def crossed_local(g: FiniteGroup):
    return SymbolAlgebra("crossed_local", g.order, g)


@dataclass(frozen=True, eq=False)
class SymbolDensity:
    algebra: SymbolAlgebra
    data: np.ndarray  # D x D matrix in the algebra's realization

    def __post_init__(self):
        a = np.asarray(self.data, dtype=complex)
        object.__setattr__(self, "data", a)
        d = self.algebra.rep_dim
        if a.shape != (d, d):
            raise SymbolError(f"density shape {a.shape} does not fit {self.algebra.label()}")
        if np.abs(a - dag(a)).max() > 1e-10:
            raise SymbolError("density is not self-adjoint")
        if not self.algebra.contains(a):
            raise SymbolError(f"density does not lie in {self.algebra.label()}")
        if np.linalg.eigvalsh(herm(a)).min() < -1e-10:
            raise SymbolError("density is not positive")
        if abs(self.algebra.tau(a) - 1) > 1e-10:
            raise SymbolError(f"tau(f) = {self.algebra.tau(a).real:.12g}, expected 1")

    @cached_property
    def eigenvalues(self):
        return np.clip(np.linalg.eigvalsh(herm(self.data)), 0.0, None)

    def norm(self, p):
        """||f||_p = tau(|f|^p)^(1/p)."""
        lam = self.eigenvalues
        if p == INF:
            return float(lam.max())
        return lp_norm(lam, p) / self.algebra.rep_dim ** (1.0 / p)

    def tau_flnf(self):
        lam = self.eigenvalues
        lam = lam[lam > 1e-14]
        return float(np.sum(lam * np.log(lam)) / self.algebra.rep_dim)

    def sqrt(self):
        w, v = np.linalg.eigh(herm(self.data))
        return (v * np.sqrt(np.clip(w, 0.0, None))) @ dag(v)


def from_weights(alg: SymbolAlgebra, w):
    """Diagonal density from weights summing to n."""
    if alg.kind != "diagonal":
        raise SymbolError("weights describe diagonal symbols only")
    w = np.asarray(w, dtype=float).reshape(-1)
    if (w < 0).any():
        raise SymbolError("negative weights")
    return SymbolDensity(alg, np.diag(w).astype(complex))


def from_group_coeffs(alg: SymbolAlgebra, c):
    """sum_g c(g) lambda(g), with c indexed by group element."""
    if alg.kind != "group_algebra":
        raise SymbolError("coefficients describe group-algebra symbols only")
    c = np.asarray(c, dtype=complex).reshape(-1)
    return SymbolDensity(alg, alg.from_coords(c))


def group_coeffs(f: SymbolDensity):
    return f.algebra.coords(f.data)


def uniform(alg: SymbolAlgebra):
    return SymbolDensity(alg, np.eye(alg.rep_dim, dtype=complex))


def point(alg: SymbolAlgebra):
    """A minimal-projection density: the most concentrated symbol."""
    d = alg.rep_dim
    if alg.kind in ("diagonal", "full_matrix"):
        return SymbolDensity(alg, d * unit(d, 0, 0))
    if alg.kind == "group_algebra":
        # n times the projection onto the constant vector
        return SymbolDensity(alg, sum(alg.basis))
    if alg.kind == "crossed_local":
        n = alg.n
        ones = sum(left_regular(alg.group, h) for h in range(n))
        return SymbolDensity(alg, n * np.kron(ones, unit(n, 0, 0)))
    raise SymbolError(alg.kind)


def _positive_group_element(g: FiniteGroup, rng: RandomSource):
    lam = [left_regular(g, h) for h in range(g.order)]
    a = rng.ginibre(g.order, 1)[:, 0]
    x = sum(a[h] * lam[h] for h in range(g.order))
    return x @ dag(x)


def random_symbol(alg: SymbolAlgebra, rng: RandomSource):
    d, n = alg.rep_dim, alg.n
    if alg.kind == "diagonal":
        w = rng.gen.exponential(size=n)
        return from_weights(alg, n * w / w.sum())
    if alg.kind == "full_matrix":
        return SymbolDensity(alg, n * random_density(n, rng))
    if alg.kind == "group_algebra":
        x = _positive_group_element(alg.group, rng)
        return SymbolDensity(alg, herm(x / alg.tau(x).real))
    if alg.kind == "crossed_local":
        w = rng.gen.exponential(size=n)
        w = n * w / w.sum()
        blocks = []
        for g in range(n):
            x = _positive_group_element(alg.group, rng)
            x = x / (np.trace(x).real / n)  # tau_G(x) = 1
            blocks.append(w[g] * np.kron(x, unit(n, g, g)))
        return SymbolDensity(alg, herm(sum(blocks)))
    raise SymbolError(alg.kind)


def parse_symbol(alg: SymbolAlgebra, spec):
    """Preset name ('uniform', 'point', 'random:SEED') or explicit data."""
    if isinstance(spec, str):
        s = spec.strip().lower()
        if s == "uniform":
            return uniform(alg)
        if s == "point":
            return point(alg)
        if s.startswith("random:") or (s.startswith("random(") and s.endswith(")")):
            seed = int(s[7:].rstrip(")"))
            return random_symbol(alg, RandomSource(seed))
        raise SymbolError(f"unknown symbol preset {spec!r}")
    arr = np.asarray(spec, dtype=complex)
    if arr.ndim == 1:
        if alg.kind == "diagonal":
            return from_weights(alg, arr.real)
        if alg.kind == "group_algebra":
            return from_group_coeffs(alg, arr)
        raise SymbolError("vector symbol data needs a diagonal or group algebra")
    return SymbolDensity(alg, arr)
