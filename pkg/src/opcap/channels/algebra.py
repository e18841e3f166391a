"""Subalgebras M of M_m: block specs, commutants, conditional expectations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..groups import cluster_multiplicities
from ..matcore import RandomSource, dag, herm
from .core import Channel, channel_from_choi, make_channel


@dataclass(frozen=True)
class SubalgebraSpec:
    """M = sum_k M_{n_k} (x) 1_{m_k}, blocks laid out along the diagonal."""

    blocks: tuple  # of (n_k, m_k)

    def __post_init__(self):
        b = tuple((int(n), int(m)) for n, m in self.blocks)
        if not b or any(n < 1 or m < 1 for n, m in b):
            raise ValueError("every block needs n_k, m_k >= 1")
        object.__setattr__(self, "blocks", b)

    @property
    def ambient(self):
        return sum(n * m for n, m in self.blocks)

    @property
    def d_max(self):
        return max(n for n, _ in self.blocks)

    @property
    def dim(self):
        return sum(n * n for n, _ in self.blocks)

    @property
    def commutant_dim(self):
        return sum(m * m for _, m in self.blocks)

    @property
    def is_standard(self):
        return all(n == m for n, m in self.blocks)

    def offsets(self):
        out, o = [], 0
        for n, m in self.blocks:
            out.append(o)
            o += n * m
        return out

    def largest_block_vectors(self):
        """Orthonormal columns spanning C^{n_k} (x) e_1 in the largest block."""
        k = max(range(len(self.blocks)), key=lambda i: (self.blocks[i][0], -i))
        n, m = self.blocks[k]
        o = self.offsets()[k]
        v = np.zeros((self.ambient, n), dtype=complex)
        for i in range(n):
            v[o + i * m, i] = 1.0
        return v


def conditional_expectation(spec: SubalgebraSpec) -> Channel:
    """sum_k id_{n_k} (x) tr_{m_k}(.) 1/m_k on the diagonal blocks."""
    d = spec.ambient
    kraus = []
    for (n, m), o in zip(spec.blocks, spec.offsets()):
        for a in range(m):
            for b in range(m):
                k = np.zeros((d, d), dtype=complex)
                for i in range(n):
                    k[o + i * m + a, o + i * m + b] = 1.0 / np.sqrt(m)
                kraus.append(k)
    return make_channel(kraus, "conditional_expectation", {"blocks": spec.blocks})


def orthonormalize(mats, tol=1e-9):
    """Frobenius-orthonormal basis of span(mats)."""
    if not len(mats):
        return []
    v = np.stack([np.asarray(a).reshape(-1) for a in mats], axis=1)
    u, s, _ = np.linalg.svd(v, full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0])))
    d = int(round(np.sqrt(v.shape[0])))
    return [u[:, i].reshape(d, d) for i in range(r)]


def _generic_pair(mats, rng: RandomSource):
    """Two random self-adjoint elements of the *-algebra spanned by mats."""
    out = []
    for _ in range(2):
        c = rng.ginibre(len(mats), 1)[:, 0]
        a = np.einsum("k,kij->ij", c, np.stack(mats))
        out.append(herm(a + dag(a)))
    return out


def _eigen_clusters(h, tol):
    w, v = np.linalg.eigh(h)
    sizes = cluster_multiplicities(w / max(1.0, np.abs(w).max()), tol)
    out, i = [], 0
    for s in sizes:
        out.append(v[:, i:i + s])
        i += s
    return out


def commutant_basis(mats, rng: RandomSource | None = None, tol=1e-8):
    """Frobenius-orthonormal basis of {z : z a = a z for all a in span(mats)}.

    ``span(mats)`` must be closed under adjoints.  Two generic self-adjoint
    elements a, b generate the whole algebra, so their joint commutant
    suffices.  The commutant of a is block diagonal in its eigenbasis, which
    keeps the final null-space problem small.
    """
    rng = rng or RandomSource(0x5EED)
    a, b = _generic_pair(mats, rng)
    cands = []
    for vc in _eigen_clusters(a, tol):
        for i in range(vc.shape[1]):
            for j in range(vc.shape[1]):
                cands.append(np.outer(vc[:, i], vc[:, j].conj()))
    cands = np.stack(cands)
    comm = np.einsum("ij,tjk->tik", b, cands) - np.einsum("tij,jk->tik", cands, b)
    mat = comm.reshape(len(cands), -1).T
    _, s, vh = np.linalg.svd(mat, full_matrices=False)
    scale = max(1.0, s[0] if s.size else 1.0)
    rank = int(np.sum(s > tol * scale))
    null = vh[rank:].conj()  # rows are coefficient vectors
    return list(np.einsum("rt,tij->rij", null, cands))


def projection_choi(basis):
    """Choi matrix of x -> sum_k b_k tr(b_k^* x)."""
    b = np.stack(basis)
    d = b.shape[1]
    return np.einsum("kij,kab->iajb", b.conj(), b).reshape(d * d, d * d)


def projection_channel(basis, family="projection", rank=None) -> Channel:
    """Trace-preserving projection x -> sum_k b_k tr(b_k^* x) onto span(basis).

    ``basis`` must be Frobenius-orthonormal and span a unital *-algebra.
    ``rank`` is the Kraus rank if known (the dimension of the commutant).
    """
    d = basis[0].shape[0]
    return channel_from_choi(projection_choi(basis), d, d, family, rank=rank)


def expectation_onto_commutant(xs, rng: RandomSource | None = None) -> Channel:
    return projection_channel(commutant_basis(xs, rng), "conditional_expectation")


@dataclass(frozen=True)
class BlockStructure:
    """Numerically recovered block data of M = (span xs)'."""

    spec: SubalgebraSpec
    largest_block: np.ndarray  # m x d_M isometry onto C^{d_M} (x) v in a largest block


def infer_subalgebra(xs, rng: RandomSource | None = None, tol=1e-7) -> BlockStructure:
    """Blocks (n_k, m_k) of M, the commutant of the *-algebra spanned by xs.

    A generic self-adjoint a' in M' = sum 1_{n_k} (x) A_k has eigenspaces of
    dimension n_k, each of the form C^{n_k} (x) v.  A generic a in M has
    eigenspaces of dimension m_k.  Eigenspaces of the two overlap exactly
    when they sit in the same block, which groups them into blocks.
    """
    rng = rng or RandomSource(0x5EED)
    xs = [np.asarray(x) for x in xs]
    ap = _generic_pair(xs, rng)[0]
    mb = commutant_basis(xs, rng)
    a = _generic_pair(mb, rng)[0]

    ps, qs = _eigen_clusters(ap, tol), _eigen_clusters(a, tol)
    # union-find over primed eigenspaces, linked through shared unprimed ones
    parent = list(range(len(ps)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for q in qs:
        hit = [i for i, p in enumerate(ps) if np.linalg.norm(dag(p) @ q) > 1e-6]
        for i in hit[1:]:
            parent[find(i)] = find(hit[0])
    groups = {}
    for i in range(len(ps)):
        groups.setdefault(find(i), []).append(i)
    blocks = []
    for members in groups.values():
        n = ps[members[0]].shape[1]
        if any(ps[i].shape[1] != n for i in members):
            raise ValueError("inconsistent eigenspace dimensions while inferring blocks")
        blocks.append((n, len(members)))
    blocks.sort(key=lambda b: (-b[0], -b[1]))
    largest = max(ps, key=lambda p: p.shape[1])
    return BlockStructure(SubalgebraSpec(tuple(blocks)), largest)
