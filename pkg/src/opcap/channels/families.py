"""Concrete channel families.  Each has a spec builder (xs, ys, symbol algebra)
and a convenience constructor returning the channel directly.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..groups import FiniteGroup, conjugation, left_regular
from ..matcore import kron_all, unit
from .core import Channel, ChannelError, identity_channel, make_channel, partial_trace_channel
from .symbols import (
    SymbolDensity,
    crossed_local,
    diagonal,
    from_group_coeffs,
    from_weights,
    full_matrix,
    group_algebra,
)
from .vn import VNChannelSpec, vn_channel


# group Schur multipliers


def group_schur_spec(g: FiniteGroup):
    n = g.order
    xs = [unit(n, a, a) for a in range(n)]
    ys = [left_regular(g, a) for a in range(n)]
    return VNChannelSpec(tuple(xs), tuple(ys), group_algebra(g), "group_schur", {"group": g.name})


def multiplier_matrix(g: FiniteGroup, coeffs):
    """a[g, g'] = c(g^-1 g')."""
    c = np.asarray(coeffs, dtype=complex)
    inv = g.inverse
    return c[g.cayley[inv[:, None], np.arange(g.order)[None, :]]]


def group_schur(g: FiniteGroup, coeffs) -> Channel:
    """Schur-multiplier channel rho -> [c(g^-1 g')] * rho."""
    c = _coeff_vector(g, coeffs)
    a = multiplier_matrix(g, c)
    if np.abs(np.diag(a) - 1).max() > 1e-10:
        raise ChannelError("multiplier needs unit diagonal, i.e. c(e) = 1")
    if np.linalg.eigvalsh(0.5 * (a + a.conj().T)).min() < -1e-9:
        raise ChannelError("multiplier matrix is not PSD")
    f = from_group_coeffs(group_algebra(g), c)
    return vn_channel(group_schur_spec(g), f)


def _coeff_vector(g: FiniteGroup, coeffs):
    if isinstance(coeffs, dict):
        c = np.zeros(g.order, dtype=complex)
        for k, v in coeffs.items():
            idx = g.labels.index(k) if isinstance(k, str) else int(k)
            c[idx] = v
        return c
    return np.asarray(coeffs, dtype=complex)


# group random unitaries


def group_random_unitary_spec(g: FiniteGroup):
    n = g.order
    xs = [left_regular(g, a) for a in range(n)]
    ys = [unit(n, a, a) for a in range(n)]
    return VNChannelSpec(tuple(xs), tuple(ys), diagonal(n), "group_random_unitary", {"group": g.name})


def group_random_unitary(g: FiniteGroup, weights) -> Channel:
    """(1/|G|) sum_g f(g) lambda(g) rho lambda(g)^*, with sum f = |G|."""
    w = np.asarray(weights, dtype=float)
    if (w < 0).any():
        raise ChannelError("negative weights")
    if abs(w.sum() - g.order) > 1e-10:
        raise ChannelError(f"weights must sum to |G| = {g.order}")
    return vn_channel(group_random_unitary_spec(g), from_weights(diagonal(g.order), w))


# generalized Pauli


def shift_clock(n):
    x = np.roll(np.eye(n), 1, axis=0).astype(complex)  # X e_k = e_{k+1}
    z = np.diag(np.exp(2j * np.pi * np.arange(n) / n))
    return x, z


def weyl_operators(n):
    """X^i Z^j ordered by i*n + j."""
    x, z = shift_clock(n)
    mp = np.linalg.matrix_power
    return [mp(x, i) @ mp(z, j) for i in range(n) for j in range(n)]


def pauli_spec(n):
    xs = weyl_operators(n)
    ys = [unit(n * n, k, k) for k in range(n * n)]
    return VNChannelSpec(tuple(xs), tuple(ys), diagonal(n * n), "pauli", {"n": n})


def pauli_density(n, weights):
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size != n * n:
        raise ChannelError(f"Pauli weights need {n * n} entries")
    if (w < 0).any():
        raise ChannelError("negative weights")
    if abs(w.sum() - n * n) > 1e-8:
        raise ChannelError(f"Pauli weights must sum to n^2 = {n * n}")
    return from_weights(diagonal(n * n), w * (n * n) / w.sum())


def pauli(n, weights) -> Channel:
    return vn_channel(pauli_spec(n), pauli_density(n, weights))


# Clifford via Jordan-Wigner


_PX = np.array([[0, 1], [1, 0]], dtype=complex)
_PY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PZ = np.diag([1.0, -1.0]).astype(complex)


def clifford_generators(k):
    """C_1..C_2k on 2^k dims: C_{2j-1} = Z..Z X I..I, C_{2j} = Z..Z Y I..I."""
    if k < 1:
        raise ChannelError("need at least one mode")
    gens = []
    for j in range(k):
        for p in (_PX, _PY):
            gens.append(kron_all(*([_PZ] * j + [p] + [np.eye(2)] * (k - j - 1))))
    return gens


def clifford_subsets(k):
    """All subsets of [2k] in size-then-lexicographic order, empty set first."""
    return [s for r in range(2 * k + 1) for s in itertools.combinations(range(2 * k), r)]


def clifford_products(k):
    gens = clifford_generators(k)
    d = 2 ** k
    out = []
    for s in clifford_subsets(k):
        c = np.eye(d, dtype=complex)
        for i in s:
            c = c @ gens[i]
        out.append(c)
    return out


def clifford_spec(num_generators):
    if num_generators % 2:
        raise ChannelError("odd generator counts are not supported; use 2k generators on 2^k dims")
    k = num_generators // 2
    xs = clifford_products(k)
    ys = [unit(4 ** k, i, i) for i in range(4 ** k)]
    return VNChannelSpec(tuple(xs), tuple(ys), diagonal(4 ** k), "clifford", {"k": k})


def clifford(k, weights) -> Channel:
    """(1/4^k) sum_A f(A) C_A rho C_A^*, weights ordered as clifford_subsets(k)."""
    w = _subset_weights(k, weights)
    if (w < 0).any():
        raise ChannelError("negative weights")
    if abs(w.sum() - 4 ** k) > 1e-8:
        raise ChannelError(f"Clifford weights must sum to 4^k = {4 ** k}")
    return vn_channel(clifford_spec(2 * k), from_weights(diagonal(4 ** k), w))


def _subset_weights(k, weights):
    if isinstance(weights, dict):
        order = {s: i for i, s in enumerate(clifford_subsets(k))}
        w = np.zeros(4 ** k)
        for s, v in weights.items():
            w[order[tuple(sorted(s))]] = v
        return w
    return np.asarray(weights, dtype=float).reshape(-1)


# crossed products on C^n (x) C^n


def crossed_operators(g: FiniteGroup):
    """A_g = lambda(g) (x) W_g and B_h = 1 (x) e_hh."""
    n = g.order
    a = [np.kron(left_regular(g, x), conjugation(g, x)) for x in range(n)]
    b = [np.kron(np.eye(n), unit(n, h, h)) for h in range(n)]
    return a, b


def crossed_product_spec(g: FiniteGroup, case="local"):
    n = g.order
    a, b = crossed_operators(g)
    xs, ys = [], []
    if case == "local":
        lam = [left_regular(g, h) for h in range(n)]
        for x in range(n):
            for h in range(n):
                xs.append(a[x] @ b[h])
                ys.append(np.kron(lam[h], unit(n, x, x)))
        symbol = crossed_local(g)
    elif case == "charge":
        # symbol e_{gh, g}; the e_{hg, g} variant is not unitary for non-abelian G
        for x in range(n):
            for h in range(n):
                xs.append(a[x] @ b[h])
                ys.append(unit(n, g.mul(x, h), x))
        symbol = full_matrix(n)
    else:
        raise ChannelError(f"unknown crossed-product case {case!r}")
    return VNChannelSpec(tuple(xs), tuple(ys), symbol, f"crossed_{case}", {"group": g.name, "case": case})


def crossed_product(g: FiniteGroup, f: SymbolDensity, case="local") -> Channel:
    return vn_channel(crossed_product_spec(g, case), f)


# non-unital twirl followed by a Schur multiplier


def nonunital_spec(g: FiniteGroup):
    n = g.order
    xs, ys = [], []
    for x in range(n):
        for h in range(n):
            gh = g.mul(x, h)
            xs.append(unit(n, gh, h))
            ys.append(unit(n, x, gh))
    return VNChannelSpec(tuple(xs), tuple(ys), full_matrix(n), "nonunital", {"group": g.name})


def nonunital_twirl_schur(g: FiniteGroup, f: SymbolDensity) -> Channel:
    """rho -> f * ((1/|G|) sum_g lambda(g) rho lambda(g)^*)."""
    return vn_channel(nonunital_spec(g), f)


# standard channels


def dephasing(q):
    if not 0 <= q <= 1:
        raise ChannelError("dephasing parameter must lie in [0, 1]")
    p = (1 - q) / 2
    return make_channel([np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * _PZ], "dephasing", {"q": q})


def depolarizing_weights(d, q):
    w = np.full(d * d, 1.0 - q)
    w[0] = q * d * d + (1.0 - q)
    return w


def depolarizing(d, q):
    """q rho + (1 - q) tr(rho) I/d as a Pauli channel."""
    if not 0 <= q <= 1:
        raise ChannelError("depolarizing parameter must lie in [0, 1]")
    if d < 1:
        raise ChannelError("dimension must be positive")
    ch = pauli(d, depolarizing_weights(d, q))
    return Channel(ch.kraus, d, d, "depolarizing", {"d": d, "q": q})


def standard_channels(kind, *params):
    table = {
        "dephasing": dephasing,
        "depolarizing": depolarizing,
        "partial_trace_channel": partial_trace_channel,
        "identity": identity_channel,
    }
    if kind not in table:
        raise ChannelError(f"unknown standard channel {kind!r}")
    return table[kind](*params)
