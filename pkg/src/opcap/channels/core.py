"""Kraus-form channels and the basic operations on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..matcore import dag, herm, partial_trace

TP_TOL = 1e-10
DROP_TOL = 1e-12


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class Channel:
    kraus: tuple  # of dim_out x dim_in arrays
    dim_in: int
    dim_out: int
    family: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    @property
    def n_kraus(self):
        return len(self.kraus)

    @cached_property
    def stacked(self):
        """Kraus operators as one (k, dim_out, dim_in) array."""
        return np.stack(self.kraus)

    def __call__(self, rho):
        return apply(self, rho)

    def adjoint(self, x):
        k = self.stacked
        return herm((np.conj(np.swapaxes(k, 1, 2)) @ x @ k).sum(axis=0))


def make_channel(kraus, family="custom", params=None, tol=TP_TOL):
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    if not ks:
        raise ChannelError("a channel needs at least one Kraus operator")
    if ks[0].ndim != 2:
        raise ChannelError("Kraus operators must be matrices")
    dout, din = ks[0].shape
    if any(k.shape != (dout, din) for k in ks):
        raise ChannelError("Kraus operators have inconsistent shapes")
    ks = [k for k in ks if np.linalg.norm(k) >= DROP_TOL]
    if not ks:
        raise ChannelError("all Kraus operators vanish")
    s = sum(dag(k) @ k for k in ks)
    err = np.abs(s - np.eye(din)).max()
    if err > tol:
        raise ChannelError(f"not trace preserving: max|sum K*K - I| = {err:.3e}")
    return Channel(tuple(ks), din, dout, family, dict(params or {}))


def apply(phi: Channel, rho):
    k = phi.stacked
    return (k @ rho @ np.conj(np.swapaxes(k, 1, 2))).sum(axis=0)


def apply_extended(phi: Channel, rho, dim_ref):
    """(id_ref (x) phi)(rho) for rho on C^dim_ref (x) C^dim_in."""
    rho = np.asarray(rho)
    if rho.shape != (dim_ref * phi.dim_in,) * 2:
        raise ChannelError(f"state shape {rho.shape} does not match {dim_ref} x {phi.dim_in}")
    r = rho.reshape(dim_ref, phi.dim_in, dim_ref, phi.dim_in)
    k = phi.stacked
    out = np.einsum("kij,ajbl,kml->aibm", k, r, k.conj(), optimize=True)
    n = dim_ref * phi.dim_out
    return out.reshape(n, n)


def apply_to_vector(phi: Channel, psi, dim_ref):
    """(id (x) phi)(|psi><psi|) for a pure bipartite vector, cheaper than apply_extended."""
    v = np.asarray(psi).reshape(dim_ref, phi.dim_in)
    w = np.einsum("kij,aj->kai", phi.stacked, v, optimize=True).reshape(phi.n_kraus, -1)
    return w.T @ w.conj()


def kraus_vec(k):
    """|K>> = sum_i e_i (x) K e_i, input factor first."""
    return k.T.reshape(-1)


def choi(phi: Channel):
    """sum_ij e_ij (x) phi(e_ij), input factor first."""
    v = np.stack([kraus_vec(k) for k in phi.kraus], axis=1)
    return v @ dag(v)


def channel_from_choi(chi, dim_in, dim_out, family="custom", tol=1e-12, rank=None):
    """Kraus form from a Choi matrix.

    With ``rank`` given, the range of chi is found from a few random probes
    first, so only a small eigenproblem is solved.
    """
    chi = herm(np.asarray(chi))
    if rank is not None and rank + 8 < chi.shape[0]:
        probe = np.random.default_rng(0).standard_normal((chi.shape[0], rank + 8))
        q, _ = np.linalg.qr(chi @ probe)
        w, v = np.linalg.eigh(herm(dag(q) @ chi @ q))
        v = q @ v
    else:
        w, v = np.linalg.eigh(chi)
    kraus = []
    for lam, vec in zip(w[::-1], v.T[::-1]):
        if lam <= tol * max(1.0, w[-1]):
            break
        kraus.append(np.sqrt(lam) * vec.reshape(dim_in, dim_out).T)
    return make_channel(kraus, family, tol=1e-8)


def choi_distance(a: Channel, b: Channel):
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        return float("inf")
    return float(np.abs(choi(a) - choi(b)).max())


def complementary(phi: Channel):
    """Environment output: (phi^E(rho))_ij = tr(K_j^* K_i rho)."""
    k = phi.stacked  # (n_kraus, out, in)
    env = [k[:, b, :] for b in range(phi.dim_out)]  # row b of every K_i
    return Channel(tuple(e for e in env if np.linalg.norm(e) >= DROP_TOL), phi.dim_in, phi.n_kraus,
                   family=f"complement({phi.family})")


def environment_state(phi: Channel, rho):
    """Gram form of the complementary output, no dilation needed."""
    k = phi.stacked
    n = phi.n_kraus
    return (k @ rho).reshape(n, -1) @ k.reshape(n, -1).conj().T


def compose(outer: Channel, inner: Channel):
    """outer after inner."""
    if outer.dim_in != inner.dim_out:
        raise ChannelError("dimension mismatch in composition")
    ks = [a @ b for a in outer.kraus for b in inner.kraus]
    return make_channel(ks, f"{outer.family}*{inner.family}", tol=1e-8)


def compose_reduced(outer: Channel, inner: Channel):
    """Composition with the Kraus set recompressed through the Choi matrix."""
    c = compose(outer, inner)
    return channel_from_choi(choi(c), c.dim_in, c.dim_out, c.family)


def tensor(a: Channel, b: Channel):
    ks = [np.kron(x, y) for x in a.kraus for y in b.kraus]
    return make_channel(ks, f"{a.family}(x){b.family}", tol=1e-8)


def direct_sum(channels):
    """Blockwise channel; off-diagonal input blocks are annihilated."""
    channels = list(channels)
    din = sum(c.dim_in for c in channels)
    dout = sum(c.dim_out for c in channels)
    ks, oi, oo = [], 0, 0
    for c in channels:
        for k in c.kraus:
            big = np.zeros((dout, din), dtype=complex)
            big[oo:oo + c.dim_out, oi:oi + c.dim_in] = k
            ks.append(big)
        oi += c.dim_in
        oo += c.dim_out
    return make_channel(ks, "+".join(c.family for c in channels))


def identity_channel(d):
    return make_channel([np.eye(d)], "identity", {"d": d})


def completely_depolarizing(d):
    ks = [np.outer(np.eye(d)[i], np.eye(d)[j]) / np.sqrt(d) for i in range(d) for j in range(d)]
    return make_channel(ks, "depolarizing", {"d": d, "q": 0.0})


def partial_trace_channel(m, d):
    """id_m (x) tr_d from C^m (x) C^d to C^m."""
    ks = [np.kron(np.eye(m), np.eye(d)[j][None, :]) for j in range(d)]
    return make_channel(ks, "partial_trace", {"m": m, "d": d})


def output_reduced(phi: Channel, rho, dim_ref, keep):
    """Reduced state of (id (x) phi)(rho) on factor 0 (reference) or 1 (output)."""
    out = apply_extended(phi, rho, dim_ref)
    return partial_trace(out, [dim_ref, phi.dim_out], [keep])
