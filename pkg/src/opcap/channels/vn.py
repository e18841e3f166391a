"""VN-channels theta_f(rho) = id (x) tau(U (rho (x) f) U^*) with U = sum_i x_i (x) y_i."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..matcore import dag
from .algebra import (
    BlockStructure,
    SubalgebraSpec,
    commutant_basis,
    infer_subalgebra,
    orthonormalize,
    projection_channel,
    projection_choi,
)
from .core import Channel, ChannelError, make_channel
from .symbols import SymbolAlgebra, SymbolDensity

CHOL_CLAMP = -1e-9


@dataclass(frozen=True, eq=False)
class VNChannelSpec:
    xs: tuple  # m x m matrices spanning M'
    ys: tuple  # elements of the symbol algebra
    symbol: SymbolAlgebra
    family: str = "vn"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.xs) != len(self.ys):
            raise ValueError("xs and ys must have equal length")
        object.__setattr__(self, "xs", tuple(np.asarray(x, dtype=complex) for x in self.xs))
        object.__setattr__(self, "ys", tuple(np.asarray(y, dtype=complex) for y in self.ys))

    @property
    def m(self):
        return self.xs[0].shape[0]

    @property
    def dim_n(self):
        return self.symbol.dim

    @cached_property
    def unitary(self):
        return sum(np.kron(x, y) for x, y in zip(self.xs, self.ys))

    def unitarity_error(self):
        u = self.unitary
        e = np.eye(u.shape[0])
        return max(np.abs(dag(u) @ u - e).max(), np.abs(u @ dag(u) - e).max())

    @cached_property
    def structure(self) -> BlockStructure:
        return infer_subalgebra(list(self.xs))

    @property
    def subalgebra(self) -> SubalgebraSpec:
        return self.structure.spec

    @cached_property
    def m_basis(self):
        """Frobenius-orthonormal basis of M = (span xs)'."""
        return commutant_basis(list(self.xs))

    def expectation(self) -> Channel:
        """E_M as the trace-preserving projection onto M."""
        return projection_channel(self.m_basis, "conditional_expectation", rank=self.subalgebra.commutant_dim)

    def expectation_choi(self):
        return projection_choi(self.m_basis)

    def coefficient_matrix(self, f: SymbolDensity):
        """T_ij = tau(y_i f y_j^*)."""
        y = np.stack(self.ys)
        yf = np.einsum("iab,bc->iac", y, f.data)
        return np.einsum("iab,jab->ij", yf, y.conj()) / self.symbol.rep_dim


def pivoted_cholesky(t, clamp=CHOL_CLAMP, tol=1e-13):
    """T = L L^* for a PSD matrix; returns L with only the nonzero columns."""
    a = np.array(t, dtype=complex)
    n = a.shape[0]
    scale = max(1.0, np.abs(np.diag(a)).max())
    cols = []
    for _ in range(n):
        d = np.real(np.diag(a))
        if d.min() < clamp * scale:
            raise ChannelError(f"coefficient matrix not PSD (diagonal {d.min():.3e})")
        j = int(np.argmax(d))
        if d[j] <= tol * scale:
            break
        col = a[:, j] / np.sqrt(d[j])
        cols.append(col)
        a = a - np.outer(col, col.conj())
    if not cols:
        raise ChannelError("coefficient matrix vanishes")
    return np.stack(cols, axis=1)


def vn_channel(spec: VNChannelSpec, f: SymbolDensity) -> Channel:
    if f.algebra is not spec.symbol and f.algebra.label() != spec.symbol.label():
        raise ChannelError(f"density lives in {f.algebra.label()}, spec expects {spec.symbol.label()}")
    t = spec.coefficient_matrix(f)
    resid = np.abs(t - dag(t)).max()
    if resid > 1e-9:
        raise ChannelError("coefficient matrix is not self-adjoint")
    ell = pivoted_cholesky(0.5 * (t + dag(t)))
    x = np.stack(spec.xs)
    kraus = np.einsum("ia,ipq->apq", ell, x)
    return make_channel(list(kraus), spec.family, dict(spec.params))


def direct_vn_apply(spec: VNChannelSpec, f: SymbolDensity, rho):
    """id (x) tau(U (rho (x) f) U^*), evaluated without any Kraus form."""
    u = spec.unitary
    big = u @ np.kron(rho, f.data) @ dag(u)
    d, m = spec.symbol.rep_dim, spec.m
    return np.trace(big.reshape(m, d, m, d), axis1=1, axis2=3) / d


def stinespring_isometry(spec: VNChannelSpec, f: SymbolDensity):
    """V_f h = sum_i x_i h (x) |y_i sqrt(f)>, environment in the basis of L2(N)."""
    sf = f.sqrt()
    cols = [spec.symbol.coords(y @ sf) for y in spec.ys]
    return sum(np.kron(x, c.reshape(-1, 1)) for x, c in zip(spec.xs, cols))


@dataclass(frozen=True)
class ConditionReport:
    bb_star_error: float
    b_star_b_deviation: float
    mu: float
    mu_expected: float  # m / dim N
    unitary_error: float
    amplified: bool  # C3 checked on x_i (x) 1_r because M is not standard in M_m
    amplification: int
    tol: float = 1e-10

    @property
    def c2_holds(self):
        return self.unitary_error <= self.tol

    @property
    def c3_holds(self):
        return self.bb_star_error <= self.tol

    @property
    def c4_holds(self):
        return self.b_star_b_deviation <= self.tol and self.mu > 0

    @property
    def c3prime_holds(self):
        return self.c3_holds and self.c4_holds and abs(self.mu - 1.0) <= self.tol

    def as_dict(self):
        return {
            "bb_star_error": self.bb_star_error,
            "b_star_b_deviation": self.b_star_b_deviation,
            "mu": self.mu,
            "mu_expected": self.mu_expected,
            "unitary_error": self.unitary_error,
            "amplified": self.amplified,
            "amplification": self.amplification,
            "c2": self.c2_holds,
            "c3": self.c3_holds,
            "c4": self.c4_holds,
            "c3prime": self.c3prime_holds,
        }


def b_star_b(spec: VNChannelSpec):
    """B^*B in the orthonormal basis of L2(N), with |x_i> in L2(M_m, tr)."""
    x = np.stack(spec.xs)
    gx = np.einsum("iab,jab->ij", x.conj(), x)  # tr(x_i^* x_j)
    y = np.array([spec.symbol.coords(dag(yi)) for yi in spec.ys]).T  # Y[k, i] = tau(b_k^* y_i^*)
    return y @ gx @ dag(y)


def bb_star(xs, spec: VNChannelSpec):
    """B B^* as an operator on L2(M_m, tr), restricted in range to span(xs)."""
    t1 = np.einsum("iab,jab->ij", np.stack(spec.ys), np.stack(spec.ys).conj()) / spec.symbol.rep_dim
    x = np.stack([xi.reshape(-1) for xi in xs], axis=1)
    return x @ t1 @ dag(x)


def build_B_and_check(spec: VNChannelSpec, tol=1e-10) -> ConditionReport:
    sub = spec.subalgebra
    m = spec.m
    xs = list(spec.xs)
    amplified, r = False, 1
    if not sub.is_standard:
        # M = sum M_{n_k} (x) 1_{m_k}; tensoring M' with 1_r makes it standard when m_k = r n_k
        ratios = {mk / nk for nk, mk in sub.blocks}
        if len(ratios) == 1 and float(next(iter(ratios))).is_integer():
            r = int(next(iter(ratios)))
            xs = [np.kron(x, np.eye(r)) for x in xs]
            amplified = True
    target_basis = orthonormalize(xs)
    p = sum(np.outer(b.reshape(-1), b.reshape(-1).conj()) for b in target_basis)
    bb = bb_star(xs, spec)
    bb_err = float(np.abs(bb - p).max())
    bsb = b_star_b(spec)
    mu = float(np.real(np.trace(bsb))) / spec.dim_n
    dev = float(np.abs(bsb - mu * np.eye(spec.dim_n)).max())
    return ConditionReport(
        bb_star_error=bb_err,
        b_star_b_deviation=dev,
        mu=mu,
        mu_expected=m / spec.dim_n,
        unitary_error=float(spec.unitarity_error()),
        amplified=amplified,
        amplification=r,
        tol=tol,
    )


def largest_block_input(spec: VNChannelSpec):
    """Maximally mixed state on a rank-d_M projection whose compression of M is full."""
    v = spec.structure.largest_block
    return v @ dag(v) / v.shape[1]


def largest_block_entangled(spec_or_vectors, m=None):
    """Maximally entangled vector between C^d (reference, padded to m) and a largest block."""
    v = spec_or_vectors.structure.largest_block if isinstance(spec_or_vectors, VNChannelSpec) else spec_or_vectors
    m = m or v.shape[0]
    d = v.shape[1]
    psi = np.zeros((m, v.shape[0]), dtype=complex)
    for i in range(d):
        psi[i] = v[:, i]
    return psi.reshape(-1) / np.sqrt(d)


def b_operator(spec: VNChannelSpec):
    """B = sum_i |x_i><y_i^*| from L2(N, tau) to L2(M_m, tr), as an m^2 x dim N matrix."""
    y = np.array([spec.symbol.coords(dag(yi)) for yi in spec.ys])  # tau(b_k^* y_i^*)
    x = np.stack([xi.reshape(-1) for xi in spec.xs], axis=1)
    return x @ y.conj()


def omega_via_B(spec: VNChannelSpec, f: SymbolDensity):
    """E_{M'}(B f B^*), reduced to M_m; should equal theta_f(1)."""
    alg = spec.symbol
    basis = np.stack(alg.basis)
    fmat = np.einsum("kba,bc,lca->kl", basis.conj(), f.data, basis) / alg.rep_dim  # tau(b_k^* f b_l)
    b = b_operator(spec)
    m = spec.m
    big = (b @ fmat @ dag(b)).reshape(m, m, m, m)
    red = np.trace(big, axis1=1, axis2=3)
    return projection_channel(orthonormalize(list(spec.xs)))(red)
