"""Entropic channel functionals and the ascent optimizers built on them.

Inputs are parametrized as rho = G G^* / tr(G G^*) with unconstrained complex
G, so iterates stay positive without any projection step.  All values are
in nats.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import (
    Channel,
    SymbolDensity,
    VNChannelSpec,
    apply,
    apply_extended,
    apply_to_vector,
    build_B_and_check,
    environment_state,
    uniform,
    vn_channel,
)
from .matcore import (
    INF,
    RandomSource,
    dag,
    herm,
    max_entangled,
    partial_trace,
    random_density,
    random_pure_bipartite,
    schatten_norm,
    shannon,
    spectrum_entropy,
    validate_density,
)

KINDS = ("coherent", "reverse", "mutual")
LOG_FLOOR = 1e-12
P_INF_SURROGATE = 64.0


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 20
    max_iter: int = 500
    grad_tol: float = 1e-8
    shrink: float = 0.5
    seed: int = 0
    armijo: float = 1e-4

    def __post_init__(self):
        if self.restarts < 1 or self.max_iter < 1:
            raise ValueError("restarts and max_iter must be >= 1")
        if self.grad_tol <= 0 or not 0 < self.shrink < 1:
            raise ValueError("tolerances must be positive and shrink in (0, 1)")


@dataclass
class OptResult:
    value: float
    argmax: np.ndarray
    restart_values: list
    converged: bool
    labels: list = field(default_factory=list)  # which start produced each restart value

    @property
    def best_index(self):
        return _first_best(self.restart_values)


@dataclass(frozen=True)
class RateTriple:
    C: float
    Q: float
    E: float

    def as_array(self):
        return np.array([self.C, self.Q, self.E])


TIE_TOL = 1e-12


def _first_best(values):
    """Lowest index whose value is within TIE_TOL of the maximum."""
    v = np.asarray(values)
    return int(np.flatnonzero(v >= v.max() - TIE_TOL)[0])


# objectives


def _logm(a):
    w, v = np.linalg.eigh(herm(a))
    return (v * np.log(np.clip(w, LOG_FLOOR, None))) @ dag(v)


def _env_adjoint(phi: Channel, x):
    """Adjoint of rho -> environment_state(phi, rho)."""
    k = phi.stacked
    mix = np.tensordot(x, k, axes=(1, 0))  # sum_i x_ki K_i
    return herm((np.conj(np.swapaxes(k, 1, 2)) @ mix).sum(axis=0))


def _objective(phi: Channel, rho, kind, need_grad=True):
    out = apply(phi, rho)
    env = environment_state(phi, rho)
    h_out, h_env = spectrum_entropy(out), spectrum_entropy(env)
    h_in = spectrum_entropy(rho) if kind != "coherent" else 0.0
    if kind == "coherent":
        val = h_out - h_env
    elif kind == "reverse":
        val = h_in - h_env
    elif kind == "mutual":
        val = h_in + h_out - h_env
    else:
        raise ValueError(f"unknown information kind {kind!r}")
    if not need_grad:
        return val, None
    grad = _env_adjoint(phi, _logm(env))
    if kind in ("coherent", "mutual"):
        grad = grad - phi.adjoint(_logm(out))
    if kind in ("reverse", "mutual"):
        grad = grad - _logm(rho)
    return val, herm(grad)


def channel_information(phi: Channel, rho_in, kind):
    rho = validate_density(rho_in)
    if rho.shape[0] != phi.dim_in:
        raise ValueError("input density has the wrong dimension")
    return _objective(phi, rho, kind, need_grad=False)[0]


def information_gradient(phi: Channel, rho, kind):
    """Value and the Hermitian gradient Gamma with dF = tr(Gamma d rho)."""
    return _objective(phi, rho, kind)


# generic ascent on the G parametrization


def _ascend(fun, g0, cfg: OptimizerConfig):
    """Maximize fun(G) -> (value, grad_G) with Armijo backtracking.

    Returns (G, value, converged).  The next trial step is set from the ratio
    of actual to predicted gain, which stops the ascent from bouncing across
    a ridge with accepted but nearly useless steps.
    """
    g = g0 / np.linalg.norm(g0)
    val, grad = fun(g)
    step = 1.0
    for _ in range(cfg.max_iter):
        gn2 = float(np.real(np.vdot(grad, grad)))
        if np.sqrt(gn2) < cfg.grad_tol:
            return g, val, True
        accepted = False
        for _ in range(60):
            cand = g + step * grad
            cand = cand / np.linalg.norm(cand)
            cval, cgrad = fun(cand)
            if cval >= val + cfg.armijo * step * gn2:
                accepted = True
                break
            step *= cfg.shrink
        if not accepted:
            # no ascent direction left at machine precision
            return g, val, True
        gain = cval - val
        ratio = gain / (step * gn2)
        g, val, grad = cand, cval, cgrad
        if gain <= 1e-15 * max(1.0, abs(val)):
            return g, val, True
        if ratio > 0.75:
            step /= cfg.shrink
        elif ratio < 0.25:
            step *= cfg.shrink
    return g, val, False


def _density_fun(phi, kind):
    def fun(g):
        gg = g @ dag(g)
        t = np.trace(gg).real
        rho = gg / t
        val, gam = _objective(phi, rho, kind)
        c = np.trace(gam @ rho).real
        gam = gam - c * np.eye(gam.shape[0])
        return val, 2.0 * gam @ g / t

    return fun


def _start_factor(rho, eps):
    """G with G G^* close to rho but of full rank, so the ascent can leave the face."""
    w, v = np.linalg.eigh(herm(rho))
    g = (v * np.sqrt(np.clip(w, 0.0, None))) @ dag(v)
    return g + eps * np.eye(rho.shape[0]) / np.sqrt(rho.shape[0])


def maximize_information(phi: Channel, kind, cfg: OptimizerConfig = OptimizerConfig(), starts=()):
    """Best value of channel_information over inputs.

    Structured starts (maximally mixed, pure e_1, then ``starts``) come first,
    followed by ``cfg.restarts`` random densities.  Each structured start is
    also scored exactly before ascent, and the better of the two kept.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown information kind {kind!r}")
    d = phi.dim_in
    fun = _density_fun(phi, kind)
    e1 = np.zeros((d, d), dtype=complex)
    e1[0, 0] = 1.0
    structured = [("maximally_mixed", np.eye(d) / d), ("pure_e1", e1)]
    structured += [(f"start{i}", np.asarray(s)) for i, s in enumerate(starts)]
    rng = RandomSource(cfg.seed)
    values, args, labels = [], [], []
    all_conv = True
    for label, rho0 in structured:
        exact = _objective(phi, rho0, kind, need_grad=False)[0]
        g, val, conv = _ascend(fun, _start_factor(rho0, 1e-3), cfg)
        all_conv &= conv
        if exact >= val:
            values.append(exact)
            args.append(rho0)
        else:
            values.append(val)
            gg = g @ dag(g)
            args.append(gg / np.trace(gg).real)
        labels.append(label)
    for r in range(cfg.restarts):
        child = rng.child(r + 1)
        g, val, conv = _ascend(fun, child.ginibre(d, d), cfg)
        all_conv &= conv
        gg = g @ dag(g)
        values.append(val)
        args.append(gg / np.trace(gg).real)
        labels.append(f"random{r}")
    best = _first_best(values)
    return OptResult(float(values[best]), herm(args[best]), [float(v) for v in values], bool(all_conv), labels)


# Schatten ratios over pure bipartite inputs


def _norm_and_power(y, p):
    """||y||_p and the matrix (y/s)^(p-1) / (s * tr((y/s)^p)) = d ln||y||_p^p / (p dy)."""
    w, v = np.linalg.eigh(herm(y))
    w = np.clip(w, 0.0, None)
    s = w.max()
    wn = w / s
    tr = np.sum(wn ** p)
    norm = s * tr ** (1.0 / p)
    pw = (v * (wn ** (p - 1))) @ dag(v) / (s * tr)
    return norm, pw


def _ratio_fun(phi: Channel, dim_ref, p):
    din = phi.dim_in

    def value(psi):
        y1 = apply_to_vector(phi, psi, dim_ref)
        mat = psi.reshape(dim_ref, din)
        rho_b = (mat.T @ mat.conj())
        y2 = apply(phi, rho_b)
        return y1, y2

    def fun(psi):
        y1, y2 = value(psi)
        n1, p1 = _norm_and_power(y1, p)
        n2, p2 = _norm_and_power(y2, p)
        a1 = apply_extended_adjoint(phi, p1, dim_ref)
        a2 = phi.adjoint(p2)
        mat = psi.reshape(dim_ref, din)
        g = (a1 @ psi) - (mat @ a2.T).reshape(-1)
        return float(np.log(n1) - np.log(n2)), 2.0 * g

    return fun, value


def apply_extended_adjoint(phi: Channel, x, dim_ref):
    """(id (x) phi^*)(x) for x on C^dim_ref (x) C^dim_out."""
    xr = x.reshape(dim_ref, phi.dim_out, dim_ref, phi.dim_out)
    k = phi.stacked
    out = np.einsum("kji,ajbl,klm->aibm", k.conj(), xr, k, optimize=True)
    n = dim_ref * phi.dim_in
    return out.reshape(n, n)


@dataclass
class RatioResult:
    value: float
    argmax: np.ndarray
    restart_values: list
    labels: list

    def __float__(self):
        return self.value


def q_p_ratio_at(phi: Channel, psi, p, dim_ref=None):
    """||(id (x) phi)(psi psi^*)||_p / ||phi(psi_B)||_p for one unit vector."""
    dim_ref = dim_ref or len(psi) // phi.dim_in
    psi = np.asarray(psi, dtype=complex) / np.linalg.norm(psi)
    y1 = apply_to_vector(phi, psi, dim_ref)
    mat = psi.reshape(dim_ref, phi.dim_in)
    y2 = apply(phi, mat.T @ mat.conj())
    return schatten_norm(y1, p) / schatten_norm(y2, p)


def q_p_ratio(phi: Channel, p, cfg: OptimizerConfig = OptimizerConfig(), dim_ref=None, starts=()):
    """Restart ascent for the sup of the Schatten-p ratio over pure inputs.

    Every value returned is attained, so it is a certified lower estimate.
    p = INF is optimized through the p = 64 surrogate and scored exactly.
    """
    if p != INF and not p > 1:
        raise ValueError("q_p_ratio needs p > 1")
    dim_ref = dim_ref or phi.dim_in
    p_opt = P_INF_SURROGATE if p == INF else float(p)
    fun, _ = _ratio_fun(phi, dim_ref, p_opt)
    me = np.zeros((dim_ref, phi.dim_in), dtype=complex)
    for i in range(min(dim_ref, phi.dim_in)):
        me[i, i] = 1.0
    structured = [("maximally_entangled", me.reshape(-1))] + [(f"start{i}", np.asarray(s)) for i, s in enumerate(starts)]
    rng = RandomSource(cfg.seed)
    inits = structured + [(f"random{r}", random_pure_bipartite(dim_ref, phi.dim_in, rng.child(r + 1)))
                          for r in range(cfg.restarts)]
    values, args, labels = [], [], []
    for label, psi0 in inits:
        psi0 = psi0 / np.linalg.norm(psi0)
        exact0 = q_p_ratio_at(phi, psi0, p, dim_ref)
        psi, _, _ = _ascend(fun, psi0, cfg)
        exact = q_p_ratio_at(phi, psi, p, dim_ref)
        if exact0 >= exact:
            exact, psi = exact0, psi0
        values.append(float(exact))
        args.append(psi)
        labels.append(label)
    best = _first_best(values)
    return RatioResult(values[best], args[best], values, labels)


# vector-valued Choi norms


def _choi_vv_at(chi, m, p, a):
    d = chi.shape[0] // m
    big = np.kron(a, np.eye(d))
    y = big @ chi @ big
    return schatten_norm(y, p) / schatten_norm(a, INF if p == INF else 2 * p) ** 2


def choi_vv_norm(chi, m, p, cfg: OptimizerConfig = OptimizerConfig(restarts=4)):
    """sup_a ||(a (x) 1) chi (a (x) 1)||_p / ||a||_{2p}^2 over positive a on the input factor.

    Closed forms at p = 1 (the largest eigenvalue of the reduced Choi matrix)
    and p = INF (the operator norm of chi, attained at a = 1).
    """
    chi = herm(np.asarray(chi))
    if p != INF and not p >= 1:
        raise ValueError("choi_vv_norm needs p >= 1")
    d = chi.shape[0] // m
    if p == 1:
        return float(np.linalg.eigvalsh(partial_trace(chi, [m, d], [0])).max())
    if p == INF:
        return float(np.linalg.eigvalsh(chi).max())
    eye_d = np.eye(d)

    def fun(g):
        a = herm(g @ dag(g))
        big = np.kron(a, eye_d)
        y = herm(big @ chi @ big)
        n1, p1 = _norm_and_power(y, p)
        wa, va = np.linalg.eigh(a)
        wa = np.clip(wa, 0.0, None)
        sa = wa.max()
        tra = np.sum((wa / sa) ** (2 * p))
        na = sa * tra ** (1.0 / (2 * p))
        # d ln||y||_p = tr(p1 dy); dy = (da (x) 1) chi (a (x) 1) + h.c.
        z = partial_trace(chi @ big @ p1, [m, d], [0])
        ga = (z + dag(z)) - 2.0 * (va * ((wa / sa) ** (2 * p - 1))) @ dag(va) / (sa * tra)
        return float(np.log(n1) - 2 * np.log(na)), 2.0 * herm(ga) @ g

    rng = RandomSource(cfg.seed)
    inits = [np.eye(m, dtype=complex)] + [rng.child(r + 1).ginibre(m, m) for r in range(cfg.restarts)]
    best = -np.inf
    for g0 in inits:
        exact0 = _choi_vv_at(chi, m, p, herm(g0 @ dag(g0)))
        g, _, _ = _ascend(fun, g0, cfg)
        val = max(exact0, _choi_vv_at(chi, m, p, herm(g @ dag(g))))
        best = max(best, val)
    return float(best)


# comparison inequalities


def comparison_probe(spec: VNChannelSpec, f: SymbolDensity, p, trials, rng: RandomSource, f2=None, check=True):
    """Minimum slacks of ||id (x) theta_1|| <= ||id (x) theta_f|| <= ||f||_p ||id (x) theta_1||.

    Returns (min_lower, min_upper), plus the two-density slack when ``f2``
    is given.  Half of the sampled states are pure, half full rank.
    """
    if check:
        rep = build_B_and_check(spec)
        if not rep.c3_holds:
            raise ValueError("comparison_probe needs a spec satisfying C3")
    m = spec.m
    th_f = vn_channel(spec, f)
    th_1 = vn_channel(spec, uniform(spec.symbol))
    th_2 = vn_channel(spec, f2) if f2 is not None else None
    fp = f.norm(p)
    lo, up, two = np.inf, np.inf, np.inf
    for t in range(trials):
        if t % 2 == 0:
            psi = random_pure_bipartite(m, m, rng)
            nf = schatten_norm(apply_to_vector(th_f, psi, m), p)
            n1 = schatten_norm(apply_to_vector(th_1, psi, m), p)
            n2 = schatten_norm(apply_to_vector(th_2, psi, m), p) if th_2 else None
        else:
            rho = random_density(m * m, rng)
            nf = schatten_norm(apply_extended(th_f, rho, m), p)
            n1 = schatten_norm(apply_extended(th_1, rho, m), p)
            n2 = schatten_norm(apply_extended(th_2, rho, m), p) if th_2 else None
        lo = min(lo, nf - n1)
        up = min(up, fp * n1 - nf)
        if th_2 is not None:
            two = min(two, fp * f2.norm(p) * n2 - nf)
    if th_2 is not None:
        return float(lo), float(up), float(two)
    return float(lo), float(up)


def entropy_pnorm_derivative(rho, h):
    if not 0 < h <= 0.1:
        raise ValueError("h must lie in (0, 0.1]")
    return (1.0 - schatten_norm(rho, 1.0 + h)) / h


# CQE triples


def cqe_triple(phi: Channel, ensemble):
    """(I(X;B), I(A;B|X)/2, -I(A;E|X)/2) for a cq ensemble of pure inputs on A (x) A'."""
    probs = np.array([float(p) for p, _ in ensemble])
    if (probs < 0).any() or abs(probs.sum() - 1) > 1e-10:
        raise ValueError("ensemble probabilities must be nonnegative and sum to 1")
    b_avg = np.zeros((phi.dim_out, phi.dim_out), dtype=complex)
    h_b_avg, iab, iae = 0.0, 0.0, 0.0
    for p, psi in ensemble:
        psi = np.asarray(psi, dtype=complex)
        if abs(np.linalg.norm(psi) - 1) > 1e-9:
            raise ValueError("ensemble states must be unit vectors")
        da = len(psi) // phi.dim_in
        mat = psi.reshape(da, phi.dim_in)
        h_a = shannon(np.linalg.svd(mat, compute_uv=False) ** 2)
        ab = apply_to_vector(phi, psi, da)
        h_ab = spectrum_entropy(ab)
        b = partial_trace(ab, [da, phi.dim_out], [1])
        h_b = spectrum_entropy(b)
        # A B E is pure, so H(E) = H(AB) and H(AE) = H(B)
        b_avg += p * b
        h_b_avg += p * h_b
        iab += p * (h_a + h_b - h_ab)
        iae += p * (h_a + h_ab - h_b)
    c = spectrum_entropy(b_avg) - h_b_avg
    return RateTriple(float(c), 0.5 * float(iab), -0.5 * float(iae))


def cqe_shift(tf: RateTriple, t1: RateTriple, tau):
    """Cone coordinates of tf - t1 - (tau, tau/2, tau/2); all must be <= 0."""
    dc, dq, de = tf.as_array() - t1.as_array() - np.array([tau, tau / 2, tau / 2])
    return np.array([2 * dq + dc, dq + de, dc + dq + de])


def cqe_shift_check(tf: RateTriple, t1: RateTriple, tau, tol=1e-9):
    return bool((cqe_shift(tf, t1, tau) <= tol).all())


def maximally_entangled_ensemble(m):
    return [(1.0, max_entangled(m))]
