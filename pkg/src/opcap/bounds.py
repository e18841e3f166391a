"""Closed-form capacity bounds for VN-channels, per-channel reports and sweeps."""

from __future__ import annotations

import io
from dataclasses import asdict, dataclass, field

import numpy as np

from .channels import (
    Channel,
    SubalgebraSpec,
    SymbolDensity,
    VNChannelSpec,
    apply,
    build_B_and_check,
    choi,
    depolarizing,
    make_channel,
    uniform,
    vn_channel,
)
from .infomeasures import OptimizerConfig, channel_information, maximize_information
from .matcore import RandomSource, binary_entropy, haar_unitary, von_neumann_entropy
from .channels.vn import largest_block_input


def tau_flnf(f: SymbolDensity):
    return f.tau_flnf()


def d_M(spec: SubalgebraSpec):
    """ln of the largest block size, in nats."""
    return float(np.log(spec.d_max))


@dataclass
class BoundsReport:
    family: str
    m: int
    dim_n: int
    mu: float
    tau_flnf: float
    ln_dM: float
    omega_entropy: float
    conditions: dict
    scb_formula: float | None = None
    hashing_lower: float | None = None
    q1_lower: float | None = None
    q_upper: float | None = None
    qea_upper: float | None = None
    q_upper_min: float | None = None
    cea_lower: float | None = None
    cea_upper: float | None = None
    unital: bool = False
    notes: list = field(default_factory=list)
    numerics: dict = field(default_factory=dict)
    deltas: dict = field(default_factory=dict)

    def ordering_violations(self, tol=1e-12):
        bad = []
        if self.q1_lower is not None and self.q_upper is not None and self.q1_lower > self.q_upper + tol:
            bad.append("q1_lower > q_upper")
        if self.cea_lower is not None and self.cea_lower > self.cea_upper + tol:
            bad.append("cea_lower > cea_upper")
        if self.hashing_lower is not None and self.hashing_lower > self.q1_lower + 1e-9:
            bad.append("hashing_lower > q1_lower")
        return bad

    def bracket_violations(self, tol=1e-4):
        """Optimizer numerics that land outside their closed-form brackets."""
        bad = []
        n = self.numerics
        if "reverse" in n and self.scb_formula is not None and abs(n["reverse"] - self.scb_formula) > tol:
            bad.append("reverse != scb")
        if "mutual" in n and self.cea_lower is not None:
            if not self.cea_lower - tol <= n["mutual"] <= self.cea_upper + tol:
                bad.append("mutual outside cea bracket")
        if "coherent" in n and self.q1_lower is not None:
            hi = self.q_upper_min if self.q_upper_min is not None else self.q_upper
            if not self.q1_lower - tol <= n["coherent"] <= hi + tol:
                bad.append("coherent outside q bracket")
        return bad

    def as_dict(self):
        return asdict(self)


def omega(spec: VNChannelSpec, f: SymbolDensity):
    """theta_f(1), computed from the channel itself."""
    return apply(vn_channel(spec, f), np.eye(spec.m))


def bounds_report(spec: VNChannelSpec, f: SymbolDensity, with_numerics=False,
                  cfg: OptimizerConfig = OptimizerConfig()) -> BoundsReport:
    """Every closed-form bound for theta_f, optionally cross-checked by the optimizers.

    Entries that need conditions the given VNChannelSpec does not meet are left as None and
    listed in ``notes``.
    """
    rep = build_B_and_check(spec)
    m = spec.m
    t = f.tau_flnf()
    ln_dm = d_M(spec.subalgebra)
    out = BoundsReport(
        family=spec.family, m=m, dim_n=spec.dim_n, mu=float(rep.mu), tau_flnf=t, ln_dM=ln_dm,
        omega_entropy=float("nan"), conditions=rep.as_dict(),
    )
    if not rep.c3_holds:
        # theta_f need not even be trace preserving here
        out.notes.append("C3 fails: no bounds are valid")
        return out
    w = omega(spec, f)
    out.omega_entropy = von_neumann_entropy(w / m)
    out.unital = bool(np.abs(w - np.eye(m)).max() < 1e-9)
    h_omega = out.omega_entropy
    out.q_upper = t + ln_dm
    if not rep.c4_holds:
        out.notes.append("B*B is not a multiple of the identity: cb-entropy based entries omitted")
        out.q1_lower = ln_dm
        out.q_upper_min = out.q_upper
        return out
    if not rep.c3prime_holds:
        out.notes.append("B is not unitary: bounds use the cb-entropy ln(mu) + tau(f ln f)")
    scb = float(np.log(rep.mu)) + t
    out.scb_formula = scb
    out.hashing_lower = scb + h_omega - np.log(m)
    out.q1_lower = max(ln_dm, out.hashing_lower)
    out.qea_upper = 0.5 * (np.log(m) + scb)
    out.q_upper_min = min(out.q_upper, out.qea_upper)
    out.cea_lower = scb + h_omega
    out.cea_upper = scb + np.log(m)
    if with_numerics:
        phi = vn_channel(spec, f)
        starts = (largest_block_input(spec),)
        for kind in ("reverse", "mutual", "coherent"):
            res = maximize_information(phi, kind, cfg, starts=starts)
            out.numerics[kind] = res.value
        out.deltas = {
            "reverse-scb": out.numerics["reverse"] - scb,
            "mutual-cea_lower": out.numerics["mutual"] - out.cea_lower,
            "cea_upper-mutual": out.cea_upper - out.numerics["mutual"],
            "coherent-q1_lower": out.numerics["coherent"] - out.q1_lower,
            "q_upper_min-coherent": out.q_upper_min - out.numerics["coherent"],
        }
    return out


# closed forms for qubit and qudit examples


def dephasing_formula(q):
    if not 0 <= q <= 1:
        raise ValueError("q must lie in [0, 1]")
    return float(np.log(2) - binary_entropy((1 + q) / 2))


def depolarizing_upper(d, q):
    """Convexity bound for the depolarizing channel from twirled dephasing."""
    if d < 2 or not 0 <= q <= 1:
        raise ValueError("need d >= 2 and q in [0, 1]")
    d2 = d * d
    return float(np.log(d) - binary_entropy((q * (d2 - 1) + 1) / d2) - (d2 - 1) * (1 - q) / d2 * np.log(d - 1))


def depolarizing_hashing(d, q):
    """Coherent information of the depolarizing channel at the maximally mixed input."""
    return channel_information(depolarizing(d, q), np.eye(d) / d, "coherent")


def basis_dephasing(d, qprime):
    """q' rho + (1 - q') diag(rho)."""
    if not 0 <= qprime <= 1:
        raise ValueError("q' must lie in [0, 1]")
    ks = [np.sqrt(qprime) * np.eye(d)]
    ks += [np.sqrt(1 - qprime) * np.diag(np.eye(d)[k]) for k in range(d)]
    return make_channel(ks, "basis_dephasing", {"d": d, "q": qprime})


def twirl_parameter(d, qprime):
    return qprime + (1 - qprime) / (d + 1)


def twirl_dephasing(d, qprime) -> Channel:
    """The Haar average of U^* Phi(U . U^*) U for the basis dephasing Phi."""
    if d < 2:
        raise ValueError("need d >= 2")
    return depolarizing(d, twirl_parameter(d, qprime))


def twirl_verify(d, qprime, samples, rng: RandomSource):
    """Max entry deviation between the Monte Carlo twirl Choi matrix and the exact one."""
    phi = basis_dephasing(d, qprime)
    acc = np.zeros((d * d, d * d), dtype=complex)
    for _ in range(samples):
        u = haar_unitary(d, rng)
        ks = [u.conj().T @ k @ u for k in phi.kraus]
        v = np.stack([k.T.reshape(-1) for k in ks], axis=1)
        acc += v @ v.conj().T
    return float(np.abs(acc / samples - choi(twirl_dephasing(d, qprime))).max())


# sweeps


@dataclass
class SweepTable:
    param: str
    grid: np.ndarray
    columns: dict  # curve name -> values aligned with grid

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        for k, v in self.columns.items():
            v = np.asarray(v, dtype=float)
            if v.shape != self.grid.shape:
                raise ValueError(f"column {k!r} does not align with the grid")
            self.columns[k] = v

    def rows(self):
        for i, x in enumerate(self.grid):
            yield [x] + [c[i] for c in self.columns.values()]

    def to_csv(self, path=None):
        buf = io.StringIO()
        buf.write(",".join([self.param, *self.columns]) + "\n")
        for row in self.rows():
            buf.write(",".join(f"{x:.12g}" for x in row) + "\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _check_grid(grid):
    g = np.asarray(grid, dtype=float)
    if g.size == 0:
        raise ValueError("empty grid")
    if np.any(np.diff(g) < 0):
        raise ValueError("grid must be ordered")
    return g


def figure1(ln_dm, m, grid):
    """Curves I-IV against t = tau(f ln f) for a unital channel."""
    t = _check_grid(grid)
    return SweepTable("t", t, {
        "I_ln_dM": np.full_like(t, ln_dm),
        "II_ln_dM_plus_t": ln_dm + t,
        "III_t": t.copy(),
        "IV_half_ln_m_plus_t": 0.5 * (np.log(m) + t),
    })


def figure2_grid(d, steps):
    return np.linspace(1.0 / (d + 1), 1.0, steps)


def figure2(d, grid):
    q = _check_grid(grid)
    q0 = 1.0 / (d + 1)
    return SweepTable("q", q, {
        "convexity_line": np.log(d) * (q - q0) / (1 - q0),
        "hashing": [depolarizing_hashing(d, x) for x in q],
        "upper": [depolarizing_upper(d, x) for x in q],
    })


def dephasing_sweep(grid):
    q = _check_grid(grid)
    from .channels import dephasing

    return SweepTable("q", q, {
        "formula": [dephasing_formula(x) for x in q],
        "coherent_maximally_mixed": [channel_information(dephasing(x), np.eye(2) / 2, "coherent") for x in q],
    })


def family_sweep(spec: VNChannelSpec, f: SymbolDensity, grid):
    """Bounds along f_s = (1 - s) 1 + s f, which stays a density for s in [0, 1]."""
    s = _check_grid(grid)
    if s.min() < 0 or s.max() > 1:
        raise ValueError("family sweep grid must lie in [0, 1]")
    one = uniform(f.algebra).data
    names = ("tau_flnf", "scb_formula", "q1_lower", "q_upper", "q_upper_min", "cea_lower", "cea_upper")
    cols = {k: [] for k in names}
    for x in s:
        rep = bounds_report(spec, SymbolDensity(f.algebra, (1 - x) * one + x * f.data))
        for k in names:
            v = getattr(rep, k)
            cols[k].append(np.nan if v is None else v)
    return SweepTable("s", s, cols)


def sweep(kind, grid, **params):
    if kind == "figure1":
        return figure1(params["ln_dM"], params["m"], grid)
    if kind == "figure2":
        return figure2(params["d"], grid)
    if kind == "dephasing":
        return dephasing_sweep(grid)
    if kind == "family":
        return family_sweep(params["spec"], params["f"], grid)
    raise ValueError(f"unknown sweep {kind!r}")
