import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opcap.channels import (
    SubalgebraSpec,
    apply,
    apply_to_vector,
    choi,
    clifford_spec,
    completely_depolarizing,
    compose,
    conditional_expectation,
    crossed_product_spec,
    dephasing,
    depolarizing,
    direct_sum,
    group_random_unitary_spec,
    group_schur_spec,
    identity_channel,
    largest_block_entangled,
    make_channel,
    nonunital_spec,
    partial_trace_channel,
    pauli_spec,
    random_symbol,
    tensor,
    uniform,
    vn_channel,
)
from opcap.infomeasures import (
    OptimizerConfig,
    TIE_TOL,
    RateTriple,
    _first_best,
    channel_information,
    choi_vv_norm,
    comparison_probe,
    cqe_shift,
    cqe_shift_check,
    cqe_triple,
    entropy_pnorm_derivative,
    information_gradient,
    maximally_entangled_ensemble,
    maximize_information,
    q_p_ratio,
    q_p_ratio_at,
)
from opcap.groups import cyclic, symmetric
from opcap.matcore import (
    INF,
    RandomSource,
    binary_entropy,
    haar_unitary,
    partial_trace,
    proj,
    random_density,
    random_pure_bipartite,
    spectrum_entropy,
)

from conftest import seeds

FAST = OptimizerConfig(restarts=4, max_iter=300)
S3, Z3 = symmetric(3), cyclic(3)


def purified_informations(phi, rho):
    """Coherent, reverse and mutual information from an explicit purification."""
    d = rho.shape[0]
    w, v = np.linalg.eigh(rho)
    psi = sum(np.sqrt(max(w[i], 0)) * np.kron(v[:, i].conj(), v[:, i]) for i in range(d))
    ab = apply_to_vector(phi, psi, d)
    h_a = spectrum_entropy(partial_trace(ab, [d, phi.dim_out], [0]))
    h_b = spectrum_entropy(partial_trace(ab, [d, phi.dim_out], [1]))
    h_ab = spectrum_entropy(ab)
    return {"coherent": h_b - h_ab, "reverse": h_a - h_ab, "mutual": h_a + h_b - h_ab}


def random_channel(din, dout, k, rng):
    q, _ = np.linalg.qr(rng.ginibre(k * dout, din))
    return make_channel([q[i * dout:(i + 1) * dout] for i in range(k)])


# single-input functionals


def test_channel_information_examples(rng):
    assert channel_information(identity_channel(3), np.eye(3) / 3, "coherent") == pytest.approx(np.log(3), abs=1e-12)
    rho = random_density(3, rng)
    assert channel_information(completely_depolarizing(3), rho, "coherent") == pytest.approx(
        -spectrum_entropy(rho), abs=1e-10)
    for q in (0.0, 0.4, 1.0):
        expected = np.log(2) - binary_entropy((1 + q) / 2)
        assert channel_information(dephasing(q), np.eye(2) / 2, "coherent") == pytest.approx(expected, abs=1e-12)
    with pytest.raises(ValueError):
        channel_information(dephasing(0.5), np.eye(3) / 3, "coherent")
    with pytest.raises(ValueError):
        channel_information(dephasing(0.5), np.eye(2), "coherent")
    with pytest.raises(ValueError):
        channel_information(dephasing(0.5), np.eye(2) / 2, "holevo")


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))
def test_information_identities(seed, din, dout, k):
    rng = RandomSource(seed)
    phi = random_channel(din, dout, max(k, -(-din // dout)), rng)
    rho = random_density(din, rng)
    vals = {kind: channel_information(phi, rho, kind) for kind in ("coherent", "reverse", "mutual")}
    assert vals["coherent"] + spectrum_entropy(rho) == pytest.approx(vals["mutual"], abs=1e-10)
    assert vals["reverse"] + spectrum_entropy(apply(phi, rho)) == pytest.approx(vals["mutual"], abs=1e-10)
    bip = purified_informations(phi, rho)
    for kind, v in vals.items():
        assert v == pytest.approx(bip[kind], abs=1e-9)


@pytest.mark.parametrize("kind", ["coherent", "reverse", "mutual"])
def test_gradient_matches_finite_differences(kind):
    rng = RandomSource(77)
    phi = random_channel(3, 2, 3, rng)
    for _ in range(10):
        rho = random_density(3, rng)
        _, gam = information_gradient(phi, rho, kind)
        h = rng.ginibre(3, 3)
        h = h + h.conj().T
        h -= np.trace(h) / 3 * np.eye(3)
        eps = 1e-5
        fd = (channel_information(phi, rho + eps * h, kind) - channel_information(phi, rho - eps * h, kind)) / (2 * eps)
        an = float(np.real(np.trace(gam @ h)))
        assert abs(fd - an) <= 1e-4 * max(1.0, abs(an))


# optimizer


def test_optimizer_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValueError):
        OptimizerConfig(grad_tol=0)
    with pytest.raises(ValueError):
        OptimizerConfig(shrink=1.0)
    with pytest.raises(ValueError):
        maximize_information(dephasing(0.5), "holevo")


def test_first_best_breaks_ties_by_index():
    assert _first_best([0.1, 0.3, 0.3 - 1e-14, 0.3]) == 1
    assert _first_best([0.5, 0.2]) == 0


@pytest.mark.parametrize("q", [0.0, 0.3, 0.7, 1.0])
def test_dephasing_coherent_maximum(q):
    res = maximize_information(dephasing(q), "coherent", FAST)
    assert res.value == pytest.approx(np.log(2) - binary_entropy((1 + q) / 2), abs=1e-3)


def test_opt_result_invariants():
    phi = depolarizing(3, 0.7)
    for kind in ("coherent", "reverse", "mutual"):
        res = maximize_information(phi, kind, FAST)
        assert res.value == pytest.approx(max(res.restart_values), abs=TIE_TOL)
        assert res.value == pytest.approx(channel_information(phi, res.argmax, kind), abs=1e-9)
        assert res.labels[:2] == ["maximally_mixed", "pure_e1"]
        assert len(res.restart_values) == 2 + FAST.restarts
        assert res.restart_values[res.best_index] == res.value


def test_optimizer_is_deterministic():
    phi = depolarizing(2, 0.6)
    a = maximize_information(phi, "coherent", FAST)
    b = maximize_information(phi, "coherent", FAST)
    assert a.restart_values == b.restart_values


@pytest.mark.parametrize("n", [2, 3])
def test_pauli_mutual_information_equals_tau(n):
    spec = pauli_spec(n)
    for s in range(5):
        f = random_symbol(spec.symbol, RandomSource(100 + s))
        res = maximize_information(vn_channel(spec, f), "mutual", FAST)
        assert res.value == pytest.approx(f.tau_flnf(), abs=1e-5)


def test_mutual_is_restart_stable():
    spec = group_random_unitary_spec(S3)
    f = random_symbol(spec.symbol, RandomSource(5))
    res = maximize_information(vn_channel(spec, f), "mutual", OptimizerConfig(restarts=6))
    assert max(res.restart_values) - min(res.restart_values) < 1e-6


@pytest.mark.parametrize("make", [lambda: group_random_unitary_spec(S3), lambda: crossed_product_spec(Z3, "local")])
def test_reverse_attained_at_maximally_mixed(make):
    spec = make()
    f = random_symbol(spec.symbol, RandomSource(9))
    res = maximize_information(vn_channel(spec, f), "reverse", FAST)
    assert res.value == pytest.approx(f.tau_flnf(), abs=1e-4)
    assert np.abs(res.argmax - np.eye(spec.m) / spec.m).max() < 1e-2


def test_data_processing():
    rng = RandomSource(31)
    phi = depolarizing(2, 0.9)
    mix = make_channel([np.sqrt(w) * haar_unitary(2, rng) for w in (0.5, 0.3, 0.2)])
    before = maximize_information(phi, "coherent", FAST).value
    after = maximize_information(compose(phi, mix), "coherent", FAST).value
    assert after <= before + 1e-6


def test_direct_sum_takes_best_branch():
    s = direct_sum([dephasing(1.0), dephasing(0.0)])
    assert maximize_information(s, "coherent", FAST).value == pytest.approx(np.log(2), abs=1e-3)


# Schatten ratios


def test_q_p_ratio_examples():
    phi = depolarizing(2, 0.5)
    assert q_p_ratio(phi, 1.0001, FAST).value == pytest.approx(1.0, abs=1e-3)
    assert q_p_ratio(partial_trace_channel(2, 2), 2, FAST).value == pytest.approx(np.sqrt(2), rel=1e-2)
    assert q_p_ratio(partial_trace_channel(3, 2), 2, FAST).value == pytest.approx(np.sqrt(3), rel=1e-2)
    e = conditional_expectation(SubalgebraSpec(((2, 2),)))
    assert q_p_ratio(e, 2, FAST).value == pytest.approx(np.sqrt(2), rel=1e-2)
    with pytest.raises(ValueError):
        q_p_ratio(phi, 1.0)


@pytest.mark.parametrize("blocks,dm", [(((2, 2),), 2), (((3, 1), (1, 3)), 3)])
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_conditional_expectation_ratio_at_structured_start(blocks, dm, p):
    spec = SubalgebraSpec(blocks)
    e = conditional_expectation(spec)
    v = spec.largest_block_vectors()
    psi = largest_block_entangled(v)
    assert q_p_ratio_at(e, psi, p) == pytest.approx(dm ** (1 - 1 / p), abs=1e-9)


def test_identity_ratio_is_dimension_power():
    for p in (2.0, 3.0):
        assert q_p_ratio_at(identity_channel(3), np.eye(3).reshape(-1) / np.sqrt(3), p) == pytest.approx(
            3 ** (1 - 1 / p), abs=1e-12)


def test_ratio_infinite_p_is_scored_exactly():
    res = q_p_ratio(identity_channel(2), INF, FAST)
    # rank-one output of norm 1 against a maximally mixed marginal of norm 1/2
    assert res.value == pytest.approx(2.0, abs=1e-9)


def test_reference_cap_is_enough():
    phi = depolarizing(2, 0.6)
    small = q_p_ratio(phi, 2, FAST, dim_ref=2)
    embedded = np.zeros((4, 2), dtype=complex)
    embedded[:2] = small.argmax.reshape(2, 2)
    big = q_p_ratio(phi, 2, FAST, dim_ref=4, starts=(embedded.reshape(-1),))
    assert small.value <= big.value + 1e-6
    assert big.value <= small.value + 1e-6


def test_ratio_amplification_by_identity():
    phi = dephasing(0.6)
    base = q_p_ratio(phi, 2, FAST).value
    amp = q_p_ratio(tensor(identity_channel(2), phi), 2, FAST).value
    assert amp / base == pytest.approx(np.sqrt(2), rel=5e-2)


# vector-valued Choi norms


def test_choi_norm_of_tp_map_at_p1(rng):
    for phi in (depolarizing(3, 0.2), dephasing(0.4), random_channel(2, 3, 2, rng)):
        assert choi_vv_norm(choi(phi), phi.dim_in, 1) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        choi_vv_norm(choi(dephasing(0.4)), 2, 0.5)


@pytest.mark.parametrize("p", [1, 2, 3, INF])
def test_choi_norm_pauli(p):
    spec = pauli_spec(2)
    for s in range(3):
        f = random_symbol(spec.symbol, RandomSource(40 + s))
        chi = choi(vn_channel(spec, f))
        mu = 0.5
        expected = (mu if p == INF else mu ** (1 - 1 / p)) * f.norm(p)
        assert choi_vv_norm(chi, 2, p) == pytest.approx(expected, abs=1e-3)


def test_choi_norm_log_derivative_gives_cb_entropy():
    spec = pauli_spec(2)
    f = random_symbol(spec.symbol, RandomSource(4))
    h = 1e-3
    chi = choi(vn_channel(spec, f))
    slope = (np.log(choi_vv_norm(chi, 2, 1 + h)) - np.log(choi_vv_norm(chi, 2, 1))) / h
    assert slope == pytest.approx(np.log(0.5) + f.tau_flnf(), abs=5e-3)


# comparison inequalities

PROBE_SPECS = {
    "ru_Z3": lambda: group_random_unitary_spec(Z3),
    "ru_S3": lambda: group_random_unitary_spec(S3),
    "schur_S3": lambda: group_schur_spec(S3),
    "pauli_2": lambda: pauli_spec(2),
    "pauli_3": lambda: pauli_spec(3),
    "clifford_1": lambda: clifford_spec(2),
    "crossed_local_Z3": lambda: crossed_product_spec(Z3, "local"),
    "crossed_charge_Z3": lambda: crossed_product_spec(Z3, "charge"),
    "nonunital_S3": lambda: nonunital_spec(S3),
}


@pytest.mark.parametrize("name", sorted(PROBE_SPECS))
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, INF])
def test_comparison_slacks(name, p):
    spec = PROBE_SPECS[name]()
    rng = RandomSource(hash((name, p)) % 2**32)
    f = random_symbol(spec.symbol, rng)
    lo, up = comparison_probe(spec, f, p, 50, rng)
    assert lo >= -1e-9 and up >= -1e-9


def test_comparison_with_unit_density_is_tight(rng):
    spec = group_random_unitary_spec(Z3)
    lo, up = comparison_probe(spec, uniform(spec.symbol), 2, 10, rng)
    assert lo == pytest.approx(0, abs=1e-12) and up == pytest.approx(0, abs=1e-12)


def test_comparison_two_density_form(rng):
    spec = group_random_unitary_spec(S3)
    f1, f2 = random_symbol(spec.symbol, rng), random_symbol(spec.symbol, rng)
    out = comparison_probe(spec, f1, 2, 20, rng, f2=f2)
    assert len(out) == 3 and min(out) >= -1e-9


def test_comparison_rejects_failing_spec():
    from opcap.channels import VNChannelSpec

    spec = group_random_unitary_spec(S3)
    ys = list(spec.ys)
    ys[0] = np.zeros_like(ys[0])
    broken = VNChannelSpec(spec.xs, tuple(ys), spec.symbol)
    with pytest.raises(ValueError):
        comparison_probe(broken, uniform(spec.symbol), 2, 2, RandomSource(0))


# entropy from p-norms


def test_entropy_pnorm_derivative_examples(rng):
    assert entropy_pnorm_derivative(np.eye(2) / 2, 1e-3) == pytest.approx(np.log(2), abs=1e-3)
    assert entropy_pnorm_derivative(proj(np.eye(3)[0]), 0.05) == pytest.approx(0, abs=1e-14)
    for _ in range(5):
        rho = random_density(4, rng)
        assert entropy_pnorm_derivative(rho, 1e-4) == pytest.approx(spectrum_entropy(rho), abs=1e-3)
    for bad in (0.0, 0.2):
        with pytest.raises(ValueError):
            entropy_pnorm_derivative(np.eye(2) / 2, bad)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 6))
def test_entropy_pnorm_derivative_series(seed, d):
    rho = random_density(d, RandomSource(seed))
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-15]
    h = 1e-3
    # second-order eigenvalue expansion of (1 - ||rho||_{1+h}) / h
    ent = spectrum_entropy(rho)
    second = 0.5 * np.sum(w * np.log(w) ** 2) + ent
    assert entropy_pnorm_derivative(rho, h) == pytest.approx(ent - h * second, abs=1e-5)


# CQE triples


def test_cqe_maximally_entangled_triple():
    spec = group_random_unitary_spec(S3)
    f = random_symbol(spec.symbol, RandomSource(2))
    t, m = f.tau_flnf(), spec.m
    tri = cqe_triple(vn_channel(spec, f), maximally_entangled_ensemble(m))
    assert tri.as_array() == pytest.approx([0, 0.5 * (np.log(m) + t), 0.5 * (-np.log(m) + t)], abs=1e-9)


def test_cqe_classical_identity():
    ens = [(1 / 3, np.kron(np.eye(3)[i], np.eye(3)[i])) for i in range(3)]
    tri = cqe_triple(identity_channel(3), ens)
    assert tri.C == pytest.approx(np.log(3), abs=1e-12)
    assert tri.Q == pytest.approx(0, abs=1e-12) and tri.E == pytest.approx(0, abs=1e-12)


def test_cqe_shift_random_ensembles():
    spec = group_random_unitary_spec(Z3)
    rng = RandomSource(12)
    f = random_symbol(spec.symbol, rng)
    th, th1 = vn_channel(spec, f), vn_channel(spec, uniform(spec.symbol))
    for _ in range(20):
        probs = rng.gen.dirichlet(np.ones(3))
        ens = [(float(p), random_pure_bipartite(3, 3, rng)) for p in probs]
        assert cqe_shift_check(cqe_triple(th, ens), cqe_triple(th1, ens), f.tau_flnf())


def test_cqe_shift_arithmetic():
    tf, t1 = RateTriple(1.0, 0.5, -0.2), RateTriple(0.2, 0.1, 0.0)
    assert cqe_shift(tf, t1, 0.4) == pytest.approx([2 * 0.2 + 0.4, 0.2 - 0.4, 0.4 + 0.2 - 0.4])
    assert not cqe_shift_check(tf, t1, 0.4)
    assert cqe_shift_check(t1, t1, 0.0)


def test_cqe_invalid_ensembles():
    with pytest.raises(ValueError):
        cqe_triple(identity_channel(2), [(0.5, np.eye(4)[0])])
    with pytest.raises(ValueError):
        cqe_triple(identity_channel(2), [(1.0, 2 * np.eye(4)[0])])
