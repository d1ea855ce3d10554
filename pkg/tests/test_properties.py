"""Randomized invariants (1000 cases per property)."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qutritlink.linkmodel import (
    FiberModeMap,
    OAM_STATES,
    QuantumChannel,
    apply_channel,
    crosstalk_channel,
    fiber_to_oam,
    oam_to_fiber,
    parity_dephasing,
)
from qutritlink.qstate import (
    BipartiteKet,
    DensityMatrix,
    fidelity_pure,
    partial_trace,
    purity,
    random_density_matrix,
    random_ket,
    schmidt_decompose,
    state_fidelity,
)
from qutritlink.slm import envelope, sinc, sinc_inverse
from qutritlink.witness import CGLMPSettings, LocalBases, certify_dimension, cglmp_value, schmidt_rank_bound

CASES = settings(max_examples=1000, deadline=None, derandomize=True)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_channel(rng, n_kraus):
    """Kraus operators cut from a Haar-random isometry C^3 -> C^(3 n)."""
    z = rng.normal(size=(3 * n_kraus, 3)) + 1j * rng.normal(size=(3 * n_kraus, 3))
    q, _ = np.linalg.qr(z)
    return QuantumChannel(tuple(q[3 * i: 3 * i + 3] for i in range(n_kraus)))


def random_unitary(rng):
    z = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def assert_state(m, dim):
    assert m.shape == (dim, dim)
    assert np.max(np.abs(m - m.conj().T)) <= 1e-12
    assert abs(np.trace(m).real - 1) <= 1e-12
    assert np.linalg.eigvalsh(m)[0] >= -1e-12


@CASES
@given(seeds, st.sampled_from([3, 9]), st.integers(1, 9))
def test_density_matrix_invariants(seed, dim, rank):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(rng, dim, min(rank, dim))
    assert_state(rho.matrix, dim)
    p = purity(rho)
    assert 1 / dim - 1e-12 <= p <= 1 + 1e-12
    assert (abs(p - 1) < 1e-9) == (min(rank, dim) == 1)


@CASES
@given(seeds, st.integers(1, 5))
def test_channel_invariants(seed, n_kraus):
    rng = np.random.default_rng(seed)
    ch = random_channel(rng, n_kraus)
    assert np.max(np.abs(sum(k.conj().T @ k for k in ch.kraus) - np.eye(3))) <= 1e-12
    assert_state(ch.apply(random_density_matrix(rng, 3)), 3)
    out = apply_channel(random_density_matrix(rng, 9), ch.then(crosstalk_channel(rng.uniform())),
                        side=rng.choice(["A", "B"]))
    assert_state(out.matrix, 9)


@CASES
@given(seeds)
def test_unit_gamma_is_identity(seed):
    rho = random_density_matrix(np.random.default_rng(seed), 3).matrix
    np.testing.assert_allclose(parity_dephasing(1.0).apply(rho), rho, atol=1e-14)


@CASES
@given(seeds, st.integers(1, 3))
def test_schmidt_invariants(seed, rank):
    rng = np.random.default_rng(seed)
    c = random_ket(rng, 9).reshape(3, 3)
    u, s, vh = np.linalg.svd(c)
    s[rank:] = 0
    psi = BipartiteKet.normalized(u @ np.diag(s) @ vh)
    dec = schmidt_decompose(psi)
    lam = dec.coefficients
    assert np.all(np.diff(lam) <= 0) and lam[-1] >= 0
    assert abs(np.sum(lam**2) - 1) <= 1e-12
    assert dec.rank == rank
    assert abs(np.vdot(dec.reconstruct().amplitudes, psi.amplitudes)) == pytest.approx(1, abs=1e-12)
    reduced = np.sort(np.linalg.eigvalsh(partial_trace(psi.projector()).matrix))[::-1]
    np.testing.assert_allclose(reduced, lam**2, atol=1e-12)
    bounds = [schmidt_rank_bound(psi, d) for d in (1, 2, 3)]
    assert bounds[0] <= bounds[1] <= bounds[2] == pytest.approx(1, abs=1e-12)


@CASES
@given(seeds, st.floats(0, 2 * np.pi))
def test_fidelity_global_phase(seed, angle):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(rng)
    v = random_ket(rng)
    assert fidelity_pure(rho, v * np.exp(1j * angle)) == pytest.approx(fidelity_pure(rho, v), abs=1e-12)
    assert state_fidelity(rho, rho) == pytest.approx(1, abs=1e-10)


@CASES
@given(seeds, st.floats(0, 1))
def test_rank_two_target_never_certifies_three(seed, p):
    rng = np.random.default_rng(seed)
    c = random_ket(rng, 9).reshape(3, 3)
    u, s, vh = np.linalg.svd(c)
    s[2] = 0
    target = BipartiteKet.normalized(u @ np.diag(s) @ vh)
    rho = DensityMatrix(p * target.projector() + (1 - p) * np.eye(9) / 9)
    assert certify_dimension(rho, target) < 3


@CASES
@given(seeds)
def test_cglmp_algebraic_and_local_bounds(seed):
    rng = np.random.default_rng(seed)
    bases = LocalBases(*(random_unitary(rng) for _ in range(4)))
    assert cglmp_value(random_density_matrix(rng), bases) <= 4 + 1e-12
    product = random_density_matrix(rng, 3).tensor(random_density_matrix(rng, 3))
    assert cglmp_value(product, CGLMPSettings(*rng.uniform(-1, 1, 4))) <= 2 + 1e-12
    assert cglmp_value(product, bases) <= 2 + 1e-12


@CASES
@given(st.sampled_from(OAM_STATES), seeds)
def test_fiber_round_trip(state, seed):
    e = np.zeros(4)
    e[OAM_STATES.index(state)] = 1
    np.testing.assert_allclose(fiber_to_oam(oam_to_fiber(*state)), e, atol=1e-15)
    v = random_ket(np.random.default_rng(seed), 4)
    m = FiberModeMap.standard().matrix
    np.testing.assert_allclose(fiber_to_oam(m @ v), v, atol=1e-14)


@CASES
@given(st.floats(0, 1))
def test_sinc_inverse_accuracy(a):
    x = sinc_inverse(a)
    assert -np.pi <= x <= 0
    assert abs(sinc(x) - a) <= 1e-12
    assert 0 <= envelope(a) <= 1


@CASES
@given(st.floats(0, 1), st.floats(0, 1))
def test_envelope_monotone(a, b):
    lo, hi = sorted((a, b))
    assert envelope(lo) <= envelope(hi)
