import numpy as np
import pytest

from qutritlink.errors import InvariantError, ReconstructionError
from qutritlink.linkmodel import crosstalk_channel, parity_dephasing
from qutritlink.qstate import DensityMatrix, random_density_matrix
from qutritlink.tomography import (
    ProcessMatrix,
    apply_process,
    chi_from_kraus,
    default_inputs,
    identity_process,
    kraus_from_chi,
    process_fidelity,
    process_reconstruct,
)


def outputs_of(channel, inputs=None):
    inputs = default_inputs() if inputs is None else inputs
    return [channel.apply(r) for r in inputs]


def test_identity_channel():
    chi = process_reconstruct([r.matrix for r in default_inputs()]).chi
    expected = np.zeros((9, 9))
    expected[0, 0] = 1
    np.testing.assert_allclose(chi, expected, atol=1e-12)


def test_diagonal_phase_unitary():
    u = np.diag(np.exp(1j * np.array([0.3, -1.1, 2.0])))
    outs = [u @ r.matrix @ u.conj().T for r in default_inputs()]
    chi = process_reconstruct(outs)
    assert np.linalg.matrix_rank(chi.chi, tol=1e-9) == 1
    assert process_fidelity(chi, identity_process()) == pytest.approx(abs(np.trace(u)) ** 2 / 9, abs=1e-9)


def test_crosstalk_round_trip():
    ch = crosstalk_channel(0.128)
    chi = process_reconstruct(outputs_of(ch))
    assert np.linalg.norm(chi.chi - chi_from_kraus(ch.kraus)) <= 1e-6


def test_random_inputs_round_trip(rng):
    ch = parity_dephasing(0.37).then(crosstalk_channel(0.2))
    inputs = [random_density_matrix(rng, 3) for _ in range(12)]
    chi = process_reconstruct(outputs_of(ch, inputs), inputs)
    assert np.linalg.norm(chi.chi - chi_from_kraus(ch.kraus)) <= 1e-6
    assert chi.fit_residual < 1e-10


def test_apply_matches_kraus(rng):
    ch = parity_dephasing(0.5)
    rho = random_density_matrix(rng, 3).matrix
    np.testing.assert_allclose(apply_process(chi_from_kraus(ch.kraus), rho), ch.apply(rho), atol=1e-14)
    back = sum(k @ rho @ k.conj().T for k in kraus_from_chi(chi_from_kraus(ch.kraus)))
    np.testing.assert_allclose(back, ch.apply(rho), atol=1e-13)


def test_rank_deficient_inputs():
    inputs = [DensityMatrix(np.diag([1.0, 0, 0]))] * 9
    with pytest.raises(ReconstructionError):
        process_reconstruct(inputs, inputs)


def test_process_matrix_invariants():
    with pytest.raises(InvariantError):
        ProcessMatrix(np.eye(9) / 9)  # not trace preserving
    bad = np.zeros((9, 9), dtype=complex)
    bad[0, 0], bad[1, 1] = 1.5, -0.5
    with pytest.raises(InvariantError):
        ProcessMatrix(bad)


class TestProcessFidelity:
    def test_self(self):
        chi = chi_from_kraus(crosstalk_channel(0.3).kraus)
        assert process_fidelity(chi, chi) == pytest.approx(1, abs=1e-9)

    def test_orthogonal_rank_one(self):
        a = np.zeros((9, 9))
        b = np.zeros((9, 9))
        a[0, 0] = b[3, 3] = 1
        assert process_fidelity(a, b) == pytest.approx(0, abs=1e-12)

    def test_symmetric(self):
        a = chi_from_kraus(crosstalk_channel(0.3).kraus)
        b = chi_from_kraus(parity_dephasing(0.2).kraus)
        assert process_fidelity(a, b) == pytest.approx(process_fidelity(b, a), abs=1e-10)

    def test_raw_basis_differs_from_orthonormal(self):
        chi = chi_from_kraus(parity_dephasing(0.0).kraus)
        raw = process_fidelity(chi, identity_process(), raw=True)
        ortho = process_fidelity(chi, identity_process())
        # Choi-state fidelity with the identity channel is sum_i |Tr K_i|^2 / 9
        k = parity_dephasing(0.0).kraus
        expected = sum(abs(np.trace(ki)) ** 2 for ki in k) / 9
        assert ortho == pytest.approx(expected, abs=1e-12)
        assert raw != pytest.approx(ortho)

    def test_rejects_non_psd(self):
        with pytest.raises(InvariantError):
            process_fidelity(np.diag([1.0, -0.5] + [0] * 7), identity_process())
