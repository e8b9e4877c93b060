import numpy as np
import pytest
from numpy.testing import assert_allclose

from qdiscord.linalg import binary_entropy, partial_trace, von_neumann_entropy
from qdiscord.measures import (
    classical_correlation,
    concurrence,
    concurrence_r_matrix,
    conditional_entropy_bloch,
    conditional_entropy_bloch_batch,
    conditional_entropy_direct,
    eof_from_concurrence,
    mutual_information,
)
from qdiscord.povm import four_element, orthogonal_pair, planar_three
from qdiscord.states import (
    bell_state,
    classical_correlated,
    maximally_mixed,
    mdms_state,
    product_state,
    random_state,
    to_bloch,
)


def haar_unitary(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_povm(rng):
    """A feasible random POVM with m drawn from {2, 3, 4}."""
    m = int(rng.integers(2, 5))
    while True:
        if m == 2:
            return orthogonal_pair(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
        if m == 3:
            p = planar_three(
                (rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)),
                rng.uniform(0, 2 * np.pi),
                rng.uniform(0, 2 * np.pi),
                rng.uniform(0, 2 * np.pi),
            )
        else:
            p = four_element(
                (rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)),
                tuple(
                    rng.uniform(0, np.pi) if j % 2 == 0 else rng.uniform(0, 2 * np.pi)
                    for j in range(6)
                ),
            )
        if p is not None:
            return p


class TestMutualInformation:
    def test_product(self):
        rho = product_state(np.diag([0.8, 0.2]), np.diag([0.4, 0.6]))
        assert mutual_information(rho) == pytest.approx(0.0, abs=1e-12)

    def test_bell(self):
        assert mutual_information(bell_state("phi+")) == pytest.approx(2.0, abs=1e-12)

    def test_classical(self):
        assert mutual_information(classical_correlated(0.5)) == pytest.approx(1.0, abs=1e-12)


class TestConditionalEntropyDirect:
    def test_bell_any_pair(self):
        rho = bell_state("phi+")
        for theta, phi in [(0.0, 0.0), (1.1, 2.2), (np.pi / 2, 0.7)]:
            breakdown = conditional_entropy_direct(rho, orthogonal_pair(theta, phi))
            assert breakdown.total == pytest.approx(0.0, abs=1e-12)

    def test_maximally_mixed(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            breakdown = conditional_entropy_direct(maximally_mixed(), random_povm(rng))
            assert breakdown.total == pytest.approx(1.0, abs=1e-12)

    def test_classical_bases(self):
        rho = classical_correlated(0.5)
        z = conditional_entropy_direct(rho, orthogonal_pair(0.0, 0.0))
        x = conditional_entropy_direct(rho, orthogonal_pair(np.pi / 2, 0.0))
        assert z.total == pytest.approx(0.0, abs=1e-12)
        assert x.total == pytest.approx(1.0, abs=1e-12)

    def test_probabilities_sum(self):
        rng = np.random.default_rng(3)
        breakdown = conditional_entropy_direct(random_state(4, 8), random_povm(rng))
        assert breakdown.probabilities.sum() == pytest.approx(1.0, abs=1e-10)
        assert_allclose(breakdown.lambdas.sum(axis=1), 1.0, atol=1e-12)


class TestConditionalEntropyBloch:
    def test_singlet_any_direction(self):
        form = to_bloch(bell_state("psi-"))
        rng = np.random.default_rng(5)
        for _ in range(10):
            p = orthogonal_pair(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
            breakdown = conditional_entropy_bloch(form, p)
            assert breakdown.total == pytest.approx(0.0, abs=1e-12)
            assert_allclose(np.sort(breakdown.lambdas[0]), [0.0, 1.0], atol=1e-12)

    def test_no_correlations(self):
        form = to_bloch(maximally_mixed())
        breakdown = conditional_entropy_bloch(form, orthogonal_pair(0.3, 0.4))
        assert breakdown.total == pytest.approx(1.0, abs=1e-12)
        assert_allclose(breakdown.lambdas, 0.5, atol=1e-12)

    def test_cross_path_identity(self):
        # acceptance criterion 3 runs 1000 tuples; this is the fast version
        rng = np.random.default_rng(12)
        for _ in range(120):
            rho = random_state(int(rng.integers(1, 5)), int(rng.integers(0, 10**6)))
            povm = random_povm(rng)
            direct = conditional_entropy_direct(rho, povm).total
            bloch = conditional_entropy_bloch(to_bloch(rho), povm).total
            assert abs(direct - bloch) <= 1e-12

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(21)
        rho = random_state(3, 1234)
        form = to_bloch(rho)
        for _ in range(40):
            povm = random_povm(rng)
            scalar = conditional_entropy_bloch(form, povm).total
            batch = conditional_entropy_bloch_batch(
                form.a,
                form.b,
                form.t,
                povm.alphas[None, :],
                povm.directions[None, :, :],
            )[0]
            assert abs(scalar - batch) <= 1e-13


class TestClassicalCorrelation:
    def test_bell(self):
        rho = bell_state("phi+")
        breakdown = conditional_entropy_direct(rho, orthogonal_pair(0.0, 0.0))
        assert classical_correlation(rho, breakdown) == pytest.approx(1.0, abs=1e-12)

    def test_product(self):
        rho = product_state(np.diag([0.8, 0.2]), np.diag([0.4, 0.6]))
        breakdown = conditional_entropy_direct(rho, orthogonal_pair(0.0, 0.0))
        assert classical_correlation(rho, breakdown) == pytest.approx(0.0, abs=1e-12)

    def test_identity_with_mutual_information(self):
        # I - J = delta must hold by construction when assembled together
        rho = mdms_state(0.11, 0.2349602)
        breakdown = conditional_entropy_direct(rho, orthogonal_pair(0.2, 1.0))
        info = mutual_information(rho)
        j = classical_correlation(rho, breakdown)
        s_b = von_neumann_entropy(partial_trace(rho, "A"))
        s_ab = von_neumann_entropy(rho)
        delta = s_b - s_ab + breakdown.total
        assert info - j == pytest.approx(delta, abs=1e-10)


class TestConcurrence:
    def test_bell(self):
        assert concurrence(bell_state("phi+")) == pytest.approx(1.0, abs=1e-12)

    def test_product(self):
        rho = product_state(np.diag([0.8, 0.2]), np.diag([0.4, 0.6]))
        assert concurrence(rho) == pytest.approx(0.0, abs=1e-12)

    def test_agrees_with_r_matrix_path(self):
        for seed in range(60):
            rho = random_state(2 + seed % 3, seed)
            assert abs(concurrence(rho) - concurrence_r_matrix(rho)) <= 1e-9

    def test_local_unitary_invariance(self):
        rng = np.random.default_rng(17)
        for seed in range(30):
            rho = random_state(2, seed)
            u = np.kron(haar_unitary(2, rng), haar_unitary(2, rng))
            rotated = u @ rho @ u.conj().T
            assert abs(concurrence(rotated) - concurrence(rho)) <= 1e-10

    def test_decomposition_sampling_bound(self):
        # E_F from concurrence lower-bounds the average entanglement of any
        # sampled pure-state decomposition rho = sum_j |phi_j><phi_j| built
        # from the eigendecomposition via random isometries
        from qdiscord.linalg import hermitian_eigensystem

        rng = np.random.default_rng(23)
        for seed in range(10):
            rho = random_state(2, seed)
            eof = eof_from_concurrence(concurrence(rho))
            eig = hermitian_eigensystem(rho)
            lam = np.clip(eig.values[:2], 0.0, None)
            vecs = eig.vectors[:, :2]
            for _ in range(10):
                k = int(rng.integers(2, 5))
                g = rng.standard_normal((k, 2)) + 1j * rng.standard_normal((k, 2))
                v = np.linalg.qr(g)[0][:, :2]  # k x 2 isometry, V^dag V = 1
                unnorm = (v * np.sqrt(lam)) @ vecs.T  # rows are sqrt(p_j) |phi_j>
                avg = 0.0
                for row in unnorm:
                    p = float(np.real(np.vdot(row, row)))
                    if p < 1e-14:
                        continue
                    m = (row / np.sqrt(p)).reshape(2, 2)
                    avg += p * von_neumann_entropy(m @ m.conj().T)
                assert eof <= avg + 1e-9


class TestEofFromConcurrence:
    def test_endpoints(self):
        assert eof_from_concurrence(0.0) == 0.0
        assert eof_from_concurrence(1.0) == pytest.approx(1.0, abs=1e-12)

    def test_direct_formula(self):
        assert eof_from_concurrence(0.6) == pytest.approx(binary_entropy(0.9), abs=1e-14)

    def test_monotone(self):
        cs = np.linspace(0.0, 1.0, 21)
        vals = [eof_from_concurrence(c) for c in cs]
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))

    def test_domain(self):
        with pytest.raises(ValueError):
            eof_from_concurrence(1.1)
