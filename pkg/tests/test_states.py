import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qdiscord.linalg import partial_trace, von_neumann_entropy
from qdiscord.states import (
    BLOCH_CSV_HEADER,
    RankError,
    bell_state,
    bloch_csv_row,
    classical_correlated,
    from_bloch,
    load_state,
    maximally_mixed,
    mdms_state,
    perturbed_mdms,
    product_state,
    purify,
    random_state,
    reduced_ac,
    save_state,
    state_from_dict,
    state_to_dict,
    swap_parties,
    to_bloch,
    validate,
)


class TestValidate:
    def test_maximally_mixed(self):
        report = validate(maximally_mixed())
        assert report.is_valid
        assert report.rank == 4

    def test_pure_bell(self):
        report = validate(bell_state("phi+"))
        assert report.is_valid
        assert report.rank == 1

    def test_bad_trace(self):
        report = validate(np.diag([0.6, 0.5, 0.0, 0.0]))
        assert not report.is_valid
        assert report.trace_deviation == pytest.approx(0.1, abs=1e-12)


class TestBloch:
    def test_singlet(self):
        form = to_bloch(bell_state("psi-"))
        assert_allclose(form.a, 0.0, atol=1e-12)
        assert_allclose(form.b, 0.0, atol=1e-12)
        assert_allclose(form.t, np.diag([-1.0, -1.0, -1.0]), atol=1e-12)

    def test_polarized_product(self):
        rho_a = np.diag([1.0, 0.0])
        form = to_bloch(product_state(rho_a, np.eye(2) / 2))
        assert_allclose(form.a, [0.0, 0.0, 1.0], atol=1e-12)
        assert_allclose(form.b, 0.0, atol=1e-12)
        assert_allclose(form.t, 0.0, atol=1e-12)

    def test_classical(self):
        form = to_bloch(classical_correlated(0.5))
        assert_allclose(form.a, 0.0, atol=1e-12)
        assert_allclose(form.b, 0.0, atol=1e-12)
        assert_allclose(form.t, np.diag([0.0, 0.0, 1.0]), atol=1e-12)

    def test_round_trip_random(self):
        for seed in range(500):
            rho = random_state(4 if seed % 2 else 3, seed)
            back = from_bloch(to_bloch(rho))
            assert np.max(np.abs(back - rho)) <= 1e-12

    def test_unphysical_rejected(self):
        form = to_bloch(bell_state("phi+"))
        form.t *= 2.0
        with pytest.raises(ValueError):
            from_bloch(form)

    def test_csv_row(self):
        row = bloch_csv_row(to_bloch(classical_correlated(0.5)))
        assert len(row.split(",")) == 15
        assert len(BLOCH_CSV_HEADER.split(",")) == 15


class TestRandomState:
    def test_pure(self):
        rho = random_state(1, 9)
        assert von_neumann_entropy(rho) <= 1e-9

    def test_rank_counts(self):
        for rank in (1, 2, 3, 4):
            for seed in (0, 1, 2, 3, 4):
                report = validate(random_state(rank, seed))
                assert report.rank == rank
                assert report.is_valid

    def test_mean_eigenvalue_full_rank(self):
        from qdiscord.linalg import hermitian_eigensystem

        vals = []
        for seed in range(1000):
            vals.append(hermitian_eigensystem(random_state(4, seed)).values.mean())
        assert abs(np.mean(vals) - 0.25) <= 0.02

    def test_deterministic(self):
        assert_allclose(random_state(3, 77), random_state(3, 77))

    def test_bad_rank(self):
        with pytest.raises(ValueError):
            random_state(5, 0)


class TestMdms:
    def test_paper_point_is_rank3(self):
        rho = mdms_state(0.11, 0.2349602)
        report = validate(rho)
        assert report.is_valid
        assert report.rank == 3

    def test_eigenvalues_sum(self):
        from qdiscord.linalg import hermitian_eigensystem

        rho = mdms_state(0.11, 0.2349602)
        assert hermitian_eigensystem(rho).values.sum() == pytest.approx(1.0, abs=1e-12)

    def test_eps_limit(self):
        rho = mdms_state(0.5, 1e-9)
        assert np.max(np.abs(rho - classical_correlated(0.5))) <= 1e-8

    def test_domain(self):
        with pytest.raises(ValueError):
            mdms_state(0.0, 0.1)
        with pytest.raises(ValueError):
            mdms_state(0.1, 1.0)

    def test_perturbed_endpoints(self):
        base = mdms_state(0.11, 0.2349602)
        assert_allclose(perturbed_mdms(base, 0.0), base)
        assert_allclose(perturbed_mdms(base, 1.0), bell_state("phi+"))

    def test_perturbed_paper_lambda(self):
        base = mdms_state(0.11, 0.2349602)
        report = validate(perturbed_mdms(base, 0.002))
        assert report.is_valid
        assert report.rank <= 4

    def test_perturbed_domain(self):
        with pytest.raises(ValueError):
            perturbed_mdms(mdms_state(0.5, 0.5), 1.5)


class TestPurify:
    def test_pure_input(self):
        psi = purify(bell_state("phi+"))
        assert psi.dims[2] == 1
        assert np.max(np.abs(psi.trace_out_ancilla() - bell_state("phi+"))) <= 1e-10

    def test_classical_mixture(self):
        psi = purify(classical_correlated(0.5))
        assert psi.dims[2] == 2
        assert np.max(np.abs(psi.trace_out_ancilla() - classical_correlated(0.5))) <= 1e-10

    def test_round_trip_all_ranks(self):
        for seed in range(125):
            for rank in (1, 2, 3, 4):
                rho = random_state(rank, seed)
                psi = purify(rho)
                assert psi.dims[2] == rank
                assert abs(np.linalg.norm(psi.amplitudes) - 1.0) <= 1e-12
                assert np.max(np.abs(psi.trace_out_ancilla() - rho)) <= 1e-10


class TestReducedAc:
    def test_pure_entangled(self):
        # C is 1-dimensional, padded: rho_AC = rho_A x |0><0|
        rho_ac = reduced_ac(bell_state("phi+"))
        expected = np.kron(np.eye(2) / 2, np.diag([1.0, 0.0]))
        assert_allclose(rho_ac, expected, atol=1e-12)

    def test_classical_mixture_by_hand(self):
        # |Psi> = (|000> + |111>)/sqrt(2) traced over B leaves the classical
        # A-C mixture (|00><00| + |11><11|)/2, worked out by hand
        rho_ac = reduced_ac(classical_correlated(0.5))
        expected = np.zeros((4, 4))
        expected[0, 0] = 0.5
        expected[3, 3] = 0.5
        assert_allclose(rho_ac, expected, atol=1e-12)

    def test_marginal_consistency(self):
        for seed in range(100):
            rho = random_state(2, seed)
            rho_ac = reduced_ac(rho)
            report = validate(rho_ac)
            assert report.is_valid
            assert report.rank <= 2
            # tr_C rho_AC equals tr_B rho_AB
            assert np.max(
                np.abs(partial_trace(rho_ac, "B") - partial_trace(rho, "B"))
            ) <= 1e-10

    def test_rank_error(self):
        with pytest.raises(RankError):
            reduced_ac(maximally_mixed())


class TestConstructors:
    def test_bells(self):
        for which in ("phi+", "phi-", "psi+", "psi-"):
            report = validate(bell_state(which))
            assert report.is_valid
            assert report.rank == 1
        assert_allclose(partial_trace(bell_state("psi-"), "A"), np.eye(2) / 2, atol=1e-14)

    def test_unknown_bell(self):
        with pytest.raises(ValueError):
            bell_state("sigma+")

    def test_classical(self):
        rho = classical_correlated(0.5)
        assert_allclose(np.diag(rho), [0.5, 0.0, 0.0, 0.5])

    def test_swap(self):
        rho_a = np.diag([1.0, 0.0])
        rho = product_state(rho_a, np.eye(2) / 2)
        swapped = swap_parties(rho)
        assert_allclose(swapped, product_state(np.eye(2) / 2, rho_a))
        assert_allclose(swap_parties(swapped), rho)


class TestStateFiles:
    def test_round_trip(self, tmp_path):
        rho = random_state(3, 5)
        path = tmp_path / "state.json"
        save_state(rho, str(path))
        assert np.max(np.abs(load_state(str(path)) - rho)) == 0.0

    def test_dict_round_trip(self):
        rho = mdms_state(0.11, 0.2349602)
        assert np.max(np.abs(state_from_dict(state_to_dict(rho)) - rho)) == 0.0

    def test_malformed(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"dim": 4, "re": [[1.0]], "im": [[0.0]]}))
        with pytest.raises(ValueError):
            load_state(str(path))

    def test_nonfinite(self):
        data = state_to_dict(maximally_mixed())
        data["re"][0][0] = float("nan")
        with pytest.raises(ValueError):
            state_from_dict(data)
