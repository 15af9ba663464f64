import numpy as np
import pytest

import setensor as st
from oracles import random_symmetric_entries


def random_weak_tensor(rng, n):
    raw = rng.standard_normal((n, n, n, n))
    return st.new_general_tensor4(n, 0.5 * (raw + raw.transpose(1, 0, 3, 2)))


class TestProjectAffine:
    def test_members_are_fixed_points(self, mtensor):
        T = st.new_general_tensor4(mtensor.n, mtensor.entries)
        out = st.project_affine(T, mtensor)
        assert np.allclose(out.entries, mtensor.entries, atol=1e-15)

    def test_zero_input_projects_to_anchor(self, mtensor):
        T = st.new_general_tensor4(2, np.zeros((2, 2, 2, 2)))
        out = st.project_affine(T, mtensor)
        assert np.array_equal(out.entries, mtensor.entries)

    def test_constraints_hold_exactly(self, mpsd_boundary, rng):
        T = random_weak_tensor(rng, 3)
        out = st.project_affine(T, mpsd_boundary).entries
        pair_sum = out + out.transpose(1, 0, 2, 3)
        assert np.array_equal(pair_sum, 2.0 * mpsd_boundary.entries)
        assert np.array_equal(out, out.transpose(1, 0, 3, 2))

    def test_idempotent(self, mtensor, rng):
        T = random_weak_tensor(rng, 2)
        once = st.project_affine(T, mtensor)
        twice = st.project_affine(once, mtensor)
        assert np.allclose(once.entries, twice.entries, atol=1e-15)

    def test_nonexpansive(self, mtensor, rng):
        for _ in range(10):
            U = random_weak_tensor(rng, 2)
            V = random_weak_tensor(rng, 2)
            pu = st.project_affine(U, mtensor)
            pv = st.project_affine(V, mtensor)
            lhs = np.linalg.norm(pu.entries - pv.entries)
            rhs = np.linalg.norm(U.entries - V.entries)
            assert lhs <= rhs + 1e-10

    def test_dimension_mismatch(self, mtensor, rng):
        T = random_weak_tensor(rng, 3)
        with pytest.raises(st.DimensionMismatch):
            st.project_affine(T, mtensor)


class TestProjectPsd:
    def test_psd_input_unchanged(self, identity2):
        T = st.new_general_tensor4(2, identity2.entries)
        out = st.project_psd(T)
        assert np.allclose(out.entries, identity2.entries, atol=1e-12)

    def test_mtensor_eigenvalue_clipping(self, mtensor):
        T = st.new_general_tensor4(2, mtensor.entries)
        out = st.project_psd(T)
        w = np.sort(np.linalg.eigvalsh(st.unfold(out, "x").matrix))
        assert np.allclose(w, [0.0, 6.0, 9.222068, 16.611048], atol=1e-5)

    def test_diagonal_clipping(self):
        raw = np.zeros((2, 2, 2, 2))
        raw[0, 0, 0, 0] = 1.0
        raw[1, 1, 1, 1] = -1.0
        T = st.new_general_tensor4(2, raw)
        out = st.project_psd(T)
        w = np.linalg.eigvalsh(st.unfold(out, "x").matrix)
        assert w.min() >= -1e-12
        assert out.entries[0, 0, 0, 0] == pytest.approx(1.0)
        assert out.entries[1, 1, 1, 1] == pytest.approx(0.0, abs=1e-14)

    def test_idempotent_and_nonexpansive(self, rng):
        for _ in range(10):
            U = random_weak_tensor(rng, 2)
            V = random_weak_tensor(rng, 2)
            pu = st.project_psd(U)
            pv = st.project_psd(V)
            again = st.project_psd(pu)
            assert np.allclose(pu.entries, again.entries, atol=1e-10)
            lhs = np.linalg.norm(pu.entries - pv.entries)
            rhs = np.linalg.norm(U.entries - V.entries)
            assert lhs <= rhs + 1e-10

    def test_asymmetric_unfolding_rejected(self):
        raw = np.zeros((2, 2, 2, 2))
        raw[0, 1, 0, 1] = 1.0  # breaks weak symmetry
        T = st.GeneralTensor4(n=2, entries=raw)
        with pytest.raises(st.AsymmetricUnfolding):
            st.project_psd(T)


class TestPocsVerify:
    def test_boundary_tensor_certified_psd(self, mpsd_boundary):
        out = st.pocs_verify(mpsd_boundary, epsilon=0.0, max_iter=10000)
        assert out.status == st.CERTIFIED_M_PSD
        assert out.certificate is not None
        assert out.certificate.rank() == 2
        assert out.certificate.reconstruction_error(mpsd_boundary) <= 1e-8
        assert out.diagnostics["iterations"] <= 10000

    def test_identity_strict_certificate(self, identity3):
        out = st.pocs_verify(identity3, epsilon=0.5)
        assert out.status == st.CERTIFIED_M_PD
        assert out.diagnostics["iterations"] <= 2
        err = out.certificate.reconstruction_error(identity3)
        assert err <= 1e-10

    def test_negative_diagonal_inconclusive(self):
        raw = np.zeros((3, 3, 3, 3))
        raw[0, 0, 0, 0] = -1.0
        A = st.new_elasticity_tensor(3, raw)
        out = st.pocs_verify(A, epsilon=0.0)
        assert out.status == st.INCONCLUSIVE
        assert out.certificate is None
        assert out.diagnostics["stalled"] is True

    def test_residual_history_nonincreasing(self, rng):
        for _ in range(5):
            A = st.new_elasticity_tensor(2, random_symmetric_entries(rng, 2))
            out = st.pocs_verify(A, epsilon=0.0, max_iter=3000)
            hist = out.state.history
            assert np.all(np.diff(hist) <= 1e-12)

    def test_iterates_preserve_biquadratic_form(self, mpsd_boundary, rng):
        eps = 0.25
        out = st.pocs_verify(mpsd_boundary, epsilon=eps, max_iter=50)
        A_t = out.state.A_t
        for _ in range(10):
            x = rng.standard_normal(3)
            y = rng.standard_normal(3)
            expected = st.contract_xxyy(mpsd_boundary, x, y) - eps * (x @ x) * (y @ y)
            got = st.contract_xxyy(A_t, x, y)
            assert got == pytest.approx(expected, rel=1e-9, abs=1e-9)

    def test_certified_form_nonnegative_on_samples(self, mpsd_boundary, rng):
        out = st.pocs_verify(mpsd_boundary, epsilon=0.0, max_iter=10000)
        assert out.status == st.CERTIFIED_M_PSD
        X = rng.standard_normal((10000, 3))
        Y = rng.standard_normal((10000, 3))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
        vals = np.einsum(
            "ijkl,pi,pj,pk,pl->p", mpsd_boundary.entries, X, X, Y, Y,
            optimize=True,
        )
        assert vals.min() >= -1e-8

    def test_strict_certificate_bounds_form_from_below(self, mtensor, rng):
        eps = 0.1
        out = st.pocs_verify(mtensor, epsilon=eps)
        assert out.status == st.CERTIFIED_M_PD
        X = rng.standard_normal((10000, 2))
        Y = rng.standard_normal((10000, 2))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        Y /= np.linalg.norm(Y, axis=1, keepdims=True)
        vals = np.einsum(
            "ijkl,pi,pj,pk,pl->p", mtensor.entries, X, X, Y, Y, optimize=True
        )
        assert vals.min() >= eps * (1 - 1e-6)

    def test_budget_exhaustion_is_inconclusive(self, mtensor):
        out = st.pocs_verify(mtensor, epsilon=0.0, max_iter=3)
        assert out.status == st.INCONCLUSIVE
        assert out.certificate is None
        assert out.diagnostics["stalled"] is False
        assert out.diagnostics["iterations"] == 3

    def test_negative_epsilon_rejected(self, identity2):
        with pytest.raises(ValueError):
            st.pocs_verify(identity2, epsilon=-0.1)


class TestExtractCertificate:
    def test_identity_full_rank_unit_terms(self, identity2):
        T = st.new_general_tensor4(2, identity2.entries)
        cert = st.extract_certificate(T)
        assert cert.rank() == 4
        assert all(alpha == pytest.approx(1.0) for alpha, _ in cert.terms)
        assert np.allclose(cert.reconstruct(2), identity2.entries, atol=1e-12)

    def test_kron_delta_single_identity_term(self):
        # t_ijkl = [i==k][j==l] is weakly symmetric with rank-one unfolding
        n = 3
        raw = np.einsum("ik,jl->ijkl", np.eye(n), np.eye(n))
        T = st.new_general_tensor4(n, raw)
        cert = st.extract_certificate(T)
        assert cert.rank() == 1
        alpha, U = cert.terms[0]
        assert alpha == pytest.approx(float(n))
        assert np.allclose(np.abs(U), np.eye(n) / np.sqrt(n), atol=1e-12)

    def test_zero_tensor_empty(self):
        T = st.new_general_tensor4(2, np.zeros((2, 2, 2, 2)))
        cert = st.extract_certificate(T)
        assert cert.rank() == 0

    def test_not_psd_rejected(self, mtensor):
        T = st.new_general_tensor4(2, mtensor.entries)
        with pytest.raises(st.NotPsd):
            st.extract_certificate(T)

    def test_reconstruction_against_boundary_tensor(self, mpsd_boundary):
        out = st.pocs_verify(mpsd_boundary, epsilon=0.0, max_iter=10000)
        cert = out.certificate
        rebuilt = cert.reconstruct(3)
        assert np.abs(rebuilt - mpsd_boundary.entries).max() <= 1e-8
        # terms carry the hand-constructed structure: a scaled projector on
        # the (1,2)-plane and the e3 outer product
        alphas = sorted(alpha for alpha, _ in cert.terms)
        assert alphas == pytest.approx([2.0, 4.0], abs=1e-6)

    def test_to_dict_schema(self, identity2):
        T = st.new_general_tensor4(2, identity2.entries)
        cert = st.extract_certificate(T, epsilon=0.25)
        doc = cert.to_dict(reconstruction_error=1e-12)
        assert set(doc) == {"epsilon", "terms", "reconstruction_error"}
        assert doc["epsilon"] == 0.25
        assert all(set(t) == {"alpha", "U"} for t in doc["terms"])
        assert np.asarray(doc["terms"][0]["U"]).shape == (2, 2)
