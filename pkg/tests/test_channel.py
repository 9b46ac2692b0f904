"""Tests for multipath sampling and the two-hop channel model."""

import numpy as np
import pytest

from ris_anm.channel import (
    Hop,
    PathSet,
    SystemDims,
    build_channel,
    cascaded_channel,
    effective_channel,
    sample_paths,
    vec,
)
from ris_anm.geometry import (
    khatri_rao_cols,
    kronecker,
    steering_matrix,
    steering_vector,
)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


class TestSystemDims:
    def test_paper_defaults(self):
        d = SystemDims()
        assert (d.M_B, d.M_R, d.M_U) == (8, 32, 4)
        assert (d.P_B, d.P_U) == (2, 2)
        assert d.P == d.B * 4

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(M_B=7, N_B=4),
            dict(M_U=5, N_U=2),
            dict(D=2, N_B=4),
            dict(B=33),
            dict(B=0),
            dict(M_R=0),
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SystemDims(**kwargs)


class TestSamplePaths:
    def test_angles_inside_window(self):
        rng = np.random.default_rng(0)
        p = sample_paths(1, Hop.RIS_TO_UE, 30.0, 150.0, rng)
        assert len(p) == 1
        assert 30.0 <= p.aoa_deg[0] <= 150.0
        assert 30.0 <= p.aod_deg[0] <= 150.0

    def test_deterministic_given_seed(self):
        p1 = sample_paths(3, Hop.BS_TO_RIS, 30, 150, np.random.default_rng(7))
        p2 = sample_paths(3, Hop.BS_TO_RIS, 30, 150, np.random.default_rng(7))
        np.testing.assert_array_equal(p1.aoa_deg, p2.aoa_deg)
        np.testing.assert_array_equal(p1.aod_deg, p2.aod_deg)
        np.testing.assert_array_equal(p1.gains, p2.gains)

    def test_gain_moments(self):
        rng = np.random.default_rng(1)
        p = sample_paths(10_000, Hop.RIS_TO_UE, 30, 150, rng)
        var = np.mean(np.abs(p.gains) ** 2)
        assert abs(var - 1.0) < 0.05
        assert abs(np.mean(p.gains)) < 0.05

    @pytest.mark.parametrize("lo,hi", [(0.0, 150.0), (30.0, 180.0), (100.0, 90.0)])
    def test_invalid_window(self, lo, hi):
        with pytest.raises(ValueError):
            sample_paths(1, Hop.RIS_TO_UE, lo, hi, np.random.default_rng(0))

    def test_zero_paths(self):
        with pytest.raises(ValueError):
            sample_paths(0, Hop.RIS_TO_UE, 30, 150, np.random.default_rng(0))


class TestBuildChannel:
    def test_single_broadside_path_all_ones(self):
        p = PathSet([90.0], [90.0], [1.0], Hop.BS_TO_RIS)
        np.testing.assert_allclose(build_channel(p, 2, 2), np.ones((2, 2)), atol=1e-14)

    def test_rank_one_frobenius_norm(self):
        c = 0.7 - 1.3j
        p = PathSet([40.0], [110.0], [c], Hop.RIS_TO_UE)
        H = build_channel(p, 4, 6)
        assert np.linalg.norm(H) == pytest.approx(abs(c) * np.sqrt(4 * 6))

    def test_matches_per_path_loop(self):
        rng = np.random.default_rng(2)
        p = PathSet(
            rng.uniform(30, 150, 3), rng.uniform(30, 150, 3), crandn(rng, 3),
            Hop.BS_TO_RIS,
        )
        H = build_channel(p, 5, 4)
        H_loop = np.zeros((5, 4), dtype=complex)
        for aoa, aod, g in zip(p.aoa_deg, p.aod_deg, p.gains):
            H_loop += g * np.outer(
                steering_vector(aoa, 5), steering_vector(aod, 4).conj()
            )
        np.testing.assert_allclose(H, H_loop, atol=1e-12)

    def test_numerical_rank_bound(self):
        rng = np.random.default_rng(3)
        for L, M_rx, M_tx in [(1, 32, 8), (2, 4, 32)]:
            p = sample_paths(L, Hop.BS_TO_RIS, 30, 150, rng)
            H = build_channel(p, M_rx, M_tx)
            s = np.linalg.svd(H, compute_uv=False)
            assert np.sum(s > 1e-9 * s[0]) <= L


class TestCascadedChannel:
    def test_scalar_relay(self):
        rng = np.random.default_rng(4)
        H_RU = crandn(rng, 3, 1)
        H_BR = crandn(rng, 1, 2)
        np.testing.assert_allclose(
            cascaded_channel(H_RU, np.ones(1), H_BR), H_RU @ H_BR
        )

    def test_zero_control(self):
        rng = np.random.default_rng(5)
        H = cascaded_channel(crandn(rng, 2, 4), np.zeros(4), crandn(rng, 4, 3))
        np.testing.assert_array_equal(H, np.zeros((2, 3)))

    def test_matches_explicit_diag(self):
        rng = np.random.default_rng(6)
        H_RU, omega, H_BR = crandn(rng, 3, 5), crandn(rng, 5), crandn(rng, 5, 4)
        expected = H_RU @ np.diag(omega) @ H_BR
        np.testing.assert_allclose(
            cascaded_channel(H_RU, omega, H_BR), expected, atol=1e-12
        )

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            cascaded_channel(np.ones((2, 3)), np.ones(4), np.ones((4, 2)))


class TestEffectiveChannel:
    def test_scalar_case(self):
        H = effective_channel(np.array([[2.0]]), np.array([[3.0]]))
        np.testing.assert_allclose(H, [[6.0]])

    def test_vectorized_cascade_identity(self):
        rng = np.random.default_rng(7)
        H_BR, H_RU = crandn(rng, 6, 4), crandn(rng, 3, 6)
        H_eff = effective_channel(H_BR, H_RU)
        for _ in range(100):
            omega = crandn(rng, 6)
            lhs = vec(cascaded_channel(H_RU, omega, H_BR))
            assert np.linalg.norm(lhs - H_eff @ omega) < 1e-10 * np.linalg.norm(lhs)

    def test_rank_bound_single_paths(self):
        rng = np.random.default_rng(8)
        p_br = sample_paths(1, Hop.BS_TO_RIS, 30, 150, rng)
        p_ru = sample_paths(1, Hop.RIS_TO_UE, 30, 150, rng)
        H_eff = effective_channel(
            build_channel(p_br, 8, 4), build_channel(p_ru, 2, 8)
        )
        s = np.linalg.svd(H_eff, compute_uv=False)
        assert np.sum(s > 1e-9 * s[0]) == 1

    def test_rank_bound_product(self):
        rng = np.random.default_rng(9)
        p_br = sample_paths(2, Hop.BS_TO_RIS, 30, 150, rng)
        p_ru = sample_paths(3, Hop.RIS_TO_UE, 30, 150, rng)
        H_eff = effective_channel(
            build_channel(p_br, 16, 8), build_channel(p_ru, 4, 16)
        )
        s = np.linalg.svd(H_eff, compute_uv=False)
        assert np.sum(s > 1e-9 * s[0]) <= 6


class TestProperty1:
    def test_vec_diag_identity(self):
        # vec(A diag(b) C) == (C^T KR A) b
        rng = np.random.default_rng(10)
        for _ in range(20):
            A, b, C = crandn(rng, 3, 5), crandn(rng, 5), crandn(rng, 5, 4)
            lhs = vec(A @ np.diag(b) @ C)
            rhs = khatri_rao_cols(C.T, A) @ b
            assert np.linalg.norm(lhs - rhs) < 1e-10 * np.linalg.norm(lhs)


class TestFactoredEffectiveChannel:
    def test_unfolded_factorization(self):
        # H_eff^H == A(composed) (diag(g_BR) kron diag(g_RU))^H
        #            (A(aod_BR)* kron A(aoa_RU))^H
        rng = np.random.default_rng(11)
        M_B, M_R, M_U = 4, 8, 3
        for L_BR, L_RU in [(1, 1), (1, 2), (2, 2)]:
            p_br = sample_paths(L_BR, Hop.BS_TO_RIS, 30, 150, rng)
            p_ru = sample_paths(L_RU, Hop.RIS_TO_UE, 30, 150, rng)
            H_eff = effective_channel(
                build_channel(p_br, M_R, M_B), build_channel(p_ru, M_U, M_R)
            )
            # composed frequencies, BS-to-RIS path index major
            from ris_anm.geometry import compose_frequency, steering_from_frequency

            atoms = np.column_stack(
                [
                    steering_from_frequency(
                        compose_frequency(t_ru, p_bs).f, M_R
                    )
                    for p_bs in p_br.aoa_deg
                    for t_ru in p_ru.aod_deg
                ]
            )
            gains = kronecker(np.diag(p_br.gains), np.diag(p_ru.gains))
            right = kronecker(
                steering_matrix(p_br.aod_deg, M_B).conj(),
                steering_matrix(p_ru.aoa_deg, M_U),
            )
            Z = atoms @ gains.conj().T @ right.conj().T
            err = np.linalg.norm(H_eff.conj().T - Z) / np.linalg.norm(Z)
            assert err < 1e-9
