import math

import numpy as np
import pytest

from stitlab import formulas as F
from stitlab.geometry import quad_1d


def test_kappa_values():
    assert F.kappa(0) == pytest.approx(1.0)
    assert F.kappa(1) == pytest.approx(2.0)
    assert F.kappa(2) == pytest.approx(math.pi)
    assert F.kappa(3) == pytest.approx(4 * math.pi / 3)


def test_lambda_k():
    assert F.lambda_k(2, 1) == pytest.approx(2 / math.pi, rel=1e-12)
    assert F.lambda_k(3, 1) == pytest.approx(0.5, rel=1e-12)
    for d in (1, 2, 3):
        assert F.lambda_k(d, d) == pytest.approx(1.0, rel=1e-12)


def test_intensities_planar():
    t = 1.7
    assert F.intensity_NkI(2, 0, t) == pytest.approx(2 * t**2 / math.pi, rel=1e-12)
    assert F.intensity_NkI(2, 1, t) == pytest.approx(t**2 / math.pi, rel=1e-12)


def test_intensity_spatial_facets():
    t = 1.3
    assert F.intensity_NkI(3, 2, t) == pytest.approx(math.pi * t**3 / 48, rel=1e-12)


def test_mean_face_volumes():
    t = 2.9
    assert F.mean_vol_Ik(2, 1, t) == pytest.approx(math.pi / t, rel=1e-12)
    assert F.mean_vol_Ik(3, 1, t) == pytest.approx(3 / t, rel=1e-12)
    assert F.mean_vol_Ik(3, 2, t) == pytest.approx(48 / (math.pi * t**2), rel=1e-12)


def test_f_vectors():
    assert F.f_vector(2) == [4, 4]
    assert F.f_vector(3) == [8, 12, 6]


def test_mean_intrinsic_consistency():
    t = 1.1
    for d, k in ((2, 1), (3, 1), (3, 2)):
        assert F.mean_intrinsic(d, k, 0, t) == pytest.approx(1.0, rel=1e-12)
        assert F.mean_intrinsic(d, k, k, t) == pytest.approx(
            F.mean_vol_Ik(d, k, t), rel=1e-12
        )


def test_sv_identity():
    t = 0.8
    for d in (2, 3):
        for k in range(d):
            assert F.intensity_NkI(d, k, t) * F.mean_vol_Ik(d, k, t) == pytest.approx(
                F.intensity_SV(d, k, t), rel=1e-12
            )


def test_isegment_density_planar_closed_form():
    t = 1.0
    for x in (0.1, 1.0, 10.0):
        assert F.isegment_density(2, t, x) == pytest.approx(
            F.isegment_density_planar(t, x), rel=1e-12
        )


def test_isegment_density_normalization_and_mean():
    # the density has a power tail ~ d Gamma(d+1) / (a^d x^{d+1}); close the
    # truncated integral with the analytic tail mass Gamma(d+1)/(a X)^d
    for d, t in ((2, 1.0), (3, 2.0)):
        a = F.lambda_k(d, 1) * t
        X = 2000.0 / t
        total = quad_1d(lambda x: F.isegment_density(d, t, x), 1e-9, X, 1e-9)
        tail = math.gamma(d + 1) / (a * X) ** d
        assert total + tail == pytest.approx(1.0, abs=1e-6)
    mean = quad_1d(lambda x: x * F.isegment_density(2, 1.0, x), 1e-9, 3000.0, 1e-8)
    tail_mean = 2 * math.gamma(3) / (2 / math.pi) ** 2 / 3000.0
    assert mean + tail_mean == pytest.approx(math.pi, abs=1e-4)


def test_isegment_moments():
    assert F.isegment_moment(3, 2, 1.0).value == pytest.approx(24.0, rel=1e-12)
    assert not F.isegment_moment(2, 2, 1.0).exists
    assert F.isegment_moment(2, 2, 1.0).value == math.inf
    assert F.isegment_moment(2, 1, 3.0).value == pytest.approx(math.pi / 3.0, rel=1e-12)


def test_moments_volk():
    t = 1.0
    assert F.moments_volk(3, 1, 2, t).value == pytest.approx(24.0, rel=1e-12)
    assert not F.moments_volk(3, 2, 2, t).exists
    assert not F.moments_volk(3, 1, 3, t).exists
    # third moment of the I-segment length agrees with the direct d=1 law
    for d in (4, 5, 7):
        direct = F.isegment_moment(d, 3, t).value
        assert F.moments_volk(d, 1, 3, t).value == pytest.approx(direct, rel=1e-12)


def test_perimeter_second_moment():
    assert F.perimeter_second_moment_3d(1.0) == pytest.approx(
        0.75 * (1 + math.pi**2 / 4), rel=1e-12
    )


def test_jface_relations():
    t = 1.0
    assert F.jface_relations(2, 1, 0, t)["N_Jk0"] == pytest.approx(0.5, rel=1e-12)
    assert F.jface_relations(3, 2, 0, t)["N_Jk0"] == pytest.approx(2 / 3, rel=1e-12)
    assert F.jface_relations(3, 2, 1, t)["N_Ikj"] == pytest.approx(4.0, rel=1e-12)
    for d, k, j in ((2, 1, 0), (3, 1, 0), (3, 2, 0), (3, 2, 1)):
        rel = F.jface_relations(d, k, j, t)
        assert rel["N_kJ"] == pytest.approx(
            d * (d - k + 1) / (d - k) * F.intensity_NkI(d, k, t), rel=1e-12
        )
        # mean intrinsic volumes of I- and J-faces differ by d/(d-j)
        assert F.mean_intrinsic(d, k, j, t) == pytest.approx(
            d / (d - j) * rel["EVj_Jk"], rel=1e-12
        )


def test_variance_exact_3d_closed_form_value():
    target = (4 * math.pi**2 / 3) * (48 * math.exp(-1) - 17)
    assert F.variance_exact_3d_closed(1.0, 1.0) == pytest.approx(target, rel=1e-12)


def test_variance_quadrature_vs_closed():
    for t, R in ((1.0, 1.0), (2.0, 0.5), (0.5, 2.0)):
        q = F.variance_exact(3, t, R)
        c = F.variance_exact_3d_closed(t, R)
        assert q == pytest.approx(c, rel=1e-6)


def test_variance_monotone_in_t():
    vals = [F.variance_exact(2, t, 1.0) for t in (0.5, 1.0, 2.0, 4.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_two_energy_and_chord_power():
    assert F.two_energy_ball(3) == pytest.approx(4 * math.pi**2, rel=1e-12)
    # E_2 and I_{d-1} are tied by E_2 = 2 I_{d-1} / ((d-1)(d-2))
    for d in (3, 4, 5):
        lhs = (d - 1) * (d - 2) * F.two_energy_ball(d)
        assert lhs == pytest.approx(2 * F.chord_power_integral_ball(d, d - 1), rel=1e-12)


def test_variance_asymptotic():
    assert F.variance_asymptotic(2, 1.0, 10.0, vol_W=2.0) == pytest.approx(
        2 * math.pi * 100 * math.log(10), rel=1e-12
    )
    I2_ball = F.chord_power_integral_ball(3, 2)
    assert F.variance_asymptotic(3, 1.0, 4.0) == pytest.approx(
        4**4 * I2_ball, rel=1e-12
    )
    assert F.variance_asymptotic(3, 1.0, 1.0, window="cube") == pytest.approx(
        3.7557, rel=1e-12
    )


def test_pair_correlation_limits():
    for d in (2, 3):
        assert F.pair_correlation(d, 1.0, 1e4) == pytest.approx(1.0, abs=1e-6)
        assert F.pair_correlation(d, 1.0, 0.5) > 1.0


def test_g2_small_r_matches_plt_form():
    # g_2(r) = 1 + 1/(pi t r) + O(1) near zero: the difference from the
    # Poisson-line form tends to a constant as r -> 0
    t = 1.0
    for r in (1e-3, 1e-4):
        diff = F.pair_correlation(2, t, r) - F.pht_pair_correlation(2, t, r)
        # next order term: -(1/2)(2/(pi))^2/2 ... just require boundedness
        assert abs(diff) < 1.0


def test_K_g_coherence_finite_differences():
    h = 1e-6
    for d in (2, 3):
        for r in (0.3, 1.0, 2.5):
            dK = (F.K_function(d, 1.0, r + h) - F.K_function(d, 1.0, r - h)) / (2 * h)
            g_from_K = dK / (d * F.kappa(d) * r ** (d - 1))
            assert g_from_K == pytest.approx(F.pair_correlation(d, 1.0, r), rel=1e-6)


def test_clt_variance_factors():
    assert F.clt_variance_factor(2, math.pi) == pytest.approx(math.pi**2, rel=1e-12)
    assert F.clt_variance_factor(3, 4 * math.pi / 3) == pytest.approx(
        32 * math.pi**2 / 3, rel=1e-12
    )
    assert F.clt_variance_factor(2, 2 * math.pi) == pytest.approx(
        2 * math.pi**2, rel=1e-12
    )


def test_increment_variance_value():
    assert F.increment_variance(2, math.pi, 0.5) == pytest.approx(
        math.pi**2 * math.log(2), rel=1e-12
    )


def test_xi_variance_values():
    assert F.xi_variance_isotropic_ball() == pytest.approx(4 * math.pi**2, rel=1e-12)
    # homogeneity of degree 2d-2 = 4
    assert F.xi_variance_isotropic_ball(3, 2.0) == pytest.approx(
        16 * 4 * math.pi**2, rel=1e-12
    )
    # axis-cube value against an independent midpoint-rule oracle
    u = (np.arange(2000) + 0.5) / 2000
    U, V = np.meshgrid(u, u)
    oracle = (4 * (1 - U) * (1 - V) / (U + V)).mean()
    assert F.xi_variance_axis_cube() == pytest.approx(3 * oracle, rel=1e-3)


def test_pht_formulas():
    t = 1.4
    assert F.pht_K_function(2, t, 1.0) == pytest.approx(math.pi + 2 / t, rel=1e-12)
    assert F.pht_pair_correlation(2, t, 1.0) == pytest.approx(
        1 + 1 / (math.pi * t), rel=1e-12
    )
    assert F.pht_J_ball(2, 1.0) == pytest.approx(16 / 3, rel=1e-12)
    assert F.pht_J_ball(2, 2.0) == pytest.approx(16 / 3 * 8, rel=1e-12)


def test_catalog_dump():
    rows = F.catalog(1.0)
    ids = {r[0] for r in rows}
    assert {"kappa", "N_kI", "K", "pht_J_unit_ball", "f_vector"} <= ids
    tags = {r[3] for r in rows}
    assert tags == {"analytic", "literature-constant"}
