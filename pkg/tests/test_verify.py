import numpy as np
import pytest

from dkg2d.verify import gbound, kernels, strichartz, trilinear


# ---------------------------------------------------------------- summability

def test_power_method_rank_one_oracle():
    rng = np.random.default_rng(0)
    a, b, c = rng.random(7), rng.random(5), rng.random(6)
    T = np.einsum("i,j,k->ijk", a, b, c)
    val, _ = gbound.trilinear_norm(T)
    assert np.isclose(val, np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c), rtol=1e-10)


def test_power_method_diagonal_oracle():
    T = np.zeros((4, 4, 4))
    for i, v in enumerate([0.5, 2.0, 1.0, 0.25]):
        T[i, i, i] = v
    assert np.isclose(gbound.trilinear_norm(T)[0], 2.0, rtol=1e-10)
    with pytest.raises(ValueError):
        gbound.trilinear_norm(-T)


def test_zero_table():
    assert gbound.gbound_summability("zero", K_max=8) == 0.0
    with pytest.raises(KeyError):
        gbound.gbound_summability("C9")


def test_table_regions():
    # entries vanish off the max ~ med set and outside each case's region
    assert gbound.g_value("C1", 0, 30, 0) == 0
    assert gbound.g_value("C1", 5, 3, 20) == 0
    assert gbound.g_value("C1", 5, 3, 6) > 0
    assert gbound.g_value("C3", 2, 8, 9) > 0


def test_summability_monotone_in_truncation():
    rep = gbound.summability_report("C3", 0.6, 1.0, (8, 16, 24))
    v = np.asarray(rep.ratios)
    assert np.all(np.diff(v) >= -1e-9 * v.max())


def test_negative_control_grows():
    rep = gbound.summability_report("tG2cc2", 0.4, 1.0, (8, 16, 24), expect_bounded=False)
    assert rep.passed and rep.details["growth"] > 2


# ---------------------------------------------------------------- kernels

def test_plain_kernel_top_modulation():
    assert kernels.kernel_l1(3, 3) <= 10


def test_kernel_parameter_checks():
    with pytest.raises(ValueError):
        kernels.kernel_l1(3, 2)
    with pytest.raises(ValueError):
        kernels.kernel_l1(3, 5)
    with pytest.raises(ValueError):
        kernels.symbol_derivative_scan(12, 0, order=5)


def test_inverse_symbol_derivatives_bounded():
    r0 = kernels.symbol_derivative_scan(12, 0, order=0)
    assert r0.constant <= 2
    r1 = kernels.symbol_derivative_scan(12, 0, order=1, axis="xi1")
    assert np.isfinite(r1.constant)


def test_duhamel_identity_and_guard():
    assert kernels.duhamel_kernel_identity(12, 0, seed=1) < 1e-10
    with pytest.raises(kernels.DivisionGuardError):
        kernels.duhamel_kernel_identity(12, 0, cumulative=True)


@pytest.mark.slow
def test_duhamel_identity_ten_fields():
    res = [kernels.duhamel_kernel_identity(12, 0, seed=s) for s in range(10)]
    assert max(res) < 1e-10
    assert kernels.duhamel_kernel_identity(12, 0, zero=True) == 0


# ---------------------------------------------------------------- strichartz

def test_energy_pair_is_flat():
    rep = strichartz.strichartz_slope(np.inf, 2, k_range=range(2, 5), n=64, T=2.0, tol=0.05)
    assert rep.passed and abs(rep.details["slope_i"]) < 1e-6


def test_inadmissible_pair_rejected():
    with pytest.raises(ValueError):
        strichartz.strichartz_slope(4, 2)
    with pytest.raises(ValueError):
        strichartz.strichartz_slope(np.inf, 2, k_range=range(2, 9), n=64)


def test_time_nodes_cover_interval():
    t, w = strichartz.time_nodes(4, 3.0)
    assert t[0] == 0 and np.isclose(t[-1], 3.0) and np.isclose(w.sum(), 3.0)


# ---------------------------------------------------------------- trilinear

def test_fast_integral_matches_direct_sum():
    gap, fast, direct = trilinear.oracle_check(seed=0)
    assert gap <= 1e-10 and abs(direct) > 0
    gap, _, _ = trilinear.oracle_check(seed=1, M=0.5, m=1.5)
    assert gap <= 1e-10


def test_ratio_sample_basics():
    rep = trilinear.trilinear_ratio_sample(2, 2, 2, 1, 1, "cunn2-S", n_samples=2, pool_size=1)
    assert np.isfinite(rep.constant) and rep.constant > 0
    z = trilinear.trilinear_ratio_sample(2, 2, 2, 1, 1, "cunn2-S", n_samples=2, pool_size=1,
                                         zero=("psi2",), oracle=False)
    assert z.constant == 0
    with pytest.raises(ValueError):
        trilinear.trilinear_ratio_sample(2, 2, 2, 1, 1, "cunn2-S", r=0.4)
    with pytest.raises(ValueError):
        trilinear.trilinear_ratio_sample(2, 2, 9, 1, 1, "cunn2-S")
    with pytest.raises(ValueError):
        trilinear.trilinear_ratio_sample(2, 2, 2, 1, 1, "other")
