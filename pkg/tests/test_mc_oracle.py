import math

import numpy as np
import pytest

from pcdl import _kernels
from pcdl.estimation import crandn, own_links, sample_channels
from pcdl.mc_oracle import (empirical_moments, hardening_check,
                            verification_rows, write_report_csv, zf_precoder)
from pcdl.rate_core import Precoder, effective_gain, power_decomposition


def test_zf_precoder_single_column():
    rng = np.random.default_rng(0)
    g = crandn(rng, (16, 1))
    v = zf_precoder(g)
    expect = g / np.linalg.norm(g) ** 2
    assert np.allclose(v, expect, rtol=1e-12)


def test_zf_precoder_residual_identity():
    rng = np.random.default_rng(1)
    g = crandn(rng, (64, 15))
    v = zf_precoder(g)
    residual = v.conj().T @ g - np.eye(15)
    assert np.abs(residual).max() < 1e-9


def test_zf_precoder_rejects_near_singular():
    rng = np.random.default_rng(2)
    col = crandn(rng, (2, 1))
    g = np.hstack([col, col * (1 + 1e-14)])  # nearly parallel columns
    with pytest.raises(np.linalg.LinAlgError):
        zf_precoder(g)


def test_zf_precoder_rejects_wide_matrix():
    with pytest.raises(ValueError):
        zf_precoder(np.ones((2, 4), dtype=complex))


def test_trial_count_guards(small_drop):
    scenario, stats = small_drop
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError, match="1000 trials"):
        empirical_moments(scenario, stats, 8, Precoder.MRT, (0, 0), 10, rng)
    with pytest.raises(ValueError, match="trials must be >= 1"):
        hardening_check(scenario, stats, [8, 16], 0, rng)
    with pytest.raises(ValueError, match="strictly increasing"):
        hardening_check(scenario, stats, [16, 8], 5, rng)


def test_receiver_bounds(small_drop):
    scenario, stats = small_drop
    with pytest.raises(ValueError, match="out of range"):
        empirical_moments(scenario, stats, 8, Precoder.MRT, (9, 0), 1000,
                          np.random.default_rng(0))


@pytest.mark.parametrize("precoder", [Precoder.MRT, Precoder.ZF])
def test_moments_match_closed_forms(small_drop, precoder):
    scenario, stats = small_drop
    M, trials = 16, 4000
    rng = np.random.default_rng(99)
    mom = empirical_moments(scenario, stats, M, precoder, (1, 1), trials, rng)
    theta = effective_gain(scenario, stats, M, precoder, (1, 1)).theta
    noise = power_decomposition(scenario, stats, M, precoder, (1, 1), ()).noise
    assert np.all(np.abs(mom.mean_gain - theta) < 5 * mom.gain_se)
    assert abs(mom.noise_var - noise) < 5 * mom.noise_se
    assert np.all(np.abs(mom.power - scenario.rho_d) < 5 * mom.power_se)


def test_moments_deterministic_given_seed(small_drop):
    scenario, stats = small_drop
    a = empirical_moments(scenario, stats, 8, Precoder.ZF, (0, 0), 1500,
                          np.random.default_rng(5))
    b = empirical_moments(scenario, stats, 8, Precoder.ZF, (0, 0), 1500,
                          np.random.default_rng(5))
    assert np.array_equal(a.mean_gain, b.mean_gain)
    assert a.noise_var == b.noise_var
    assert np.array_equal(a.power, b.power)


def _chunk_inputs(scenario, stats, M, trials, seed):
    L, K = scenario.n_cells, scenario.users_per_cell
    rng = np.random.default_rng(seed)
    h = crandn(rng, (trials, L, K, L, M))
    z = crandn(rng, (trials, L, K, M))
    s = crandn(rng, (trials, L, K))
    w = crandn(rng, (trials,))
    return h, z, s, w


@pytest.mark.skipif(_kernels.backend() != "numba",
                    reason="jit path disabled via PCDL_NO_NUMBA")
@pytest.mark.parametrize("kind", ["mrt", "zf"])
def test_kernel_backends_agree(small_drop, kind):
    scenario, stats = small_drop
    M = 12
    h, z, s, w = _chunk_inputs(scenario, stats, M, 64, seed=3)
    prec = Precoder.MRT if kind == "mrt" else Precoder.ZF
    eff = effective_gain(scenario, stats, M, prec, (0, 0))
    scale = np.sqrt(scenario.rho_d / eff.lam)
    args = (h, z, s, w, np.sqrt(scenario.beta), own_links(stats.alpha),
            math.sqrt(scenario.rho_p), 0, 0, scale, eff.lam, scenario.rho_d)
    if kind == "mrt":
        out_nb = _kernels._mrt_chunk_nb(*args)
        out_np = _kernels._mrt_chunk_np(*args)
    else:
        out_nb = _kernels._zf_chunk_nb(*args)
        out_np = _kernels._zf_chunk_np(*args)
    for a, b in zip(out_nb, out_np):
        assert np.allclose(a, b, rtol=1e-9, atol=1e-12)


def test_moments_single_cell_single_user():
    # L = 1 and K = 1 exercise the kernels' degenerate shapes
    from conftest import toy_scenario
    from pcdl.estimation import compute_alpha
    scenario = toy_scenario(np.ones((1, 1, 1)), rho_d=4.0, rho_p=1.0)
    stats = compute_alpha(scenario)
    for prec in (Precoder.MRT, Precoder.ZF):
        mom = empirical_moments(scenario, stats, 4, prec, (0, 0), 2000,
                                np.random.default_rng(31))
        theta = effective_gain(scenario, stats, 4, prec, (0, 0)).theta
        assert abs(mom.mean_gain[0] - theta[0]) < 5 * mom.gain_se[0]
        assert abs(mom.power[0] - scenario.rho_d) < 5 * mom.power_se[0]


def test_chunk_rule_shape_only():
    assert _kernels.chunk_trials(2, 15, 64) == _kernels.chunk_trials(2, 15, 64)
    assert _kernels.chunk_trials(2, 15, 4096) >= 1
    assert _kernels.chunk_trials(2, 15, 16) <= 256


def test_hardening_deviation_decreases(small_drop):
    scenario, stats = small_drop
    rng = np.random.default_rng(17)
    table = hardening_check(scenario, stats, [64, 256, 1024, 4096], 200, rng)
    devs = [d for _, d in table]
    assert devs[0] > devs[1] > devs[2] > devs[3]


def test_zf_gram_guard_in_kernel():
    # unit gains and duplicated pilot draws force identical estimate columns
    L, K, M = 2, 3, 8
    rng = np.random.default_rng(4)
    h = crandn(rng, (1, L, K, L, M))
    h[:, :, 1] = h[:, :, 0]  # pilot 2's channels duplicate pilot 1's
    z = np.zeros((1, L, K, M), dtype=complex)
    s = crandn(rng, (1, L, K))
    w = crandn(rng, (1,))
    args = (h, z, s, w, np.ones((L, K, L)), np.ones((L, K)),
            1.0, 0, 0, np.ones(L), np.ones(L), 1.0)
    with pytest.raises(Exception, match="rank deficient"):
        _kernels.zf_chunk(*args)


def test_oracle_vs_sampled_realization_consistency(small_drop):
    # zf_precoder on a sampled realization satisfies the defining identity
    scenario, stats = small_drop
    real = sample_channels(scenario, stats, 16, np.random.default_rng(8))
    for j in range(scenario.n_cells):
        ghat = real.g_hat[j].T  # (M, K)
        v = zf_precoder(ghat)
        residual = v.conj().T @ ghat - np.eye(scenario.users_per_cell)
        assert np.abs(residual).max() < 1e-9


def test_verification_rows_and_csv(tmp_path, small_drop):
    scenario, stats = small_drop
    rng = np.random.default_rng(21)
    rows = verification_rows(scenario, stats, 16, Precoder.MRT, (0, 0),
                             omega=(0, 1), trials=2000, rng=rng)
    names = [r.quantity.split("@")[0] for r in rows]
    assert names == ["theta_cell1", "theta_cell2", "noise_var",
                     "power_cell1", "power_cell2", "p1_omega12"]
    assert all(r.passed for r in rows)
    out = tmp_path / "report.csv"
    write_report_csv(rows, str(out))
    lines = out.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "quantity,closed_form,empirical,std_err,z_score,pass"
    assert len(lines) == 1 + len(rows)
    assert lines[1].endswith(",true")
