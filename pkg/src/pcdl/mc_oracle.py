"""Monte Carlo verification layer.

Samples physical channels, applies the actual MRT/ZF precoders and estimates
the moments that the closed forms predict: the per-cell mean effective gain
(vs theta), the variance of the residual after removing the coherent part
(vs the power-decomposition noise sum) and the radiated per-user power
(vs rho_d). Gates are statistical: quantities carry standard errors from ten
batch means, and a |z| <= 5 rule separates formula bugs from Monte Carlo
noise at the documented trial counts.

Accumulation uses per-chunk partial sums combined with math.fsum in a fixed
chunk order, so a given seed reproduces results bit-for-bit on either kernel
backend (the two backends themselves differ by reduction order only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .estimation import EstimationStats, crandn, own_links
from .geometry import NetworkScenario
from .rate_core import Precoder, effective_gain, power_decomposition

N_BATCHES = 10
COND_LIMIT = _kernels.COND_LIMIT


def zf_precoder(g_hat: np.ndarray) -> np.ndarray:
    """Pseudo-inverse precoder V with V^H g_hat = I_K.

    Gram system solved by factorization; inputs with condition number beyond
    COND_LIMIT are rejected.
    """
    if g_hat.ndim != 2 or g_hat.shape[0] < g_hat.shape[1]:
        raise ValueError("g_hat must be an M x K matrix with M >= K")
    gram = g_hat.conj().T @ g_hat
    if np.linalg.cond(gram) > COND_LIMIT:
        raise np.linalg.LinAlgError("estimated channel matrix is rank deficient")
    return np.linalg.solve(gram, g_hat.conj().T).conj().T


@dataclass(frozen=True)
class EmpiricalMoments:
    """Sampled link moments with batch-means standard errors."""

    mean_gain: np.ndarray  # (L,) real parts of the effective-gain means
    gain_se: np.ndarray    # (L,)
    noise_var: float       # var of y - sum_j theta_j s_j[i]
    noise_se: float
    power: np.ndarray      # (L,) mean rho_d ||x_j||^2 / K
    power_se: np.ndarray   # (L,)
    trials: int


def _batch_bounds(trials: int) -> np.ndarray:
    """Trial-index boundaries of the N_BATCHES contiguous batches."""
    return np.array([math.ceil(b * trials / N_BATCHES) for b in range(N_BATCHES + 1)])


def _chunk_iter(scenario, stats, M, precoder, receiver, trials, rng):
    """Yield (t0, gain, y, power, s_i) per chunk of trials."""
    L, K = scenario.n_cells, scenario.users_per_cell
    i, l = receiver
    if not (0 <= i < K and 0 <= l < L):
        raise ValueError(f"receiver {receiver} out of range")
    eff = effective_gain(scenario, stats, M, precoder, receiver)
    scale = np.sqrt(scenario.rho_d / eff.lam)
    kernel = _kernels.mrt_chunk if precoder is Precoder.MRT else _kernels.zf_chunk
    sqrt_beta = np.sqrt(scenario.beta)
    alpha_own = own_links(stats.alpha)
    srp = math.sqrt(scenario.rho_p)
    chunk = _kernels.chunk_trials(L, K, M)
    t0 = 0
    while t0 < trials:
        c = min(chunk, trials - t0)
        h = crandn(rng, (c, L, K, L, M))
        z = crandn(rng, (c, L, K, M))
        s = crandn(rng, (c, L, K))
        w = crandn(rng, (c,))
        gain, y, power = kernel(h, z, s, w, sqrt_beta, alpha_own, srp,
                                i, l, scale, eff.lam, scenario.rho_d)
        yield t0, gain, y, power, s[:, :, i]
        t0 += c


def _fsum_batches(parts: list[np.ndarray]) -> np.ndarray:
    """Compensated cross-chunk reduction of (N_BATCHES, ...) partial sums."""
    stacked = np.stack(parts)
    out = np.empty(stacked.shape[1:])
    for idx in np.ndindex(out.shape):
        out[idx] = math.fsum(stacked[(slice(None),) + idx])
    return out


def empirical_moments(scenario: NetworkScenario, stats: EstimationStats, M: int,
                      precoder: Precoder, receiver: tuple[int, int],
                      trials: int, rng: np.random.Generator) -> EmpiricalMoments:
    """Estimate the oracle moments at one receiver over i.i.d. trials."""
    if trials < 1000:
        raise ValueError("need at least 1000 trials for stable batch means")
    L = scenario.n_cells
    i, l = receiver
    theta = effective_gain(scenario, stats, M, precoder, receiver).theta
    bounds = _batch_bounds(trials)

    gain_parts, noise_parts, power_parts = [], [], []
    for t0, gain, y, power, s_i in _chunk_iter(scenario, stats, M, precoder,
                                               receiver, trials, rng):
        c = y.shape[0]
        wprime = y - s_i @ theta
        gp = np.zeros((N_BATCHES, L))
        npow = np.zeros(N_BATCHES)
        pp = np.zeros((N_BATCHES, L))
        lo = np.clip(bounds[:-1] - t0, 0, c)
        hi = np.clip(bounds[1:] - t0, 0, c)
        for b in range(N_BATCHES):
            if hi[b] > lo[b]:
                seg = slice(lo[b], hi[b])
                gp[b] = gain[seg].real.sum(axis=0)
                npow[b] = (wprime[seg].real ** 2 + wprime[seg].imag ** 2).sum()
                pp[b] = power[seg].sum(axis=0)
        gain_parts.append(gp)
        noise_parts.append(npow)
        power_parts.append(pp)

    gain_sums = _fsum_batches(gain_parts)
    noise_sums = _fsum_batches(noise_parts)
    power_sums = _fsum_batches(power_parts)
    counts = (bounds[1:] - bounds[:-1]).astype(float)

    def stats_of(sums):
        mean = np.apply_along_axis(math.fsum, 0, sums) / trials
        batch_means = sums / counts.reshape((N_BATCHES,) + (1,) * (sums.ndim - 1))
        se = batch_means.std(axis=0, ddof=1) / math.sqrt(N_BATCHES)
        return mean, se

    mean_gain, gain_se = stats_of(gain_sums)
    noise_var, noise_se = stats_of(noise_sums)
    power, power_se = stats_of(power_sums)
    return EmpiricalMoments(mean_gain=mean_gain, gain_se=gain_se,
                            noise_var=float(noise_var), noise_se=float(noise_se),
                            power=power, power_se=power_se, trials=trials)


def hardening_check(scenario: NetworkScenario, stats: EstimationStats,
                    m_values: list[int], trials: int, rng: np.random.Generator,
                    receiver: tuple[int, int] = (0, 0)) -> list[tuple[int, float]]:
    """Mean relative deviation of y/sqrt(M) from its large-M limit, per M.

    The limit is sum_j (theta_j / sqrt(M)) s_j[i], whose coefficients do not
    depend on M; deviations must shrink as M grows.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if any(b <= a for a, b in zip(m_values, m_values[1:])):
        raise ValueError("m_values must be strictly increasing")
    out = []
    for M in m_values:
        theta = effective_gain(scenario, stats, M, Precoder.MRT, receiver).theta
        coeff = theta / math.sqrt(M)
        parts = []
        for _, _, y, _, s_i in _chunk_iter(scenario, stats, M, Precoder.MRT,
                                           receiver, trials, rng):
            limit = s_i @ coeff
            dev = np.abs(y / math.sqrt(M) - limit) / np.abs(limit)
            parts.append(dev.sum())
        out.append((M, math.fsum(parts) / trials))
    return out


@dataclass(frozen=True)
class ReportRow:
    quantity: str
    closed_form: float
    empirical: float
    std_err: float
    z_score: float
    passed: bool


def verification_rows(scenario: NetworkScenario, stats: EstimationStats, M: int,
                      precoder: Precoder, receiver: tuple[int, int],
                      omega: tuple[int, ...], trials: int,
                      rng: np.random.Generator, z_gate: float = 5.0) -> list[ReportRow]:
    """Closed form vs empirical moments for one (M, precoder, receiver, omega)."""
    mom = empirical_moments(scenario, stats, M, precoder, receiver, trials, rng)
    theta = effective_gain(scenario, stats, M, precoder, receiver).theta
    pd = power_decomposition(scenario, stats, M, precoder, receiver, omega)
    tag = f"M={M},{precoder.value},rcvr=({receiver[0] + 1},{receiver[1] + 1})"

    def row(name, closed, emp, se):
        if se > 0:
            z = (emp - closed) / se
        else:
            z = 0.0 if emp == closed else math.copysign(math.inf, emp - closed)
        return ReportRow(quantity=f"{name}@{tag}", closed_form=float(closed),
                         empirical=float(emp), std_err=float(se),
                         z_score=float(z), passed=bool(abs(z) <= z_gate))

    rows = []
    for j in range(scenario.n_cells):
        rows.append(row(f"theta_cell{j + 1}", theta[j], mom.mean_gain[j], mom.gain_se[j]))
    rows.append(row("noise_var", pd.noise, mom.noise_var, mom.noise_se))
    for j in range(scenario.n_cells):
        rows.append(row(f"power_cell{j + 1}", scenario.rho_d, mom.power[j], mom.power_se[j]))
    if omega:
        p1_emp = math.fsum(mom.mean_gain[j] ** 2 for j in omega)
        p1_se = math.sqrt(math.fsum((2.0 * mom.mean_gain[j] * mom.gain_se[j]) ** 2
                                    for j in omega))
        omega_tag = "".join(str(j + 1) for j in sorted(omega))
        rows.append(row(f"p1_omega{omega_tag}", pd.p1, p1_emp, p1_se))
    return rows


def write_report_csv(rows: list[ReportRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("quantity,closed_form,empirical,std_err,z_score,pass\n")
        for r in rows:
            fh.write(f"{r.quantity},{r.closed_form!r},{r.empirical!r},"
                     f"{r.std_err!r},{r.z_score!r},{str(r.passed).lower()}\n")
