"""MMSE channel estimation statistics under pilot re-use, plus channel sampling.

Every cell re-uses the same K orthogonal pilots, so BS j's estimate of its
user k is contaminated by the pilot-k users of all other cells:

    ghat_jkj = alpha_jkj * (sqrt(rho_p) * sum_l g_jkl + z_jk),
    alpha_jkl = sqrt(rho_p) * beta_jkl / (1 + rho_p * sum_l' beta_jkl'),

with z_jk unit complex Gaussian pilot noise. The per-antenna estimate
variance is sqrt(rho_p)*beta_jkl*alpha_jkl and the own-link error variance
beta_jkj*(1 - sqrt(rho_p)*alpha_jkj).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import NetworkScenario


def crandn(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) samples: two real normals per entry, variance 1/2 each."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * np.sqrt(0.5)


def own_links(tensor: np.ndarray) -> np.ndarray:
    """Extract t[j, k, j] from an (L, K, L) tensor as an (L, K) array."""
    L = tensor.shape[0]
    idx = np.arange(L)
    return tensor[idx, :, idx]


@dataclass(frozen=True)
class EstimationStats:
    """MMSE coefficients and variances for every (BS, pilot, cell) link."""

    alpha: np.ndarray    # (L, K, L)
    est_var: np.ndarray  # (L, K, L) per-antenna estimate variance
    err_var: np.ndarray  # (L, K) per-antenna own-link error variance

    def __post_init__(self):
        for arr in (self.alpha, self.est_var, self.err_var):
            arr.flags.writeable = False

    def gamma(self) -> np.ndarray:
        """Own-link estimate variances est_var[j, k, j], shape (L, K)."""
        return own_links(self.est_var)


def compute_alpha(scenario: NetworkScenario) -> EstimationStats:
    beta = scenario.beta
    srp = np.sqrt(scenario.rho_p)
    denom = 1.0 + scenario.rho_p * beta.sum(axis=2)  # (L, K), shared per pilot
    alpha = srp * beta / denom[:, :, None]
    est_var = srp * beta * alpha
    err_var = own_links(beta) * (1.0 - srp * own_links(alpha))
    return EstimationStats(alpha=alpha, est_var=est_var, err_var=err_var)


@dataclass(frozen=True)
class ChannelRealization:
    """One small-scale fading realization with the matching MMSE estimates.

    g[j, k, l] is the true M-dim channel from BS j to user k of cell l,
    g_hat[j, k] the estimate BS j forms for its own user k, eps the error
    g[j, k, j] - g_hat[j, k], and pilot_noise[j, k] the shared pilot noise
    vector of pilot k at BS j.
    """

    M: int
    g: np.ndarray            # (L, K, L, M) complex
    g_hat: np.ndarray        # (L, K, M) complex
    eps: np.ndarray          # (L, K, M) complex
    pilot_noise: np.ndarray  # (L, K, M) complex
    alpha: np.ndarray        # (L, K, L), kept for cross-estimate reconstruction

    def pilot_observation(self, rho_p: float) -> np.ndarray:
        """sqrt(rho_p) * sum_l g[j, k, l] + z[j, k], shape (L, K, M)."""
        return np.sqrt(rho_p) * self.g.sum(axis=2) + self.pilot_noise

    def cross_estimate(self, j: int, k: int, l: int, rho_p: float) -> np.ndarray:
        """Estimate BS j would form for the pilot-k user of cell l.

        Shares the pilot observation with g_hat[j, k], so it is collinear
        with g_hat[j, k] with ratio beta[j,k,l] / beta[j,k,j].
        """
        obs = np.sqrt(rho_p) * self.g[j, k].sum(axis=0) + self.pilot_noise[j, k]
        return self.alpha[j, k, l] * obs


def sample_channels(scenario: NetworkScenario, stats: EstimationStats,
                    M: int, rng: np.random.Generator) -> ChannelRealization:
    """Draw i.i.d. Rayleigh channels and build the contaminated MMSE estimates.

    Draw order (h then pilot noise) is fixed so a seeded generator reproduces
    the realization exactly.
    """
    L, K = scenario.n_cells, scenario.users_per_cell
    if M < K:
        raise ValueError(f"M={M} must be >= K={K}")
    h = crandn(rng, (L, K, L, M))
    z = crandn(rng, (L, K, M))
    g = np.sqrt(scenario.beta)[:, :, :, None] * h
    srp = np.sqrt(scenario.rho_p)
    obs = srp * g.sum(axis=2) + z
    g_hat = own_links(stats.alpha)[:, :, None] * obs
    eps = own_links(g) - g_hat
    return ChannelRealization(M=M, g=g, g_hat=g_hat, eps=eps,
                              pilot_noise=z, alpha=stats.alpha)
