"""Poisson latent-position model of outlet stance and its MCMC estimator.

For one event type, outlet i publishes y_ij articles of narrative class j
with y_ij ~ Poisson(lambda_ij) and

    log lambda_ij = alpha_i - |x_i - z_j|

where z = (-1, 0, 1) anchors the anti/neutral/pro classes, alpha_i is the
outlet's baseline publishing intensity and x_i its latent stance. Priors are
alpha_i ~ N(0, sd_alpha^2) (vague) and x_i ~ N(0, sd_x^2) (soft identification
constraint). Inference is Metropolis-within-Gibbs: per iteration a random-walk
Metropolis update of each alpha_i, then of each x_i, against their full
conditionals. The conditionals factorize by outlet, so each sweep touches
every parameter exactly once in ascending index order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ModelConstants:
    """Fixed stance anchors and prior scales (standard deviations)."""

    stances: tuple[float, float, float] = (-1.0, 0.0, 1.0)
    prior_sd_alpha: float = 15.0
    prior_sd_x: float = 1.0

    def __post_init__(self):
        if len(self.stances) != 3 or not all(
            a < b for a, b in zip(self.stances, self.stances[1:])
        ):
            raise ValueError("stances must be 3 strictly increasing values")
        if self.prior_sd_alpha <= 0 or self.prior_sd_x <= 0:
            raise ValueError("prior standard deviations must be > 0")


@dataclass(frozen=True)
class LatentParams:
    """One parameter state: intercepts alpha and stances x, both length N."""

    alpha: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        x = np.asarray(self.x, dtype=float)
        if alpha.ndim != 1 or x.shape != alpha.shape:
            raise ValueError("alpha and x must be 1-D arrays of equal length")
        if not (np.isfinite(alpha).all() and np.isfinite(x).all()):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "x", x)


@dataclass(frozen=True)
class ChainConfig:
    iterations: int = 5000
    burn_in: int = 1000
    chains: int = 4
    seed: int = 0
    initial_proposal_sd: float = 0.5
    adapt: bool = True

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn_in must satisfy 0 <= burn_in < iterations")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if self.initial_proposal_sd <= 0:
            raise ValueError("initial_proposal_sd must be > 0")


@dataclass(frozen=True)
class ChainDraws:
    """Raw draws, shaped (chains, iterations, N), plus per-parameter accept counts."""

    alpha: np.ndarray
    x: np.ndarray
    accepted_alpha: np.ndarray
    accepted_x: np.ndarray

    @property
    def n_chains(self) -> int:
        return self.alpha.shape[0]

    @property
    def n_iterations(self) -> int:
        return self.alpha.shape[1]

    @property
    def n_outlets(self) -> int:
        return self.alpha.shape[2]


@dataclass(frozen=True)
class ParamStats:
    """Posterior summaries per parameter index (arrays of length N)."""

    mean: np.ndarray
    sd: np.ndarray
    q05: np.ndarray
    q95: np.ndarray
    rhat: np.ndarray
    ess: np.ndarray


@dataclass(frozen=True)
class ParamSummary:
    alpha: ParamStats
    x: ParamStats
    n_draws: int


def log_intensity(alpha_i: float, x_i: float, z_j: float) -> float:
    """log lambda = alpha - |x - z|; the 1-D Euclidean distance is |x - z|."""
    return alpha_i - abs(x_i - z_j)


def _check_counts(Y_k, n_params: int | None = None) -> np.ndarray:
    Y = np.asarray(Y_k)
    if Y.ndim != 2 or Y.shape[1] != 3:
        raise ValueError(f"count slice must be N x 3, got shape {Y.shape}")
    if n_params is not None and Y.shape[0] != n_params:
        raise ValueError(
            f"count slice has {Y.shape[0]} rows but parameters have length {n_params}"
        )
    if (Y < 0).any():
        raise ValueError("counts must be >= 0")
    return Y.astype(float)


def log_likelihood(params: LatentParams, Y_k, consts: ModelConstants) -> float:
    """Poisson log likelihood, log(y!) included so values match pmf oracles."""
    Y = _check_counts(Y_k, params.alpha.shape[0])
    z = np.asarray(consts.stances)
    loglam = params.alpha[:, None] - np.abs(params.x[:, None] - z[None, :])
    return float(np.sum(Y * loglam - np.exp(loglam) - gammaln(Y + 1.0)))


def _log_prior(params: LatentParams, consts: ModelConstants) -> float:
    n = params.alpha.shape[0]
    sa, sx = consts.prior_sd_alpha, consts.prior_sd_x
    qa = float(np.sum(params.alpha**2)) / (2.0 * sa * sa)
    qx = float(np.sum(params.x**2)) / (2.0 * sx * sx)
    return -qa - qx - n * (math.log(sa) + math.log(sx) + _LOG_2PI)


def log_posterior(params: LatentParams, Y_k, consts: ModelConstants) -> float:
    """Unnormalized log posterior: log likelihood plus Gaussian log priors."""
    return log_likelihood(params, Y_k, consts) + _log_prior(params, consts)


def rwmh_update(
    current_value: float,
    conditional_logpdf,
    proposal_sd: float,
    rng: np.random.Generator,
    current_logpdf: float | None = None,
) -> tuple[float, bool]:
    """One random-walk Metropolis step on a scalar parameter.

    Proposes current + N(0, proposal_sd^2) and accepts with probability
    min(1, exp(logpdf(proposal) - logpdf(current))). A non-finite logpdf at
    the proposal is treated as a rejection. Consumes exactly one normal and
    one uniform draw from rng per call. Pass current_logpdf to skip
    re-evaluating the target at the current value.
    """
    if proposal_sd <= 0:
        raise ValueError("proposal_sd must be > 0")
    proposal = current_value + rng.normal(0.0, proposal_sd)
    u = rng.random()
    lp_prop = conditional_logpdf(proposal)
    if not math.isfinite(lp_prop):
        return current_value, False
    lp_cur = (
        conditional_logpdf(current_value) if current_logpdf is None else current_logpdf
    )
    delta = lp_prop - lp_cur
    if delta >= 0.0 or u < math.exp(delta):
        return proposal, True
    return current_value, False


# Acceptance-rate target and multiplicative step for burn-in proposal tuning.
_ADAPT_TARGET = 0.44
_ADAPT_EVERY = 50
_ADAPT_UP = 1.1
_ADAPT_DOWN = 0.9

# Cap on the log intensity; exp() overflows just above 709.
_MAX_LOG_INTENSITY = 700.0


def _sample_chain(
    Y: np.ndarray, config: ChainConfig, consts: ModelConstants, chain_index: int
):
    n = Y.shape[0]
    rng = np.random.default_rng(config.seed ^ chain_index)
    z0, z1, z2 = (float(v) for v in consts.stances)
    inv2va = 1.0 / (2.0 * consts.prior_sd_alpha**2)
    inv2vx = 1.0 / (2.0 * consts.prior_sd_x**2)
    rows = [(float(Y[i, 0]), float(Y[i, 1]), float(Y[i, 2])) for i in range(n)]

    alpha = [0.0] * n
    x_start = 0.5 if chain_index % 2 == 0 else -0.5
    x = [x_start] * n
    sd_a = [config.initial_proposal_sd] * n
    sd_x = [config.initial_proposal_sd] * n
    acc_a = [0] * n
    acc_x = [0] * n
    win_a = [0] * n
    win_x = [0] * n

    draws_a = np.empty((config.iterations, n))
    draws_x = np.empty((config.iterations, n))
    exp_ = math.exp

    for h in range(1, config.iterations + 1):
        for i in range(n):
            y0, y1, y2 = rows[i]
            xi = x[i]
            d0 = abs(xi - z0)
            d1 = abs(xi - z1)
            d2 = abs(xi - z2)

            def cond_alpha(a, y0=y0, y1=y1, y2=y2, d0=d0, d1=d1, d2=d2):
                if a > _MAX_LOG_INTENSITY:
                    return -math.inf
                l0 = a - d0
                l1 = a - d1
                l2 = a - d2
                return (
                    y0 * l0
                    + y1 * l1
                    + y2 * l2
                    - (exp_(l0) + exp_(l1) + exp_(l2))
                    - a * a * inv2va
                )

            alpha[i], ok = rwmh_update(alpha[i], cond_alpha, sd_a[i], rng)
            if ok:
                acc_a[i] += 1
                win_a[i] += 1

        for i in range(n):
            y0, y1, y2 = rows[i]
            ai = alpha[i]

            def cond_x(v, y0=y0, y1=y1, y2=y2, ai=ai):
                l0 = ai - abs(v - z0)
                l1 = ai - abs(v - z1)
                l2 = ai - abs(v - z2)
                return (
                    y0 * l0
                    + y1 * l1
                    + y2 * l2
                    - (exp_(l0) + exp_(l1) + exp_(l2))
                    - v * v * inv2vx
                )

            x[i], ok = rwmh_update(x[i], cond_x, sd_x[i], rng)
            if ok:
                acc_x[i] += 1
                win_x[i] += 1

        draws_a[h - 1] = alpha
        draws_x[h - 1] = x

        if config.adapt and h <= config.burn_in and h % _ADAPT_EVERY == 0:
            for i in range(n):
                rate = win_a[i] / _ADAPT_EVERY
                if rate > _ADAPT_TARGET:
                    sd_a[i] *= _ADAPT_UP
                elif rate < _ADAPT_TARGET:
                    sd_a[i] *= _ADAPT_DOWN
                rate = win_x[i] / _ADAPT_EVERY
                if rate > _ADAPT_TARGET:
                    sd_x[i] *= _ADAPT_UP
                elif rate < _ADAPT_TARGET:
                    sd_x[i] *= _ADAPT_DOWN
            win_a = [0] * n
            win_x = [0] * n

    return draws_a, draws_x, np.array(acc_a), np.array(acc_x)


def run_chain(Y_k, config: ChainConfig, consts: ModelConstants) -> ChainDraws:
    """Run config.chains independent Metropolis-within-Gibbs chains.

    Chain c uses an RNG seeded with config.seed XOR c, starts at alpha = 0 and
    x = +0.5 / -0.5 (alternating by chain index, so multi-chain starts are
    overdispersed in x), and sweeps alpha_1..alpha_N then x_1..x_N each
    iteration. During burn-in, per-parameter proposal scales are rescaled
    every 50 iterations toward a 0.44 acceptance rate (x1.1 if above, x0.9 if
    below) and frozen afterwards. Identical inputs produce identical draws.
    """
    Y = _check_counts(Y_k)
    out_a = np.empty((config.chains, config.iterations, Y.shape[0]))
    out_x = np.empty_like(out_a)
    acc_a = np.empty((config.chains, Y.shape[0]), dtype=np.int64)
    acc_x = np.empty_like(acc_a)
    for c in range(config.chains):
        out_a[c], out_x[c], acc_a[c], acc_x[c] = _sample_chain(Y, config, consts, c)
    return ChainDraws(alpha=out_a, x=out_x, accepted_alpha=acc_a, accepted_x=acc_x)


def _autocovariance(seqs: np.ndarray) -> np.ndarray:
    """Biased per-chain autocovariances via FFT; seqs is (chains, n, N)."""
    n = seqs.shape[1]
    centered = seqs - seqs.mean(axis=1, keepdims=True)
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(centered, m, axis=1)
    acov = np.fft.irfft(f * np.conj(f), m, axis=1)[:, :n, :]
    return acov / n


def _split_rhat(seqs: np.ndarray) -> np.ndarray:
    """Split-R-hat per parameter; seqs is (chains, n, N) with n >= 4."""
    n = seqs.shape[1]
    half = n // 2
    halves = np.concatenate([seqs[:, :half, :], seqs[:, n - half :, :]], axis=0)
    w = halves.var(axis=1, ddof=1).mean(axis=0)
    b = half * halves.mean(axis=1).var(axis=0, ddof=1)
    var_plus = (half - 1) / half * w + b / half
    out = np.ones(seqs.shape[2])
    nonzero = w > 0
    out[nonzero] = np.sqrt(var_plus[nonzero] / w[nonzero])
    out[(~nonzero) & (b > 0)] = np.inf
    return out


def _effective_sample_size(seqs: np.ndarray) -> np.ndarray:
    """ESS per parameter from chain-averaged autocorrelations (Geyer truncation)."""
    chains, n, n_params = seqs.shape
    total = chains * n
    if n < 4:
        return np.full(n_params, float(total))
    acov = _autocovariance(seqs)
    w = seqs.var(axis=1, ddof=1).mean(axis=0)
    mean_acov = acov.mean(axis=0)
    if chains > 1:
        b_over_n = seqs.mean(axis=1).var(axis=0, ddof=1)
    else:
        b_over_n = np.zeros(n_params)
    var_plus = (n - 1) / n * w + b_over_n
    ess = np.full(n_params, float(total))
    for p in range(n_params):
        if var_plus[p] <= 0:
            continue
        rho = 1.0 - (w[p] - mean_acov[:, p]) / var_plus[p]
        tau = 1.0
        prev_pair = np.inf
        for k in range(1, (n - 1) // 2):
            pair = rho[2 * k - 1] + rho[2 * k]
            if pair < 0:
                break
            pair = min(pair, prev_pair)
            prev_pair = pair
            tau += 2.0 * pair
        ess[p] = min(float(total), total / tau)
    return ess


def _stats(seqs: np.ndarray) -> ParamStats:
    pooled = seqs.reshape(-1, seqs.shape[2])
    q05 = np.quantile(pooled, 0.05, axis=0)
    q95 = np.quantile(pooled, 0.95, axis=0)
    # interval order is guaranteed; the mean may legitimately fall outside
    # the central interval for skewed posteriors
    assert (q05 <= q95).all()
    return ParamStats(
        mean=pooled.mean(axis=0),
        sd=pooled.std(axis=0, ddof=1),
        q05=q05,
        q95=q95,
        rhat=_split_rhat(seqs),
        ess=_effective_sample_size(seqs),
    )


def posterior_summary(draws: ChainDraws, burn_in: int) -> ParamSummary:
    """Pooled post-burn-in means, sds, central 90% intervals, R-hat and ESS."""
    if burn_in >= draws.n_iterations:
        raise ValueError("burn_in must be smaller than the number of iterations")
    kept = draws.n_iterations - burn_in
    if kept * draws.n_chains < 10:
        raise ValueError(
            f"only {kept * draws.n_chains} post-burn-in draws; need at least 10"
        )
    alpha = draws.alpha[:, burn_in:, :]
    x = draws.x[:, burn_in:, :]
    return ParamSummary(
        alpha=_stats(alpha), x=_stats(x), n_draws=kept * draws.n_chains
    )


def simulate_counts(
    alpha_true, x_true, consts: ModelConstants, rng: np.random.Generator
) -> np.ndarray:
    """Draw an N x 3 count slice from the model at the given parameters."""
    params = LatentParams(np.asarray(alpha_true, float), np.asarray(x_true, float))
    z = np.asarray(consts.stances)
    lam = np.exp(params.alpha[:, None] - np.abs(params.x[:, None] - z[None, :]))
    return rng.poisson(lam).astype(np.int64)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular (alpha, x) evaluation grid with a common step."""

    alpha_range: tuple[float, float]
    x_range: tuple[float, float]
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be > 0")
        if self.alpha_range[0] >= self.alpha_range[1]:
            raise ValueError("alpha_range must be increasing")
        if self.x_range[0] >= self.x_range[1]:
            raise ValueError("x_range must be increasing")


@dataclass(frozen=True)
class GridPosterior:
    mean_alpha: float
    mean_x: float
    warnings: tuple[str, ...] = ()


def default_grid(y_row, consts: ModelConstants, step: float = 0.01) -> GridSpec:
    """Data-informed alpha range plus +-6 prior sds for x."""
    total = float(np.asarray(y_row).sum())
    if total > 0:
        center = math.log(total + 1.0)
        alpha_range = (center - 8.0, center + 4.0)
    else:
        alpha_range = (-6.0 * consts.prior_sd_alpha, 4.0)
    half = 6.0 * consts.prior_sd_x
    return GridSpec(alpha_range=alpha_range, x_range=(-half, half), step=step)


def grid_posterior_oracle(
    y_row, grid: GridSpec, consts: ModelConstants
) -> GridPosterior:
    """Riemann-sum posterior means of (alpha, x) for a single outlet.

    Independent of the MCMC path: evaluates the log posterior on the full
    grid and normalizes. Intended as a verification oracle for N = 1 fits.
    """
    y = np.asarray(y_row, dtype=float).reshape(-1)
    if y.shape != (3,):
        raise ValueError("oracle requires a single outlet's 3 narrative counts")
    if (y < 0).any():
        raise ValueError("counts must be >= 0")
    warnings = ()
    if grid.step > 0.02:
        warnings = (
            f"grid step {grid.step:g} exceeds 0.02; posterior means may be coarse",
        )
    alphas = np.arange(grid.alpha_range[0], grid.alpha_range[1] + grid.step / 2, grid.step)
    xs = np.arange(grid.x_range[0], grid.x_range[1] + grid.step / 2, grid.step)
    z = np.asarray(consts.stances)
    dist = np.abs(xs[:, None] - z[None, :])
    loglam = alphas[:, None, None] - dist[None, :, :]
    loglik = (y * loglam).sum(axis=2) - np.exp(loglam).sum(axis=2) - gammaln(y + 1.0).sum()
    logpost = (
        loglik
        - (alphas[:, None] ** 2) / (2.0 * consts.prior_sd_alpha**2)
        - (xs[None, :] ** 2) / (2.0 * consts.prior_sd_x**2)
    )
    weights = np.exp(logpost - logpost.max())
    norm = weights.sum()
    return GridPosterior(
        mean_alpha=float((weights.sum(axis=1) @ alphas) / norm),
        mean_x=float((weights.sum(axis=0) @ xs) / norm),
        warnings=warnings,
    )
