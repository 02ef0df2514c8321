# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

'''
Metropolis sampling of the canonical log-gas ensemble

    mu_N(dx_1 .. dx_N)  ~  prod_{i<j} |x_i - x_j|^(-beta/N)  prod_l tau(dx_l)

and the estimators comparing its 1-marginal and pair statistics with the mean-field density.
'''

import concurrent.futures
import dataclasses
import logging
import math
import typing

import numpy as np
import scipy.integrate
import scipy.spatial.distance
import scipy.stats

import pgc.fields as fields
import pgc.meanfield as meanfield
import pgc.model as model

try:
    import numba
    njit = numba.njit
except ImportError:
    def njit(*args, **kwargs):
        def decorator(fn):
            return fn
        return decorator

logger = logging.getLogger(__name__)

TUNING_WINDOW = 50
TARGET_ACCEPTANCE = (0.3, 0.5)
BURN_IN_SHARE = 0.1
MIN_SAMPLES = 1000
N_BATCHES = 20


@dataclasses.dataclass
class ChainState:
    positions: np.ndarray
    beta: float
    tau: meanfield.AprioriMeasure
    rng: np.random.Generator
    seed: int
    chain: int = 0
    sigma: float = 0.5
    accepted: int = 0
    proposed: int = 0
    log_tau: np.ndarray = None

    def __post_init__(self):
        self.positions = np.array(self.positions, dtype=float)
        if self.positions.ndim != 2 or self.positions.shape[1] != 2:
            raise ValueError(f'positions must have shape (N, 2), got {self.positions.shape}')
        if self.n < 2:
            raise ValueError(f'need at least two particles, got N={self.n}')
        if not self.sigma > 0:
            raise ValueError(f'proposal scale must be positive, got {self.sigma=}')
        if self.log_tau is None:
            self.log_tau = _log_tau(self.tau, self.positions)
        if not np.all(np.isfinite(self.log_tau)):
            raise ValueError('initial positions leave the support of tau')

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def acceptance_rate(self) -> float:
        if not self.proposed:
            return 0.0
        return self.accepted / self.proposed


def _log_tau(tau: meanfield.AprioriMeasure, positions: np.ndarray) -> np.ndarray:
    with np.errstate(divide='ignore', over='ignore'):
        return np.asarray(tau.log_density(positions), dtype=float)


def log_weight(
    positions: np.ndarray,
    beta: float,
    tau: meanfield.AprioriMeasure,
) -> float:
    '''
    -(beta / N) sum_{i<j} ln|x_i - x_j| + sum_l ln tau(x_l), up to the normalization -ln M_N.
    non-finite results are returned as such (support exit: -inf; coincident points: +-inf).
    '''
    positions = np.asarray(positions, dtype=float)
    n = positions.shape[0]
    field = float(np.sum(_log_tau(tau, positions)))
    if beta == 0:
        return field
    with np.errstate(divide='ignore'):
        pair = float(np.sum(np.log(scipy.spatial.distance.pdist(positions))))
    return -(beta / n) * pair + field


@njit(cache=True, nogil=True)
def _metropolis_sweep(
    positions,
    proposals,
    field,
    field_new,
    log_uniforms,
    coupling,
):
    # single-particle updates in index order; positions and field are updated in place
    n = positions.shape[0]
    accepted = 0
    for i in range(n):
        px = proposals[i, 0]
        py = proposals[i, 1]
        pair = 0.0
        coincident = False
        for j in range(n):
            if j == i:
                continue
            dxn = px - positions[j, 0]
            dyn = py - positions[j, 1]
            new = dxn * dxn + dyn * dyn
            if new == 0.0:
                coincident = True
                break
            dxo = positions[i, 0] - positions[j, 0]
            dyo = positions[i, 1] - positions[j, 1]
            pair += 0.5 * (math.log(new) - math.log(dxo * dxo + dyo * dyo))
        if coincident:
            continue
        delta = field_new[i] - field[i] - coupling * pair
        if math.isfinite(delta) and log_uniforms[i] < delta:
            positions[i, 0] = px
            positions[i, 1] = py
            field[i] = field_new[i]
            accepted += 1
    return accepted


def mc_sweep(state: ChainState) -> ChainState:
    '''
    one Metropolis sweep: N isotropic Gaussian single-particle proposals, each accepted with
    probability min(1, exp(delta log_weight))
    '''
    n = state.n
    proposals = state.positions + state.sigma * state.rng.standard_normal((n, 2))
    with np.errstate(divide='ignore'):
        log_uniforms = np.log(state.rng.random(n))
    field_new = _log_tau(state.tau, proposals)

    accepted = _metropolis_sweep(
        state.positions,
        proposals,
        state.log_tau,
        field_new,
        log_uniforms,
        state.beta / n,
    )
    state.accepted += int(accepted)
    state.proposed += n
    return state


def new_chain(
    tau: meanfield.AprioriMeasure,
    n_particles: int,
    beta: float,
    seed: int,
    chain: int = 0,
    sigma: float = 0.5,
    init_radius: float = 1.0,
    beta_star: float = None,
) -> ChainState:
    '''
    particles start uniformly on the disk of radius init_radius (capped by the support of tau).
    the generator of chain k is the k-th child of SeedSequence(seed).
    beta must lie in (beta*, 4); beta* is derived from tau unless given.
    '''
    if n_particles < 2:
        raise ValueError(f'need at least two particles, got {n_particles=}')
    if beta_star is None:
        beta_star = meanfield.beta_star_of(tau)
    meanfield.check_beta(beta, beta_star)

    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chain,)))
    for bound in (tau.domain_radius, tau.curvature.support_radius):
        if bound is not None:
            init_radius = min(init_radius, bound / 2)

    radii = init_radius * np.sqrt(rng.random(n_particles))
    angles = 2 * math.pi * rng.random(n_particles)
    positions = np.stack((radii * np.cos(angles), radii * np.sin(angles)), axis=-1)

    return ChainState(
        positions=positions,
        beta=beta,
        tau=tau,
        rng=rng,
        seed=int(seed),
        chain=chain,
        sigma=sigma,
    )


def _tune(state: ChainState, accepted: int, proposed: int):
    rate = accepted / proposed
    low, high = TARGET_ACCEPTANCE
    if rate < low:
        state.sigma *= 0.8
    elif rate > high:
        state.sigma *= 1.25
    logger.debug(f'acceptance {rate:.3f}, proposal scale now {state.sigma:.4g}')


@dataclasses.dataclass
class MarginalHistogram:
    '''
    radial: edges are radii and bins are annuli. planar: edges are shared by both axes and
    bins are squares. total counts every sample, including those outside the binned domain.
    '''
    edges: np.ndarray
    counts: np.ndarray
    total: int
    radial: bool = True

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if np.any(self.counts < 0):
            raise ValueError('histogram counts must be non-negative')
        if np.any(np.diff(self.edges) <= 0):
            raise ValueError('bin edges must be strictly increasing')

    @staticmethod
    def empty(edges: np.ndarray, radial: bool = True) -> 'MarginalHistogram':
        edges = np.asarray(edges, dtype=float)
        shape = (edges.size - 1,) if radial else (edges.size - 1, edges.size - 1)
        return MarginalHistogram(edges=edges, counts=np.zeros(shape), total=0, radial=radial)

    def add(self, points: np.ndarray):
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        if self.radial:
            counts, _ = np.histogram(np.hypot(points[:, 0], points[:, 1]), bins=self.edges)
        else:
            counts, *_ = np.histogram2d(points[:, 0], points[:, 1], bins=(self.edges, self.edges))
        self.counts += counts
        self.total += points.shape[0]

    def merge(self, other: 'MarginalHistogram') -> 'MarginalHistogram':
        if self.radial != other.radial or not np.array_equal(self.edges, other.edges):
            raise ValueError('cannot merge histograms with different bins')
        return MarginalHistogram(
            edges=self.edges,
            counts=self.counts + other.counts,
            total=self.total + other.total,
            radial=self.radial,
        )

    @property
    def areas(self) -> np.ndarray:
        if self.radial:
            return math.pi * np.diff(self.edges ** 2)
        widths = np.diff(self.edges)
        return np.outer(widths, widths)

    def probabilities(self) -> np.ndarray:
        '''
        share of all samples falling into each bin
        '''
        if not self.total:
            raise ValueError('empty histogram')
        return self.counts / self.total

    def density(self) -> np.ndarray:
        '''
        density estimate normalized on the binned domain
        '''
        binned = self.counts.sum()
        if not binned:
            raise ValueError('no samples inside the binned domain')
        return self.counts / (binned * self.areas)

    def to_profile(self) -> fields.RadialProfile:
        if not self.radial:
            raise ValueError('only radial histograms convert to a radial profile')
        return fields.RadialProfile(
            radii=(self.edges[:-1] + self.edges[1:]) / 2,
            values=self.density(),
            weights=self.areas,
        )


def empirical_marginal(
    samples: np.ndarray,
    bins: typing.Union[int, np.ndarray],
    radial: bool = True,
) -> MarginalHistogram:
    samples = np.asarray(samples, dtype=float).reshape(-1, 2)
    if samples.shape[0] == 0:
        raise ValueError('empty sample set')
    if samples.shape[0] < MIN_SAMPLES:
        logger.warning(f'only {samples.shape[0]} samples, the marginal estimate is unreliable')

    if np.isscalar(bins):
        if radial:
            edges = np.linspace(0.0, np.max(np.hypot(samples[:, 0], samples[:, 1])), int(bins) + 1)
        else:
            reach = np.max(np.abs(samples))
            edges = np.linspace(-reach, reach, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)

    histogram = MarginalHistogram.empty(edges, radial=radial)
    histogram.add(samples)
    return histogram


@dataclasses.dataclass(frozen=True)
class MomentEstimate:
    value: float
    stderr: float


def batch_mean_error(values: np.ndarray, n_batches: int = N_BATCHES) -> float:
    '''
    standard error of the mean of a correlated series from the spread of its batch means
    '''
    values = np.asarray(values, dtype=float)
    size = values.size // n_batches
    if size < 1:
        raise ValueError(f'need at least {n_batches} values, got {values.size}')
    means = values[:size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(n_batches))


def _sample_pair_moment(positions: np.ndarray) -> float:
    return float(np.mean(np.log(scipy.spatial.distance.pdist(positions))))


def pair_log_moment(samples: np.ndarray) -> MomentEstimate:
    '''
    mean of ln|x_i - x_j| over all pairs of each sample, averaged over samples (S, N, 2)
    '''
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 3 or samples.shape[1] < 2:
        raise ValueError(f'samples must have shape (S, N >= 2, 2), got {samples.shape}')
    per_sample = np.array([_sample_pair_moment(sample) for sample in samples])
    return MomentEstimate(
        value=float(per_sample.mean()),
        stderr=batch_mean_error(per_sample),
    )


@dataclasses.dataclass(eq=False)
class ChainRun:
    seed: int
    chain: int
    n: int
    beta: float
    sweeps: int
    burn_in: int
    thin: int
    acceptance_rate: float
    sigma: float
    histogram: MarginalHistogram
    pair_moments: np.ndarray
    samples: np.ndarray = None

    @property
    def pair_moment(self) -> MomentEstimate:
        return MomentEstimate(
            value=float(np.mean(self.pair_moments)),
            stderr=batch_mean_error(self.pair_moments),
        )

    def summary(self) -> dict:
        moment = self.pair_moment
        return {
            'seed': self.seed,
            'chain': self.chain,
            'N': self.n,
            'beta': self.beta,
            'sweeps': self.sweeps,
            'burn_in': self.burn_in,
            'thin': self.thin,
            'acceptance_rate': self.acceptance_rate,
            'sigma': self.sigma,
            'pair_log_moment': moment.value,
            'pair_log_moment_stderr': moment.stderr,
        }


def run_chain(
    state: ChainState,
    sweeps: int,
    edges: np.ndarray,
    burn_in: int = None,
    thin: int = 1,
    keep_samples: bool = False,
    radial: bool = True,
) -> ChainRun:
    '''
    burn-in (default 10% of sweeps) tunes the proposal scale towards 30-50% acceptance; every
    thin-th sweep afterwards contributes all its particles to the histogram and one pair moment
    '''
    if sweeps < 1 or thin < 1:
        raise ValueError(f'need positive sweeps and thin, got {sweeps=} {thin=}')
    if burn_in is None:
        burn_in = int(BURN_IN_SHARE * sweeps)

    window_accepted = window_proposed = 0
    for sweep in range(burn_in):
        before = state.accepted
        mc_sweep(state)
        window_accepted += state.accepted - before
        window_proposed += state.n
        if (sweep + 1) % TUNING_WINDOW == 0:
            _tune(state, window_accepted, window_proposed)
            window_accepted = window_proposed = 0

    state.accepted = state.proposed = 0
    histogram = MarginalHistogram.empty(edges, radial=radial)
    kept = (sweeps - burn_in) // thin
    pair_moments = np.empty(kept)
    samples = np.empty((kept, state.n, 2)) if keep_samples else None

    buffer = []
    index = 0
    for sweep in range(burn_in, sweeps):
        mc_sweep(state)
        if (sweep - burn_in + 1) % thin:
            continue
        pair_moments[index] = _sample_pair_moment(state.positions)
        if keep_samples:
            samples[index] = state.positions
        buffer.append(state.positions.copy())
        if len(buffer) == 1000:
            histogram.add(np.concatenate(buffer))
            buffer = []
        index += 1
    if buffer:
        histogram.add(np.concatenate(buffer))

    logger.info(
        f'chain {state.chain} seed={state.seed} N={state.n} beta={state.beta}: {sweeps=} '
        f'acceptance={state.acceptance_rate:.3f} sigma={state.sigma:.4g}'
    )
    return ChainRun(
        seed=state.seed,
        chain=state.chain,
        n=state.n,
        beta=state.beta,
        sweeps=sweeps,
        burn_in=burn_in,
        thin=thin,
        acceptance_rate=state.acceptance_rate,
        sigma=state.sigma,
        histogram=histogram,
        pair_moments=pair_moments[:index],
        samples=None if samples is None else samples[:index],
    )


def run_chains(
    tau: meanfield.AprioriMeasure,
    n_particles: int,
    beta: float,
    sweeps: int,
    edges: np.ndarray,
    seed: int = 0,
    n_chains: int = 4,
    burn_in: int = None,
    thin: int = 1,
    sigma: float = 0.5,
    keep_samples: bool = False,
    radial: bool = True,
    max_workers: int = 4,
) -> typing.List[ChainRun]:
    '''
    independent chains seeded by the children of SeedSequence(seed); results come back in chain
    order
    '''
    beta_star = meanfield.beta_star_of(tau)
    meanfield.check_beta(beta, beta_star)

    def run(chain):
        state = new_chain(
            tau=tau,
            n_particles=n_particles,
            beta=beta,
            seed=seed,
            chain=chain,
            sigma=sigma,
            beta_star=beta_star,
        )
        return run_chain(
            state=state,
            sweeps=sweeps,
            edges=edges,
            burn_in=burn_in,
            thin=thin,
            keep_samples=keep_samples,
            radial=radial,
        )

    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(run, range(n_chains)))


def merged_histogram(runs: typing.Sequence[ChainRun]) -> MarginalHistogram:
    histogram = runs[0].histogram
    for run in runs[1:]:
        histogram = histogram.merge(run.histogram)
    return histogram


def pooled_pair_moment(runs: typing.Sequence[ChainRun]) -> MomentEstimate:
    estimates = [run.pair_moment for run in runs]
    return MomentEstimate(
        value=float(np.mean([e.value for e in estimates])),
        stderr=math.sqrt(sum(e.stderr ** 2 for e in estimates)) / len(estimates),
    )


def profile_bin_probabilities(
    profile: fields.RadialProfile,
    edges: np.ndarray,
) -> typing.Tuple[np.ndarray, float]:
    '''
    mass of a normalized radial density in each annulus, and the mass beyond the last edge
    '''
    cumulative = np.concatenate(([0.0], np.cumsum(profile.weights * profile.values)))
    radii = np.concatenate(([0.0], profile.radii))
    cumulative = cumulative / cumulative[-1]
    at_edges = np.interp(edges, radii, cumulative)
    return np.diff(at_edges), float(1 - at_edges[-1])


def l1_distance(
    histogram: MarginalHistogram,
    profile: fields.RadialProfile,
) -> float:
    '''
    L1 distance between the empirical radial marginal and a radial density, on the bins and
    the remaining mass outside them
    '''
    if not histogram.radial:
        raise ValueError('l1_distance compares radial marginals')
    expected, outside_expected = profile_bin_probabilities(profile, histogram.edges)
    observed = histogram.probabilities()
    outside_observed = 1 - float(observed.sum())
    return float(np.sum(np.abs(observed - expected)) + abs(outside_observed - outside_expected))


def ks_distance(
    samples: np.ndarray,
    cdf: typing.Callable[[np.ndarray], np.ndarray],
) -> float:
    '''
    Kolmogorov-Smirnov statistic of the sample radii against a radial cdf
    '''
    samples = np.asarray(samples, dtype=float).reshape(-1, 2)
    radii = np.hypot(samples[:, 0], samples[:, 1])
    return float(scipy.stats.kstest(radii, cdf).statistic)


def profile_cdf(profile: fields.RadialProfile) -> typing.Callable[[np.ndarray], np.ndarray]:
    cumulative = np.concatenate(([0.0], np.cumsum(profile.weights * profile.values)))
    cumulative = cumulative / cumulative[-1]
    radii = np.concatenate(([0.0], profile.radii))

    def cdf(r):
        return np.interp(r, radii, cumulative)

    return cdf


def classify_l1_failure(
    distances: typing.Sequence[float],
    threshold: float,
) -> model.FailureKind:
    '''
    per-chain L1 distances to the mean-field density: a failing mean whose chain-to-chain spread
    is small cannot be explained by sampling noise and points at a different limit
    '''
    distances = np.asarray(distances, dtype=float)
    mean = float(distances.mean())
    if mean < threshold:
        return model.FailureKind.NONE
    if distances.size < 2:
        return model.FailureKind.STATISTICAL
    stderr = float(np.std(distances, ddof=1) / math.sqrt(distances.size))
    if mean - threshold > 3 * stderr:
        return model.FailureKind.POSSIBLE_NON_UNIQUENESS
    return model.FailureKind.STATISTICAL


def _disk_distance_pdf(d: float) -> float:
    # distance between two independent uniform points of the unit disk
    half = d / 2
    return 4 * d / math.pi * (math.acos(half) - half * math.sqrt(1 - half * half))


def disk_pair_log_moment(beta: float) -> float:
    '''
    <ln|x_1 - x_2|> for N = 2 and tau the indicator of the unit disk, where the two-particle
    density is proportional to |x_1 - x_2|^(-beta/2)
    '''
    if not beta < meanfield.BETA_MAX:
        raise model.InadmissibleError(f'{beta=}: pair weight not integrable for beta >= 4')

    def weight(d):
        return d ** (-beta / 2) * _disk_distance_pdf(d)

    numerator, _ = scipy.integrate.quad(lambda d: math.log(d) * weight(d), 0, 2, limit=200)
    denominator, _ = scipy.integrate.quad(weight, 0, 2, limit=200)
    return numerator / denominator
