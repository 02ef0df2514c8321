# SPDX-FileCopyrightText: 2024 SAP SE or an SAP affiliate company and Gardener contributors
#
# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
import pytest

import pgc.closedforms as closedforms
import pgc.fields as fields
import pgc.loggas as loggas
import pgc.meanfield as meanfield
import pgc.model as model


@pytest.fixture
def disk_tau():
    def _disk_tau(radius=1.0):
        return meanfield.build_apriori(closedforms.disk_curvature(radius=radius))
    return _disk_tau


def test_log_weight(disk_tau):
    tau = disk_tau(radius=2.0)

    # unit pair distance contributes nothing, tau is 1 on its support
    assert loggas.log_weight(np.array([[0.0, 0.0], [1.0, 0.0]]), 2.0, tau) == pytest.approx(0.0)
    assert loggas.log_weight(np.array([[0.0, 0.0], [0.5, 0.0]]), 2.0, tau) == pytest.approx(math.log(2))
    assert loggas.log_weight(np.array([[0.0, 0.0], [3.0, 0.0]]), 2.0, tau) == -math.inf


def test_new_chain_validation(disk_tau):
    tau = disk_tau()

    with pytest.raises(ValueError):
        loggas.new_chain(tau, n_particles=1, beta=1.0, seed=0)
    with pytest.raises(model.InadmissibleError):
        loggas.new_chain(tau, n_particles=2, beta=4.0, seed=0)
    with pytest.raises(ValueError):
        loggas.ChainState(
            positions=np.array([[0.0, 0.0], [5.0, 0.0]]),
            beta=1.0,
            tau=tau,
            rng=np.random.default_rng(0),
            seed=0,
        )


def test_new_chain_checks_beta_star():
    # power tail of exponent 3: beta* = -2
    tau = meanfield.build_apriori(closedforms.power_curvature(3))

    assert loggas.new_chain(tau, n_particles=2, beta=-1.0, seed=0).beta == -1.0
    with pytest.raises(model.InadmissibleError):
        loggas.new_chain(tau, n_particles=2, beta=-3.0, seed=0)
    with pytest.raises(model.InadmissibleError):
        loggas.run_chains(tau, n_particles=2, beta=-3.0, sweeps=10, edges=np.linspace(0.0, 1.0, 3))


def test_metropolis_acceptance_ratio():
    tau = meanfield.build_apriori(closedforms.exponential_curvature(sign=-1))
    beta = 3.0
    start = np.array([[0.1, 0.0], [0.5, 0.0]])
    # particle 0 moves, particle 1 proposes to stay
    proposals = np.array([[-0.3, 0.2], [0.5, 0.0]])
    moved = np.array([[-0.3, 0.2], [0.5, 0.0]])
    delta = loggas.log_weight(moved, beta, tau) - loggas.log_weight(start, beta, tau)

    def sweep(log_uniform):
        positions = start.copy()
        accepted = loggas._metropolis_sweep(
            positions,
            proposals,
            loggas._log_tau(tau, positions),
            loggas._log_tau(tau, proposals),
            np.array([log_uniform, 1.0]),
            beta / 2,
        )
        return accepted, positions

    # symmetric proposal: A -> B is accepted with probability min(1, w(B) / w(A))
    accepted, examinee = sweep(delta - 1e-9)
    assert accepted == 1
    np.testing.assert_array_equal(examinee, moved)

    accepted, examinee = sweep(delta + 1e-9)
    assert accepted == 0
    np.testing.assert_array_equal(examinee, start)


def test_chains_are_reproducible(disk_tau):
    tau = disk_tau()
    edges = np.linspace(0.0, 1.0, 11)

    def run(chain):
        state = loggas.new_chain(tau, n_particles=5, beta=1.0, seed=3, chain=chain)
        return loggas.run_chain(state, sweeps=300, edges=edges)

    first, second, other = run(0), run(0), run(1)

    np.testing.assert_array_equal(first.pair_moments, second.pair_moments)
    np.testing.assert_array_equal(first.histogram.counts, second.histogram.counts)
    assert not np.array_equal(first.pair_moments, other.pair_moments)


def test_chain_stays_in_support(disk_tau):
    tau = disk_tau()
    state = loggas.new_chain(tau, n_particles=8, beta=2.0, seed=5)

    for _ in range(200):
        loggas.mc_sweep(state)

    assert np.all(np.hypot(state.positions[:, 0], state.positions[:, 1]) <= 1.0)
    assert np.all(np.isfinite(state.log_tau))
    assert 0 < state.acceptance_rate < 1


def test_histogram_merge_and_probabilities():
    edges = np.array([0.0, 1.0, 2.0])
    first = loggas.MarginalHistogram.empty(edges)
    first.add(np.array([[0.5, 0.0], [1.5, 0.0]]))
    second = loggas.MarginalHistogram.empty(edges)
    second.add(np.array([[0.0, 0.2], [0.0, 3.0]]))

    examinee = first.merge(second)

    assert examinee.total == 4
    assert examinee.counts == pytest.approx([2.0, 1.0])
    # one sample fell outside the bins
    assert examinee.probabilities() == pytest.approx([0.5, 0.25])
    assert examinee.density() == pytest.approx([2 / 3 / math.pi, 1 / 3 / (3 * math.pi)])

    with pytest.raises(ValueError):
        first.merge(loggas.MarginalHistogram.empty(np.array([0.0, 2.0])))


def test_l1_distance_of_matching_histogram():
    geometry = meanfield.RadialGeometry(r_min=1e-3, r_max=1.0, n_points=2000)
    profile = geometry.field(np.full(2000, 1 / math.pi))
    histogram = loggas.MarginalHistogram(
        edges=np.array([0.0, 0.5, 1.0]),
        counts=np.array([25.0, 75.0]),
        total=100,
    )

    assert loggas.l1_distance(histogram, profile) == pytest.approx(0.0, abs=5e-3)


def test_batch_mean_error():
    values = np.random.default_rng(1).standard_normal(20000)

    examinee = loggas.batch_mean_error(values)

    assert 0.5 / math.sqrt(20000) < examinee < 1.5 / math.sqrt(20000)
    with pytest.raises(ValueError):
        loggas.batch_mean_error(np.ones(10))


def test_disk_pair_log_moment():
    assert loggas.disk_pair_log_moment(0.0) == pytest.approx(-0.25, abs=1e-6)
    # repulsion for beta < 0 raises the mean distance
    assert loggas.disk_pair_log_moment(-2.0) > loggas.disk_pair_log_moment(0.0)
    with pytest.raises(model.InadmissibleError):
        loggas.disk_pair_log_moment(4.0)


def test_classify_l1_failure():
    assert loggas.classify_l1_failure([0.05, 0.06], 0.1) is model.FailureKind.NONE
    assert loggas.classify_l1_failure([0.3, 0.31, 0.29, 0.3], 0.1) is model.FailureKind.POSSIBLE_NON_UNIQUENESS
    assert loggas.classify_l1_failure([0.05, 0.4], 0.1) is model.FailureKind.STATISTICAL


def test_independent_particles_fill_disk_uniformly(disk_tau):
    tau = disk_tau()
    edges = np.linspace(0.0, 1.0, 11)

    runs = loggas.run_chains(
        tau,
        n_particles=10,
        beta=0.0,
        sweeps=10000,
        edges=edges,
        seed=7,
        n_chains=2,
        keep_samples=True,
    )
    samples = np.concatenate([run.samples for run in runs])

    assert loggas.ks_distance(samples, lambda r: np.clip(r, 0.0, 1.0) ** 2) < 0.05
    uniform = fields.RadialProfile.log_spaced(r_min=1e-3, r_max=1.0, n_points=2000)
    uniform = uniform.with_values(np.full(2000, 1 / math.pi))
    assert loggas.l1_distance(loggas.merged_histogram(runs), uniform) < 0.05


def test_two_particle_pair_moment(disk_tau):
    tau = disk_tau()

    runs = loggas.run_chains(
        tau,
        n_particles=2,
        beta=1.0,
        sweeps=20000,
        edges=np.linspace(0.0, 1.0, 5),
        seed=11,
        n_chains=2,
    )
    examinee = loggas.pooled_pair_moment(runs)

    assert abs(examinee.value - loggas.disk_pair_log_moment(1.0)) < 4 * examinee.stderr + 1e-3
