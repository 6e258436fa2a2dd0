import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smrls.errors import DowndateSingular
from smrls.estimators import (
    EstimatorState,
    RlsTrainer,
    SgdTrainer,
    batch_oracle_weighted,
    ffrls_step,
    rank_one_update,
    sgd_gradient,
    sgd_step,
)
from smrls.rbf import build_grid_network, regressor_matrix


def random_spd(rng, n, floor=0.5):
    A = rng.normal(size=(n, n))
    return A @ A.T / n + floor * np.eye(n)


def rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def test_sgd_zero_innovation_leaves_weights():
    st_ = EstimatorState(weights=[1.0, -2.0], eta=0.5)
    phi = np.array([0.3, 0.7])
    sgd_step(st_, phi, float(st_.weights @ phi))
    np.testing.assert_array_equal(st_.weights, [1.0, -2.0])


def test_sgd_single_step_value():
    st_ = EstimatorState(weights=[0.0], eta=1.0)
    assert sgd_step(st_, [1.0], 2.0) == 2.0
    np.testing.assert_array_equal(st_.weights, [2.0])


def test_sgd_zero_rate_is_identity(rng):
    st_ = EstimatorState(weights=rng.normal(size=4), eta=0.0)
    w = st_.weights.copy()
    for _ in range(20):
        sgd_step(st_, rng.normal(size=4), rng.normal())
    np.testing.assert_array_equal(st_.weights, w)


def test_sgd_gradient_matches_finite_differences(rng):
    for _ in range(20):
        w, phi, y = rng.normal(size=9), rng.uniform(0, 1, 9), rng.normal() * 5
        J = lambda v: 0.5 * (y - v @ phi) ** 2
        h = 1e-6
        fd = np.array([(J(w + h * e) - J(w - h * e)) / (2 * h) for e in np.eye(9)])
        assert rel(sgd_gradient(w, phi, y), fd) < 1e-6


def test_ffrls_scalar_example():
    st_ = EstimatorState.for_rls(1, lam=1.0, p0_scale=1.0)
    ffrls_step(st_, [1.0], 1.0)
    assert st_.covariance[0, 0] == pytest.approx(0.5, abs=1e-15)
    assert st_.weights[0] == pytest.approx(0.5, abs=1e-15)
    # minimizer of (1 - W)^2 + W^2 by hand
    assert st_.weights[0] == pytest.approx(batch_oracle_weighted([[1.0]], [1.0], [1.0], [[1.0]], [0.0])[0])


@pytest.mark.parametrize("lam", [1.0, 0.999])
def test_ffrls_matches_weighted_oracle_every_prefix(rng, lam):
    N, K = 4, 200
    st_ = EstimatorState.for_rls(N, lam=lam, p0_scale=10.0)
    p0 = st_.p0.copy()
    Phi, Y = rng.normal(size=(K, N)), rng.normal(size=K)
    for k in range(K):
        ffrls_step(st_, Phi[k], Y[k])
        c = lam ** (k - np.arange(k + 1))
        w_o = batch_oracle_weighted(Phi[: k + 1], Y[: k + 1], c, p0 / lam ** (k + 1), np.zeros(N))
        assert rel(st_.weights, w_o) < 1e-8


def test_ffrls_covariance_is_dense_inverse(rng):
    N, K, lam = 5, 150, 0.98
    st_ = EstimatorState.for_rls(N, lam=lam, p0_scale=10.0)
    Phi, Y = rng.normal(size=(K, N)), rng.normal(size=K)
    info = np.linalg.inv(st_.p0)
    for k in range(K):
        ffrls_step(st_, Phi[k], Y[k])
        info = lam * info + np.outer(Phi[k], Phi[k])
        assert rel(np.linalg.inv(info), st_.covariance) < 1e-8
        assert np.array_equal(st_.covariance, st_.covariance.T)


def test_forgetting_factor_domain():
    with pytest.raises(ValueError):
        EstimatorState.for_rls(2, lam=1.5)
    with pytest.raises(ValueError):
        EstimatorState.for_rls(2, lam=0.0)


def test_rank_one_zero_vector(rng):
    P = random_spd(rng, 9)
    np.testing.assert_array_equal(rank_one_update(P, np.zeros(9), 1), P)
    np.testing.assert_array_equal(rank_one_update(P, np.zeros(9), -1), P)


def test_rank_one_round_trip(rng):
    for _ in range(20):
        P = random_spd(rng, 9)
        v = rng.normal(size=9)
        back = rank_one_update(rank_one_update(P, v, 1), v, -1)
        assert np.abs(back - P).max() < 1e-10


@pytest.mark.parametrize("sign", [1, -1])
def test_rank_one_matches_dense_inverse(rng, sign):
    for _ in range(20):
        P = random_spd(rng, 9, floor=0.05)
        v = rng.normal(size=9)
        if sign < 0:
            v *= 0.5 / np.sqrt(v @ P @ v)  # keep 1 - v'Pv = 0.75
        out = rank_one_update(P, v, sign)
        expect = np.linalg.inv(np.linalg.inv(P) + sign * np.outer(v, v))
        assert rel(out, expect) < 1e-8
        assert np.array_equal(out, out.T)
        assert np.all(np.linalg.eigvalsh(out) > 0)


def test_rank_one_downdate_guard(rng):
    P = np.eye(3)
    with pytest.raises(DowndateSingular):
        rank_one_update(P, np.array([1.0, 0.0, 0.0]), -1)
    with pytest.raises(DowndateSingular):
        rank_one_update(P, np.array([1.0, 0.1, 0.0]), -1)
    with pytest.raises(ValueError):
        rank_one_update(P, np.ones(3), 2)


def test_rank_one_backends_agree(rng, backend):
    P = random_spd(rng, 7)
    v = rng.normal(size=7) * 0.2
    a = P.copy()
    backend.rank_one_update(a, v, 1.0, 1e-10)
    backend.rank_one_update(a, v, -1.0, 1e-10)
    assert np.abs(a - P).max() < 1e-12


def test_batch_oracle_trivial_cases():
    w0 = np.array([0.5, -1.0])
    np.testing.assert_array_equal(batch_oracle_weighted(np.zeros((0, 2)), [], [], np.eye(2), w0), w0)
    w = batch_oracle_weighted([[1.0]], [3.0], [1.0], [[1e12]], [0.0])
    assert w[0] == pytest.approx(3.0, rel=1e-9)
    with pytest.raises(ValueError):
        batch_oracle_weighted([[1.0]], [3.0], [-1.0], [[1.0]], [0.0])


@settings(max_examples=25, deadline=None)
@given(
    lam=st.sampled_from([1.0, 0.999, 0.99, 0.95]),
    N=st.integers(1, 9),
    K=st.integers(1, 300),
    seed=st.integers(0, 2**31),
)
def test_lemma1_property(lam, N, K, seed):
    r = np.random.default_rng(seed)
    st_ = EstimatorState.for_rls(N, lam=lam, p0_scale=10.0, w0=0.0)
    st_.w0 = r.normal(size=N)
    st_.weights[:] = st_.w0
    Phi, Y = r.normal(size=(K, N)), r.normal(size=K) * 3
    for k in range(K):
        ffrls_step(st_, Phi[k], Y[k])
    c = lam ** (K - 1 - np.arange(K))
    w_o = batch_oracle_weighted(Phi, Y, c, st_.p0 / lam**K, st_.w0)
    assert rel(st_.weights, w_o) < 1e-8


def test_trainers_match_stepwise_functions(rng, backend):
    net = build_grid_network(3, 2, 1.0)
    X = rng.uniform(-1, 1, (300, 2))
    Y = np.sin(2 * X[:, 0]) * X[:, 1]
    Phi = regressor_matrix(net, X)

    sgd = SgdTrainer(net.with_weights(np.zeros(9)), eta=0.05)
    yhat, _ = sgd.run(X, Y, kernels=backend)
    ref = EstimatorState.for_sgd(9, eta=0.05)
    for k in range(300):
        assert yhat[k] == pytest.approx(Y[k] - sgd_step(ref, Phi[k], Y[k]), abs=1e-12)
    assert rel(sgd.state.weights, ref.weights) < 1e-12

    rls = RlsTrainer(net.with_weights(np.zeros(9)), lam=0.99)
    yhat, _ = rls.run(X, Y, kernels=backend)
    ref = EstimatorState.for_rls(9, lam=0.99)
    for k in range(300):
        assert yhat[k] == pytest.approx(Y[k] - ffrls_step(ref, Phi[k], Y[k]), abs=1e-9)
    assert rel(rls.state.weights, ref.weights) < 1e-9
    assert np.array_equal(rls.state.covariance, rls.state.covariance.T)


def test_steps_are_deterministic(rng):
    Phi, Y = rng.normal(size=(50, 4)), rng.normal(size=50)
    outs = []
    for _ in range(2):
        st_ = EstimatorState.for_rls(4, lam=0.99)
        for k in range(50):
            ffrls_step(st_, Phi[k], Y[k])
        outs.append((st_.weights.copy(), st_.covariance.copy()))
    assert np.array_equal(outs[0][0], outs[1][0]) and np.array_equal(outs[0][1], outs[1][1])
