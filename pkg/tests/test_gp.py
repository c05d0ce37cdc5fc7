import numpy as np
import pytest

from mfdgp import gp
from mfdgp.errors import ConditioningError, DomainError, InsufficientDataError, ShapeError
from mfdgp.kernels import KernelSpec

# ---------------------------------------------------------------------------
# Independent dense-inverse oracle: explicit kernel formulas, np.linalg.inv
# and slogdet, no shared code with the package's Cholesky path.
# ---------------------------------------------------------------------------


def oracle_kernel(spec, a, b):
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    r2 = np.sum((d / spec.lengthscales) ** 2)
    if spec.kind == "squared-exponential":
        return spec.signal_variance * np.exp(-0.5 * r2)
    r = np.sqrt(5.0 * r2)
    return spec.signal_variance * (1 + r + r * r / 3.0) * np.exp(-r)


def oracle_gram(spec, A, B):
    return np.array([[oracle_kernel(spec, a, b) for b in B] for a in A])


def oracle_posterior(spec, X, y, noise, Q):
    K = oracle_gram(spec, X, X) + noise * np.eye(len(X))
    Kinv = np.linalg.inv(K)
    Ks = oracle_gram(spec, X, Q)
    mean = Ks.T @ Kinv @ y
    var = np.array([oracle_kernel(spec, q, q) for q in Q]) - np.einsum(
        "ij,ik,kj->j", Ks, Kinv, Ks
    )
    sign, logdet = np.linalg.slogdet(K)
    assert sign > 0
    lml = -0.5 * y @ Kinv @ y - 0.5 * logdet - 0.5 * len(X) * np.log(2 * np.pi)
    return mean, var, lml


def make_gp(spec, X, y, noise):
    data = gp.GPDataset(inputs=X, targets=y, noise_variance=noise)
    return gp.TrainedGP.from_params(data, spec)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def test_dataset_validation():
    with pytest.raises(ShapeError):
        gp.GPDataset(inputs=np.zeros((3, 1)), targets=np.zeros(2), noise_variance=0.0)
    with pytest.raises(InsufficientDataError):
        gp.GPDataset(inputs=np.zeros((0, 1)), targets=np.zeros(0), noise_variance=0.0)
    with pytest.raises(DomainError):
        gp.GPDataset(inputs=[[np.inf]], targets=[0.0], noise_variance=0.0)
    with pytest.raises(DomainError):
        gp.GPDataset(inputs=[[0.0]], targets=[0.0], noise_variance=-1.0)


def test_chol_factor_reconstructs_covariance():
    rng = np.random.default_rng(1)
    X = rng.uniform(-1, 1, size=(8, 2))
    y = rng.normal(size=8)
    spec = KernelSpec(kind="squared-exponential", lengthscales=[0.8, 1.1], signal_variance=1.4)
    model = make_gp(spec, X, y, 1e-4)
    K = oracle_gram(spec, X, X) + 1e-4 * np.eye(8)
    recon = model.chol_factor @ model.chol_factor.T
    assert np.all(np.diag(model.chol_factor) > 0)
    assert np.max(np.abs(recon - K)) <= 1e-8 * np.max(np.abs(K))


# ---------------------------------------------------------------------------
# predict / lml / sample against the oracle
# ---------------------------------------------------------------------------


def test_posterior_matches_dense_oracle():
    rng = np.random.default_rng(7)
    spec = KernelSpec(kind="squared-exponential", lengthscales=[0.5, 0.9], signal_variance=2.0)
    X = rng.uniform(0, 1, size=(6, 2))
    y = np.sin(3 * X[:, 0]) + X[:, 1]
    Q = rng.uniform(0, 1, size=(3, 2))
    model = make_gp(spec, X, y, 1e-6)
    mean, var = gp.predict(model, Q)
    o_mean, o_var, o_lml = oracle_posterior(spec, X, y, 1e-6, Q)
    np.testing.assert_allclose(mean, o_mean, atol=1e-8)
    np.testing.assert_allclose(var, o_var, atol=1e-8)
    assert gp.log_marginal_likelihood(model) == pytest.approx(o_lml, abs=1e-8)


def test_lml_trivial_cases():
    # n = 1, target 0, prior variance 1: a standard normal evaluated at zero
    model = make_gp(
        KernelSpec(kind="squared-exponential", lengthscales=[1.0], signal_variance=1.0),
        np.array([[0.5]]), np.array([0.0]), 0.0,
    )
    assert gp.log_marginal_likelihood(model) == pytest.approx(-0.5 * np.log(2 * np.pi), abs=1e-12)

    # zero targets: the quadratic term vanishes, leaving the complexity terms
    rng = np.random.default_rng(2)
    X = rng.uniform(size=(5, 1))
    spec = KernelSpec(kind="matern-5/2", lengthscales=[0.7], signal_variance=1.3)
    model = make_gp(spec, X, np.zeros(5), 1e-3)
    expected = -np.sum(np.log(np.diag(model.chol_factor))) - 2.5 * np.log(2 * np.pi)
    assert gp.log_marginal_likelihood(model) == pytest.approx(expected, abs=1e-12)


def test_lml_invariant_under_reordering():
    rng = np.random.default_rng(4)
    X = rng.uniform(size=(7, 1))
    y = np.cos(4 * X[:, 0])
    spec = KernelSpec(kind="squared-exponential", lengthscales=[0.4], signal_variance=1.0)
    base = gp.log_marginal_likelihood(make_gp(spec, X, y, 1e-5))
    for seed in range(5):
        perm = np.random.default_rng(seed).permutation(7)
        shuffled = gp.log_marginal_likelihood(make_gp(spec, X[perm], y[perm], 1e-5))
        assert shuffled == pytest.approx(base, abs=1e-9)


def test_noise_free_interpolation_and_prior_reversion():
    rng = np.random.default_rng(11)
    X = rng.uniform(size=(6, 1))
    y = np.sin(5 * X[:, 0])
    spec = KernelSpec(kind="squared-exponential", lengthscales=[0.3], signal_variance=1.5)
    model = make_gp(spec, X, y, 0.0)
    mean, var = gp.predict(model, X)
    np.testing.assert_allclose(mean, y, atol=1e-7)
    assert np.all(var <= 1e-8)
    # 20+ lengthscales away the posterior reverts to the prior variance
    far_mean, far_var = gp.predict(model, np.array([[50.0]]))
    assert far_var[0] == pytest.approx(1.5, abs=1e-6)
    assert far_mean[0] == pytest.approx(0.0, abs=1e-6)


def test_predict_dimension_mismatch():
    model = make_gp(
        KernelSpec(kind="squared-exponential", lengthscales=[1.0], signal_variance=1.0),
        np.array([[0.0]]), np.array([1.0]), 1e-8,
    )
    with pytest.raises(ShapeError):
        gp.predict(model, np.zeros((2, 3)))


def test_predictions_are_pure():
    rng = np.random.default_rng(5)
    X = rng.uniform(size=(5, 1))
    y = rng.normal(size=5)
    model = make_gp(
        KernelSpec(kind="squared-exponential", lengthscales=[0.6], signal_variance=1.0),
        X, y, 1e-6,
    )
    Q = rng.uniform(size=(4, 1))
    m1, v1 = gp.predict(model, Q)
    m2, v2 = gp.predict(model, Q)
    assert np.array_equal(m1, m2) and np.array_equal(v1, v2)
    s1 = gp.sample_posterior(model, Q, count=3, rng_seed=9)
    s2 = gp.sample_posterior(model, Q, count=3, rng_seed=9)
    assert np.array_equal(s1, s2)


def test_variance_shrinks_when_observation_added():
    # adding a noise-free observation at the query cannot raise its variance
    rng = np.random.default_rng(13)
    spec = KernelSpec(kind="squared-exponential", lengthscales=[0.5], signal_variance=1.0)
    X = rng.uniform(size=(5, 1))
    y = np.sin(3 * X[:, 0])
    q = np.array([[0.42]])
    before = gp.predict(make_gp(spec, X, y, 0.0), q)[1][0]
    X2 = np.vstack([X, q])
    y2 = np.append(y, 0.123)
    after = gp.predict(make_gp(spec, X2, y2, 0.0), q)[1][0]
    assert after <= before + 1e-12


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def test_sample_posterior_monte_carlo_mean():
    rng = np.random.default_rng(17)
    X = rng.uniform(size=(5, 1))
    y = np.sin(3 * X[:, 0])
    spec = KernelSpec(kind="squared-exponential", lengthscales=[0.5], signal_variance=1.0)
    model = make_gp(spec, X, y, 1e-6)
    q = np.array([[0.8]])
    mean, var = gp.predict(model, q)
    draws = gp.sample_posterior(model, q, count=10_000, rng_seed=3)
    assert draws.shape == (10_000, 1)
    # empirical mean within 4 posterior standard deviations / sqrt(n)
    assert abs(draws.mean() - mean[0]) <= 4 * np.sqrt(var[0]) / 100.0


def test_sample_posterior_degenerate_at_training_point():
    X = np.array([[0.2], [0.7]])
    y = np.array([1.0, -0.5])
    spec = KernelSpec(kind="squared-exponential", lengthscales=[0.4], signal_variance=1.0)
    model = make_gp(spec, X, y, 0.0)
    draws = gp.sample_posterior(model, X[:1], count=64, rng_seed=0)
    assert np.max(np.abs(draws - 1.0)) <= 1e-4


def test_sample_posterior_count_validation():
    model = make_gp(
        KernelSpec(kind="squared-exponential", lengthscales=[1.0], signal_variance=1.0),
        np.array([[0.0]]), np.array([1.0]), 1e-8,
    )
    with pytest.raises(DomainError):
        gp.sample_posterior(model, np.array([[0.5]]), count=0, rng_seed=0)


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


def default_init(d=1):
    return KernelSpec(
        kind="squared-exponential", lengthscales=np.full(d, 0.5), signal_variance=1.0
    )


def test_fit_single_point_interpolates():
    data = gp.GPDataset(inputs=[[0.3]], targets=[2.0], noise_variance=0.0)
    model = gp.fit(data, default_init(), restarts=2, rng_seed=0)
    mean, _ = gp.predict(model, [[0.3]])
    assert mean[0] == pytest.approx(2.0, abs=1e-9)


def test_fit_recovers_interpolation_on_gp_draw():
    # data drawn from a known SE-kernel GP with noise std 1e-6; the fitted
    # model must reproduce the targets at the training inputs
    rng = np.random.default_rng(23)
    X = np.linspace(0.0, 1.0, 5)[:, None]
    true = KernelSpec(kind="squared-exponential", lengthscales=[0.25], signal_variance=1.0)
    K = oracle_gram(true, X, X) + 1e-12 * np.eye(5)
    y = np.linalg.cholesky(K) @ rng.standard_normal(5)
    data = gp.GPDataset(inputs=X, targets=y, noise_variance=1e-12)
    model = gp.fit(data, default_init(), restarts=3, rng_seed=1)
    mean, _ = gp.predict(model, X)
    np.testing.assert_allclose(mean, y, atol=1e-6)


def test_fit_deterministic_given_seed():
    rng = np.random.default_rng(29)
    X = rng.uniform(size=(6, 1))
    y = np.sin(6 * X[:, 0])
    data = gp.GPDataset(inputs=X, targets=y, noise_variance=1e-8)
    a = gp.fit(data, default_init(), restarts=3, rng_seed=42)
    b = gp.fit(data, default_init(), restarts=3, rng_seed=42)
    assert np.array_equal(a.kernel.lengthscales, b.kernel.lengthscales)
    assert a.kernel.signal_variance == b.kernel.signal_variance


def test_fit_rejects_bad_restarts():
    data = gp.GPDataset(inputs=[[0.0]], targets=[1.0], noise_variance=0.0)
    with pytest.raises(DomainError):
        gp.fit(data, default_init(), restarts=0, rng_seed=0)


def test_factorize_failure_reports_jitter_levels():
    # NaN entries can never factorize; the error carries the attempted levels
    with pytest.raises(ConditioningError):
        gp._factorize(np.full((2, 2), np.nan), 0.0)
    bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # indefinite: jitter ladder runs out
    with pytest.raises(ConditioningError) as err:
        gp._factorize(bad, 0.0)
    assert len(err.value.jitter_levels) > 0
