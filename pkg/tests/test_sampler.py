import math

import numpy as np
import pytest

from specwave import (
    RandomStream,
    SpectralModel,
    build_model,
    mode_moments,
    project,
    sample_exact,
    sample_exact_batch,
    sample_path_oracle,
    sample_path_oracle_batch,
    total_second_moment,
)
from specwave.analytics import moment_arrays

PI2 = math.pi**2

MODELS = [
    build_model(PI2, 2, 0, 1),
    build_model(1, 2, 0, 1),
    build_model(4, 3, 0.2, 0.5),
]


def test_empty_sample():
    s = sample_exact(MODELS[0], 0, RandomStream(1))
    assert s.level == 0
    assert s.norm_sq() == 0.0


def test_bitwise_determinism():
    a = sample_exact(MODELS[0], 64, RandomStream(7, 3))
    b = sample_exact(MODELS[0], 64, RandomStream(7, 3))
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    c = sample_exact(MODELS[0], 64, RandomStream(7, 4))
    assert not np.array_equal(a.x, c.x)


@pytest.mark.parametrize("N,M", [(0, 8), (3, 8), (8, 8), (17, 64), (64, 256)])
def test_nesting_invariant(N, M):
    stream = RandomStream(2023, 1)
    for model in MODELS:
        small = sample_exact(model, N, stream)
        big = sample_exact(model, M, stream)
        assert np.array_equal(project(big, N).x, small.x)
        assert np.array_equal(project(big, N).y, small.y)


def test_batch_matches_single_draws():
    model = MODELS[1]
    x, y = sample_exact_batch(model, 16, RandomStream(5), 3, 4)
    for j in range(4):
        s = sample_exact(model, 16, RandomStream(5), index=3 + j)
        assert np.array_equal(s.x, x[j]) and np.array_equal(s.y, y[j])


def test_project_identity_zero_pythagoras():
    s = sample_exact(MODELS[0], 32, RandomStream(11))
    same = project(s, s.level)
    assert np.array_equal(same.x, s.x)
    assert project(s, 0).level == 0
    head = project(s, 12)
    tail_sq = float(np.sum(s.x[12:] ** 2) + np.sum(s.y[12:] ** 2))
    assert head.norm_sq() + tail_sq == pytest.approx(s.norm_sq(), rel=1e-12)
    with pytest.raises(ValueError):
        project(s, 33)


def test_per_mode_empirical_moments():
    model = MODELS[0]
    x, y = sample_exact_batch(model, 8, RandomStream(97), 0, 100_000)
    n_samples = x.shape[0]
    for n in (1, 2, 5):
        mm = mode_moments(model, n)
        for emp, target in (
            (x[:, n - 1] ** 2, mm.var1),
            (y[:, n - 1] ** 2, mm.var2),
            (x[:, n - 1] * y[:, n - 1], mm.cov),
        ):
            se = float(np.std(emp, ddof=1)) / math.sqrt(n_samples)
            assert abs(float(np.mean(emp)) - target) <= 3 * se
        for coords in (x[:, n - 1], y[:, n - 1]):
            se = float(np.std(coords, ddof=1)) / math.sqrt(n_samples)
            assert abs(float(np.mean(coords))) <= 4 * se


def test_norm_identity_across_models():
    for seed, model in enumerate(MODELS):
        x, y = sample_exact_batch(model, 32, RandomStream(100 + seed), 0, 20_000)
        norms = np.einsum("ij,ij->i", x, x) + np.einsum("ij,ij->i", y, y)
        se = float(np.std(norms, ddof=1)) / math.sqrt(norms.size)
        assert abs(float(np.mean(norms)) - total_second_moment(model, 32)) <= 4 * se


# ---------------------------------------------------------------------------
# quadrature oracle
# ---------------------------------------------------------------------------

def test_oracle_single_step_structure():
    # K = 1: both coordinates are the same increment scaled by sin/cos(wT)
    model = MODELS[1]
    x, y = sample_path_oracle_batch(model, 4, 1, RandomStream(3), 0, 200)
    n = np.arange(1, 5, dtype=float)
    omega = np.sqrt(model.lambda_abs(n))
    ratio = np.sin(omega * model.T) / np.cos(omega * model.T)
    assert np.allclose(x, y * ratio, rtol=1e-12)
    # law check: Var(x_n) = (mu/w)^2 sin^2(wT) * T
    target = (model.noise_weight(n) / omega) ** 2 * np.sin(omega * model.T) ** 2 * model.T
    emp = np.mean(x**2, axis=0)
    se = np.std(x**2, axis=0, ddof=1) / math.sqrt(x.shape[0])
    assert np.all(np.abs(emp - target) <= 4 * se)


def test_oracle_moments_converge_to_exact():
    model = MODELS[1]
    x, y = sample_path_oracle_batch(model, 1, 1024, RandomStream(41), 0, 20_000)
    mm = mode_moments(model, 1)
    for emp, target in ((x[:, 0] ** 2, mm.var1), (y[:, 0] ** 2, mm.var2), (x[:, 0] * y[:, 0], mm.cov)):
        se = float(np.std(emp, ddof=1)) / math.sqrt(emp.size)
        assert abs(float(np.mean(emp)) - target) <= 4 * se


def test_oracle_quadrature_bias_shrinks_with_k():
    # deterministic check on the Riemann sums the oracle induces:
    # E[x_1^2] under the oracle equals (mu/w)^2 (T/K) sum_k sin^2(w (T - s_k))
    model = MODELS[1]
    omega = float(np.sqrt(model.lambda_abs(1.0)))
    mm = mode_moments(model, 1)
    biases = []
    for K in (2**6, 2**8, 2**10):
        s = np.arange(K) * model.T / K
        riemann = (model.T / K) * float(np.sum(np.sin(omega * (model.T - s)) ** 2))
        biases.append(abs(riemann * (model.noise_weight(1.0) / omega) ** 2 - mm.var1))
    assert biases[0] > biases[1] > biases[2]


def test_oracle_rejects_bad_step_count():
    with pytest.raises(ValueError):
        sample_path_oracle(MODELS[0], 2, 0, RandomStream(0))
