import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smrd.fourier import norm2
from smrd.sure import (
    EarlyStopConfig,
    SureConfig,
    TttConfig,
    TttState,
    draw_probe,
    early_stop_check,
    grad_sure_lambda,
    mc_sure,
    sure_known_sigma,
    update_lambda,
)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# mc_sure ----------------------------------------------------------------

def test_mc_sure_constant_update_is_zero():
    rng = np.random.default_rng(0)
    x_t = random_complex(rng, (8, 8))
    x_zf = random_complex(rng, (8, 8))
    fixed = random_complex(rng, (8, 8))
    val = mc_sure(lambda v, lam: fixed, x_t, x_zf, 1.0, SureConfig(), np.random.default_rng(1))
    assert val == 0.0


def test_mc_sure_identity_matches_exact_trace():
    rng = np.random.default_rng(2)
    x_t = random_complex(rng, (16, 16))
    x_zf = random_complex(rng, (16, 16))
    cfg = SureConfig(probes=1000)
    val = mc_sure(lambda v, lam: v, x_t, x_zf, 1.0, cfg, np.random.default_rng(3))
    # identity divergence is exactly N, so the expectation is ||x_t - x_zf||^2
    assert val == pytest.approx(norm2(x_t - x_zf), rel=0.02)


def test_mc_sure_divergence_matches_materialized_trace():
    n = 256
    rng = np.random.default_rng(4)
    w = np.eye(n) + 0.1 * rng.standard_normal((n, n))
    x_t = random_complex(rng, (16, 16))
    x_zf = random_complex(rng, (16, 16))

    def h(v, lam):
        return (w @ v.ravel()).reshape(v.shape)

    cfg = SureConfig(probes=10_000)
    val = mc_sure(h, x_t, x_zf, 1.0, cfg, np.random.default_rng(5))
    div_est = val * n / norm2(h(x_t, 1.0) - x_zf)
    assert div_est == pytest.approx(np.trace(w), rel=0.02)


def test_mc_sure_probe_batches_agree():
    n = 256
    rng = np.random.default_rng(6)
    w = np.eye(n) + 0.1 * rng.standard_normal((n, n))
    x_t = random_complex(rng, (16, 16))
    x_zf = random_complex(rng, (16, 16))

    def h(v, lam):
        return (w @ v.ravel()).reshape(v.shape)

    cfg = SureConfig(probes=10_000)
    a = mc_sure(h, x_t, x_zf, 1.0, cfg, np.random.default_rng(100))
    b = mc_sure(h, x_t, x_zf, 1.0, cfg, np.random.default_rng(200))
    assert a == pytest.approx(b, rel=0.03)


def test_mc_sure_deterministic_given_rng():
    rng = np.random.default_rng(7)
    x_t = random_complex(rng, (8, 8))
    x_zf = random_complex(rng, (8, 8))
    a = mc_sure(lambda v, lam: 0.5 * v, x_t, x_zf, 1.0, SureConfig(), np.random.default_rng(8))
    b = mc_sure(lambda v, lam: 0.5 * v, x_t, x_zf, 1.0, SureConfig(), np.random.default_rng(8))
    assert a == b


def test_probe_distribution_unit_entry_variance():
    mu = draw_probe(np.random.default_rng(9), (200, 200))
    assert np.mean(np.abs(mu) ** 2) == pytest.approx(1.0, rel=0.02)


# sure_known_sigma -------------------------------------------------------

def test_known_sigma_identity_with_n_divergence_is_zero():
    rng = np.random.default_rng(10)
    x = random_complex(rng, (8, 8))
    assert sure_known_sigma(x, x, 0.3, divergence=x.size) == pytest.approx(0.0, abs=1e-12)


def test_known_sigma_zero_noise_reduces_to_residual():
    rng = np.random.default_rng(11)
    x_hat = random_complex(rng, (8, 8))
    x_zf = random_complex(rng, (8, 8))
    assert sure_known_sigma(x_hat, x_zf, 0.0, divergence=123.0) == pytest.approx(
        norm2(x_hat - x_zf)
    )


@pytest.mark.parametrize("c", [0.3, 0.7, 1.0])
def test_known_sigma_unbiased_for_shrinkage(c):
    # complex conventions: sigma^2 = E|z_i|^2, divergence over real coords
    n = 256
    rng = np.random.default_rng(12)
    x = random_complex(rng, (16, 16)) / np.sqrt(2)
    sigma = 0.5
    sures, mses = [], []
    for _ in range(3000):
        z = (sigma / np.sqrt(2)) * random_complex(rng, x.shape)
        y = x + z
        x_hat = c * y
        sures.append(sure_known_sigma(x_hat, y, sigma, divergence=2 * n * c))
        mses.append(norm2(x_hat - x))
    assert np.mean(sures) == pytest.approx(np.mean(mses), rel=0.05)


# grad_sure_lambda -------------------------------------------------------

def test_grad_zero_when_h_ignores_lambda():
    rng = np.random.default_rng(13)
    x_t = random_complex(rng, (8, 8))
    x_zf = random_complex(rng, (8, 8))
    g = grad_sure_lambda(
        lambda v, lam: 0.3 * v, x_t, x_zf, 2.0, SureConfig(), np.random.default_rng(14)
    )
    assert abs(g) <= 1e-9


def test_grad_matches_scalar_closed_form():
    # 1x1 system with A = 1: h(v, lam) = (x_zf + lam * v) / (1 + lam).
    # With one probe mu, SURE(lam) = |mu|^2 |x_t - x_zf|^2 lam^3 / (1+lam)^3.
    x_t = np.array([[1.4 - 0.6j]])
    x_zf = np.array([[0.2 + 0.3j]])
    lam = 1.0

    def h(v, lam_):
        return (x_zf + lam_ * v) / (1.0 + lam_)

    seed = 15
    g = grad_sure_lambda(h, x_t, x_zf, lam, SureConfig(), np.random.default_rng(seed))
    mu = draw_probe(np.random.default_rng(seed), x_t.shape)
    k = float(np.abs(mu[0, 0]) ** 2 * np.abs(x_t[0, 0] - x_zf[0, 0]) ** 2)
    want = k * 3.0 * lam**2 / (1.0 + lam) ** 4
    assert g == pytest.approx(want, abs=1e-4)


def test_grad_negative_when_sure_decreases_in_lambda():
    # h(v, lam) = v / (1 + lam): both the residual and the divergence shrink
    # with lam, so SURE is decreasing; verify against a grid of evaluations.
    rng = np.random.default_rng(16)
    x_t = random_complex(rng, (8, 8))
    x_zf = np.zeros_like(x_t)

    def h(v, lam):
        return v / (1.0 + lam)

    cfg = SureConfig()
    grid = [mc_sure(h, x_t, x_zf, lam, cfg, np.random.default_rng(17)) for lam in (0.5, 1.0, 2.0, 4.0)]
    assert all(b < a for a, b in zip(grid, grid[1:]))
    g = grad_sure_lambda(h, x_t, x_zf, 1.0, cfg, np.random.default_rng(17))
    assert g < 0


def test_grad_one_sided_at_bounds():
    rng = np.random.default_rng(18)
    x_t = random_complex(rng, (4, 4))
    x_zf = random_complex(rng, (4, 4))

    def h(v, lam):
        return v * lam

    g = grad_sure_lambda(
        h, x_t, x_zf, 1e-4, SureConfig(), np.random.default_rng(19),
        lambda_min=1e-4, lambda_max=1e4,
    )
    assert np.isfinite(g)


# update_lambda ----------------------------------------------------------

def test_update_lambda_zero_grad_noop():
    state = TttState(lam=2.0)
    update_lambda(state, 0.0, TttConfig(), t=0, freeze_step=100)
    assert state.lam == 2.0


def test_update_lambda_frozen():
    state = TttState(lam=2.0)
    update_lambda(state, 5.0, TttConfig(), t=130, freeze_step=129)
    assert state.lam == 2.0
    assert state.steps_taken == 0


def test_update_lambda_first_adam_step():
    cfg = TttConfig(lambda0=2.0, alpha=0.2)
    state = TttState(lam=2.0)
    update_lambda(state, 1.0, cfg, t=0, freeze_step=100)
    want = 2.0 - 0.2 * 1.0 / (1.0 + 1e-8)  # bias-corrected first step
    assert state.lam == pytest.approx(want, abs=1e-6)


def test_update_lambda_clamps():
    cfg = TttConfig(lambda0=2.0, alpha=0.2, lambda_min=1.5, lambda_max=2.5)
    state = TttState(lam=1.6)
    for t in range(10):
        update_lambda(state, 1.0, cfg, t=t, freeze_step=100)
    assert state.lam == 1.5


# early_stop_check -------------------------------------------------------

def oracle_stop(history, w):
    if len(history) < 2 * w:
        return False
    recent = sum(history[len(history) - w :]) / w
    previous = sum(history[len(history) - 2 * w : len(history) - w]) / w
    return recent > previous


def test_early_stop_needs_two_windows():
    assert early_stop_check([1.0] * 5, 3) is False


def test_early_stop_decreasing_never_fires():
    w = 5
    history = list(np.linspace(10.0, 1.0, 4 * w))
    for end in range(len(history)):
        assert early_stop_check(history[: end + 1], w) is False


def test_early_stop_step_up_fires():
    w = 4
    history = [1.0] * w + [2.0] * w
    assert early_stop_check(history, w) is True


def test_early_stop_v_shape_matches_oracle_trigger():
    w = 7
    down = list(np.linspace(5.0, 1.0, 40))
    up = list(np.linspace(1.0, 4.0, 40))
    history = down + up
    first_impl = next(
        (i for i in range(len(history)) if early_stop_check(history[: i + 1], w)), None
    )
    first_oracle = next(
        (i for i in range(len(history)) if oracle_stop(history[: i + 1], w)), None
    )
    assert first_impl == first_oracle is not None


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=0, max_size=50),
    st.integers(min_value=1, max_value=8),
)
def test_early_stop_matches_oracle(history, w):
    assert early_stop_check(history, w) == oracle_stop(history, w)


# config validation ------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        SureConfig(probes=0)
    with pytest.raises(ValueError):
        TttConfig(alpha=0.0)
    with pytest.raises(ValueError):
        TttConfig(freeze_fraction=0.0)
    with pytest.raises(ValueError):
        EarlyStopConfig(window=0).resolve_window(100)
    assert EarlyStopConfig().resolve_window(300) == 42
    assert TttConfig().freeze_step(300) == 129
