import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtr

from kignorance import closed_form as cf
from kignorance import mc
from kignorance.errors import ConfigurationError, DomainError, MonteCarloError
from kignorance.payoffs import KIgnoranceModel, TerminalPayoff


def test_config_validation():
    for bad in (dict(n_steps=0), dict(n_paths=0), dict(seed=-1), dict(T=0.0)):
        with pytest.raises(ConfigurationError):
            mc.PathConfig(**bad)


def test_block_layout():
    cfg = mc.PathConfig(n_paths=1100, n_steps=3)
    assert cfg.n_blocks == 3
    assert cfg.block_range(2) == (1024, 1100)
    with pytest.raises(IndexError):
        mc.block_increments(cfg, 3)


def test_single_step_moments():
    cfg = mc.PathConfig(n_steps=1, n_paths=100_000, T=2.0)
    x = np.concatenate([p[:, -1] for _, p in mc.simulate_paths(cfg, 0.5)])
    se = math.sqrt(2.0 / x.size)
    assert abs(x.mean() - 0.5) <= 4 * se
    assert abs(x.var(ddof=1) - 2.0) <= 4 * 2.0 * math.sqrt(2.0 / x.size)


def test_paths_start_at_start():
    cfg = mc.PathConfig(n_steps=5, n_paths=10)
    _, paths = next(mc.simulate_paths(cfg, -1.25))
    assert paths.shape == (10, 6) and np.all(paths[:, 0] == -1.25)


def test_single_path_regeneration_is_bitwise():
    cfg = mc.PathConfig(n_steps=50, n_paths=1500, seed=7)
    blocks = dict(mc.simulate_paths(cfg, 0.0))
    for idx in (0, 511, 512, 1499):
        lo = (idx // mc.BLOCK_SIZE) * mc.BLOCK_SIZE
        assert np.array_equal(mc.simulate_path(cfg, 0.0, idx), blocks[lo][idx - lo])
    with pytest.raises(IndexError):
        mc.simulate_path(cfg, 0.0, 1500)


def test_path_prefix_does_not_depend_on_n_paths():
    a = mc.simulate_path(mc.PathConfig(n_steps=20, n_paths=600), 0.0, 3)
    b = mc.simulate_path(mc.PathConfig(n_steps=20, n_paths=5000), 0.0, 3)
    assert np.array_equal(a, b)


def test_seeds_differ():
    a = mc.simulate_path(mc.PathConfig(n_steps=20, n_paths=1, seed=1), 0.0, 0)
    b = mc.simulate_path(mc.PathConfig(n_steps=20, n_paths=1, seed=2), 0.0, 0)
    assert not np.array_equal(a, b)


def test_workers_do_not_change_results():
    m = KIgnoranceModel(0.3, 1.0)
    p = TerminalPayoff.indicator(0.0, 1.0)
    cfg = mc.PathConfig(n_steps=100, n_paths=3000)
    a = mc.estimate_Y(m, p, 0.0, 0.2, cfg, workers=1)
    b = mc.estimate_Y(m, p, 0.0, 0.2, cfg, workers=3)
    assert a == b


# ---------------------------------------------------------------- Tanaka

@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.floats(-0.5, 0.5), st.integers(1, 300))
def test_tanaka_residual_telescopes(seed, level, n):
    cfg = mc.PathConfig(n_steps=n, n_paths=1, seed=seed)
    path = mc.simulate_path(cfg, 0.0, 0)
    jump, ito = mc.tanaka_parts(path, level)
    # each step contributes |x1 - l| - |x0 - l| - sgn(x0 - l)(x1 - x0) >= 0
    d0, d1 = path[:-1] - level, path[1:] - level
    terms = np.abs(d1) - np.abs(d0) - np.sign(d0) * (d1 - d0)
    assert np.all(terms >= -1e-15)
    assert abs((jump - ito) - terms.sum()) <= 1e-12
    assert mc.local_time_tanaka(path, level) >= 0.0


def test_local_time_far_from_level_is_zero():
    cfg = mc.PathConfig(n_steps=1000, n_paths=200, T=0.01)
    _, paths = next(mc.simulate_paths(cfg, 0.0))
    assert np.max(mc.local_time_tanaka(paths, 5.0)) <= 1e-12


def test_local_time_mean_small_run():
    cfg = mc.PathConfig(n_steps=1000, n_paths=20_000, seed=3)
    lt = np.concatenate([mc.local_time_tanaka(p, 0.0) for _, p in mc.simulate_paths(cfg, 0.0)])
    se = lt.std(ddof=1) / math.sqrt(lt.size)
    # discrete monitoring biases E[L] down by O(sqrt(dt)); allow for it
    assert abs(lt.mean() - math.sqrt(2 / math.pi)) <= 3 * se + 0.5 * math.sqrt(cfg.dt)


# ---------------------------------------------------------------- estimators

def test_k0_indicator_is_gaussian_probability():
    est = mc.estimate_Y(KIgnoranceModel(0.0, 1.0), TerminalPayoff.indicator(-1.0, 1.0), 0.0, 0.0,
                        mc.PathConfig(n_steps=10, n_paths=50_000))
    assert est.within(ndtr(1.0) - ndtr(-1.0))


def test_indicator_small_run_matches_closed_form():
    m = KIgnoranceModel(0.1, 1.0)
    hs = np.array([-0.5, 0.5, 1.5])
    est = mc.estimate_Y(m, TerminalPayoff.indicator(0.0, 1.0), 0.0, hs, mc.PathConfig(n_steps=500, n_paths=40_000))
    for e, y in zip(est, cf.indicator_Y(m, 0.0, hs, 0.0, 1.0)):
        assert e.within(y)


def test_digital_uses_constant_sign():
    m = KIgnoranceModel(0.2, 1.0)
    f = mc.path_functionals(m, TerminalPayoff.digital_low(0.5), 0.0, 0.0, mc.PathConfig(n_steps=20, n_paths=2000))
    assert np.all(f["L_T"] == 0.0)
    est = mc.summarize(f["value"][0], 20)
    assert est.within(cf.digital_low_YZ(m, 0.0, 0.0, 0.5)[0])


def test_estimate_shape_follows_input():
    m = KIgnoranceModel(0.1, 1.0)
    p = TerminalPayoff.indicator(0.0, 1.0)
    cfg = mc.PathConfig(n_steps=10, n_paths=600)
    assert isinstance(mc.estimate_Y(m, p, 0.0, 0.1, cfg), mc.Estimate)
    assert len(mc.estimate_Y(m, p, 0.0, [0.1, 0.2], cfg)) == 2


def test_mirrored_start_gives_same_estimate():
    m = KIgnoranceModel(0.3, 1.0)
    p = TerminalPayoff.quadratic()
    cfg = mc.PathConfig(n_steps=100, n_paths=4000)
    a = mc.estimate_Y(m, p, 0.0, 0.6, cfg)
    b = mc.estimate_Y(m, p, 0.0, -0.6, cfg)
    # B and -B are equal in law, and the weight only sees |B - c|
    assert abs(a.mean - b.mean) <= 3 * math.hypot(a.std_error, b.std_error)


def test_w_at_center_is_zero():
    est = mc.estimate_w(KIgnoranceModel(0.5, 1.0), TerminalPayoff.quadratic(), 0.0, 0.0,
                        mc.PathConfig(n_steps=100, n_paths=2000))
    assert est.mean == 0.0


def test_w_sign_and_value():
    m = KIgnoranceModel(0.5, 1.0)
    est = mc.estimate_w(m, TerminalPayoff.quadratic(), 0.0, 0.8, mc.PathConfig(n_steps=500, n_paths=40_000))
    assert est.mean - 3 * est.std_error > 0
    assert est.within(cf.quadratic_Z(m, 0.0, 0.8))


def test_refinement_coupling_shares_paths():
    m = KIgnoranceModel(0.5, 1.0)
    coarse, fine = mc.estimate_w_refinement(m, TerminalPayoff.quadratic(), 0.0, 0.4,
                                            mc.PathConfig(n_steps=400, n_paths=4000), factor=4)
    assert coarse.n_steps == 100 and fine.n_steps == 400
    # killing on the fine grid is a superset of killing on the coarse grid
    assert fine.mean < coarse.mean


def test_refinement_needs_divisible_steps():
    with pytest.raises(ConfigurationError):
        mc.estimate_w_refinement(KIgnoranceModel(0.5, 1.0), TerminalPayoff.quadratic(), 0.0, 0.4,
                                 mc.PathConfig(n_steps=10, n_paths=10), factor=4)


def test_w_rejects_payoff_without_derivative():
    with pytest.raises(DomainError):
        mc.estimate_w(KIgnoranceModel(0.5, 1.0), TerminalPayoff.indicator(0.0, 1.0), 0.0, 0.2,
                      mc.PathConfig(n_steps=10, n_paths=10))


def test_non_finite_values_raise():
    # the weight itself underflows rather than overflows; an exploding payoff does not
    p = TerminalPayoff.general(lambda x: np.exp(400.0 * x * x), None, 0.0, 1, check=False)
    with pytest.raises(MonteCarloError):
        mc.estimate_Y(KIgnoranceModel(0.5, 1.0), p, 0.0, 0.0, mc.PathConfig(n_steps=10, n_paths=2000))


def test_summarize_and_estimate_helpers():
    est = mc.summarize(np.array([1.0, 2.0, 3.0, 4.0]), 7)
    assert est.mean == 2.5 and est.n_steps == 7
    assert est.std_error == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert est.z_score(2.5) == 0.0 and est.within(2.5 + 2 * est.std_error)
    flat = mc.Estimate(1.0, 0.0, 10, 1)
    assert flat.z_score(1.0) == 0.0 and flat.z_score(2.0) == math.inf
