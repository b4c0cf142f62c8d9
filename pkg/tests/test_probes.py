import numpy as np
import pytest

from proxgap.diffcore import NetworkSpec, Rng, hvp, init_network
from proxgap.distributions import GaussianMixture, make_splits
from proxgap.gapmetrics import ToyGameState
from proxgap.objectives import Classic, GanState
from proxgap.oracles import ToyGame, bilinear
from proxgap.probes import (
    DISCRIMINATOR,
    GENERATOR,
    DeviationTrace,
    SpectrumReport,
    TracePoint,
    hessian_spectrum_probe,
    unilateral_deviation,
)


def _quadratic_game(diag):
    """d is irrelevant; the generator loss is 0.5 g' diag(a) g."""
    a = np.asarray(diag, dtype=np.float64)
    return ToyGame("quadratic_probe",
                   lambda d, g: 0.5 * np.sum(a * g * g, axis=-1),
                   ((-1.0, 1.0),),
                   tuple((-5.0, 5.0) for _ in a))


def _gan_setup(seed=0):
    d_spec = NetworkSpec(2, (8,), 1, output_head="sigmoid", activation="tanh")
    g_spec = NetworkSpec(2, (8,), 2, activation="tanh")
    rng = Rng(seed)
    state = GanState(d_spec, g_spec, init_network(d_spec, rng.child(0)),
                     init_network(g_spec, rng.child(1)), Classic())
    dist = GaussianMixture([1.0], [[0.0, 0.0]], [[1.0, 1.0]])
    splits = make_splits(dist, 400, 200, 200, rng.child(2))
    return state, splits


# -- unilateral deviation ----------------------------------------------------


def test_deviation_zero_eval_interval_single_point():
    state = ToyGameState(bilinear(), np.array([0.5]), np.array([0.2]))
    trace = unilateral_deviation(state, None, steps=50, lr=0.05, eval_every=0, rng=Rng(1))
    assert len(trace.points) == 1
    assert trace.points[0].step == 0


def test_deviation_zero_steps_single_point():
    state, splits = _gan_setup()
    trace = unilateral_deviation(state, splits, steps=0, lr=0.01, eval_every=5, rng=Rng(2))
    assert len(trace.points) == 1


def test_deviation_cannot_improve_at_toy_nash():
    state = ToyGameState(bilinear(), np.array([0.0]), np.array([0.0]))
    trace = unilateral_deviation(state, None, steps=100, lr=0.05, eval_every=10, rng=Rng(3))
    assert np.max(np.abs(trace.values - trace.values[0])) < 1e-3


def test_deviation_descends_away_from_non_nash():
    # movable generator against a frozen discriminator strictly lowers V
    state = ToyGameState(bilinear(), np.array([0.8]), np.array([0.5]))
    trace = unilateral_deviation(state, None, steps=200, lr=0.05, eval_every=50, rng=Rng(4))
    assert trace.points[-1].value < trace.points[0].value - 0.5


def test_deviation_gan_records_divergence_and_is_pure():
    state, splits = _gan_setup()
    before_d = state.theta_d.values.copy()
    before_g = state.theta_g.values.copy()
    trace = unilateral_deviation(state, splits, steps=20, lr=0.01, eval_every=10, rng=Rng(5))
    assert np.array_equal(state.theta_d.values, before_d)
    assert np.array_equal(state.theta_g.values, before_g)
    assert all(p.divergence is not None for p in trace.points)
    assert all(np.isfinite(p.value) for p in trace.points)


def test_trace_validation():
    with pytest.raises(ValueError):
        DeviationTrace((TracePoint(0, 1.0, None), TracePoint(0, 2.0, None)))
    with pytest.raises(ValueError):
        DeviationTrace((TracePoint(0, np.nan, None),))


# -- hessian spectrum --------------------------------------------------------


def test_spectrum_constructed_saddle():
    state = ToyGameState(_quadratic_game([2.0, -1.0]), np.array([0.0]),
                         np.array([0.3, -0.2]))
    report = hessian_spectrum_probe(state, None, GENERATOR, k=2, rng=Rng(6))
    assert report.eigenvalues[0] == pytest.approx(2.0, abs=1e-3)
    assert report.eigenvalues[1] == pytest.approx(-1.0, abs=1e-3)
    assert report.nash_consistent is False


def test_spectrum_convex_quadratic_consistent():
    state = ToyGameState(_quadratic_game([2.0, 2.0]), np.array([0.0]),
                         np.array([0.3, -0.2]))
    report = hessian_spectrum_probe(state, None, GENERATOR, k=2, rng=Rng(7))
    assert np.allclose(report.eigenvalues, 2.0, atol=1e-3)
    assert report.nash_consistent is True


def test_spectrum_discriminator_sign_convention():
    # concave in d: eigenvalues negative -> consistent for the discriminator
    game = ToyGame("concave_d", lambda d, g: np.sum(-d * d, axis=-1),
                   ((-1.0, 1.0),), ((-1.0, 1.0),))
    state = ToyGameState(game, np.array([0.2]), np.array([0.0]))
    report = hessian_spectrum_probe(state, None, DISCRIMINATOR, k=1, rng=Rng(8))
    assert report.eigenvalues[0] == pytest.approx(-2.0, abs=1e-3)
    assert report.nash_consistent is True


def test_spectrum_matches_dense_solver_on_small_net():
    state, splits = _gan_setup(seed=9)
    # materialize the generator Hessian column by column through the same hvp
    from proxgap.probes import _gan_agent_loss
    loss, params = _gan_agent_loss(state, splits, GENERATOR, Rng(10))
    n = len(params)
    h = 1e-4 * (1.0 + np.linalg.norm(params.values))
    cols = [hvp(loss, params, e, h) for e in np.eye(n)]
    dense = np.linalg.eigvalsh(0.5 * (np.array(cols) + np.array(cols).T))
    top = dense[np.argsort(-np.abs(dense))][:3]
    report = hessian_spectrum_probe(state, splits, GENERATOR, k=3, rng=Rng(10))
    assert np.allclose(report.eigenvalues, top, atol=1e-3)


def test_spectrum_requires_tanh():
    d_spec = NetworkSpec(2, (8,), 1, output_head="sigmoid", activation="relu")
    g_spec = NetworkSpec(2, (8,), 2, activation="tanh")
    rng = Rng(11)
    state = GanState(d_spec, g_spec, init_network(d_spec, rng.child(0)),
                     init_network(g_spec, rng.child(1)), Classic())
    dist = GaussianMixture([1.0], [[0.0, 0.0]], [[1.0, 1.0]])
    splits = make_splits(dist, 100, 50, 50, rng.child(2))
    with pytest.raises(ValueError):
        hessian_spectrum_probe(state, splits, GENERATOR, k=1, rng=Rng(12))


def test_spectrum_report_flag_validation():
    with pytest.raises(ValueError):
        SpectrumReport((-1.0,), GENERATOR, True, 1e-3, (True,))


def test_spectrum_rejects_bad_agent():
    state = ToyGameState(bilinear(), np.array([0.0]), np.array([0.0]))
    with pytest.raises(ValueError):
        hessian_spectrum_probe(state, None, "referee", k=1, rng=Rng(13))
