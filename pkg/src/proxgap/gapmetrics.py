"""Gradient-based estimators for the worst-case discriminator value, the
penalized worst-case generator value, and the plain and proximal duality gaps.

The estimators run on full GAN states and on toy-game configurations through
one code path: toy games stand in wherever exhaustive grid search is feasible,
so every estimator can be checked against :mod:`proxgap.oracles`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .diffcore import (
    NonFiniteError,
    ParamVector,
    Rng,
    Tensor,
    adam_init,
    adam_step,
    forward,
    forward_graph,
    input_grad_batch,
    input_grad_columns,
)
from .distributions import DataSplits
from .objectives import (
    GanState,
    WassersteinClip,
    check_clip_box,
    objective_from_outputs,
    value_and_grad_d,
    value_and_grad_g,
    value_graph,
)
from .oracles import ToyGame, toy_grad_d, toy_grad_g, toy_value

# Step-size guard for the penalized inner ascent: plain gradient ascent on
# V - lam * dist^2 is unstable once the step exceeds ~1/(curvature) ~ 1/(2*lam*S),
# so the step is capped at 1/(GUARD * lam).  Below the crossover the configured
# rate is used unchanged, which keeps the small-lam protocol intact.
STEP_GUARD = 25.0

_EVAL_TAG = 0
_DW_TAG = 1
_GW_LAMBDA_TAG = 2
_GW_PLAIN_TAG = 3


class ProxDivergenceError(RuntimeError):
    """The penalized inner ascent produced a non-finite objective."""


@dataclass(frozen=True)
class ProximalConfig:
    """Budgets and rates for gap estimation (lam=0.1, 20 inner steps by default)."""

    lam: float = 0.1
    prox_steps: int = 20
    prox_lr: float = 0.05
    worst_iters: int = 40
    worst_lr: float = 5e-3
    sobolev_h: float = 1e-3
    batch_size: int = 128

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.prox_steps < 1 or self.worst_iters < 0 or self.batch_size < 1:
            raise ValueError("iteration budgets must be positive")
        if self.prox_lr <= 0 or self.worst_lr <= 0 or self.sobolev_h <= 0:
            raise ValueError("rates and steps must be positive")


def iters_for_epochs(n_search: int, batch_size: int, epochs: int = 10) -> int:
    """Worst-case iteration budget equal to `epochs` passes over the search split."""
    return max(1, math.ceil(epochs * n_search / batch_size))


@dataclass(frozen=True)
class GapReport:
    """Both gap estimates for one checkpoint, with the budgets that produced them."""

    v_dw: float
    v_gw_lambda: float
    dg_lambda: float
    v_gw_plain: float
    dg_plain: float
    lam: float
    worst_iters: int
    prox_steps: int
    seed: int

    def __post_init__(self):
        if self.dg_lambda != self.v_dw - self.v_gw_lambda:
            raise ValueError("dg_lambda must equal v_dw - v_gw_lambda")
        if self.dg_plain != self.v_dw - self.v_gw_plain:
            raise ValueError("dg_plain must equal v_dw - v_gw_plain")


@dataclass(frozen=True)
class ToyGameState:
    """A toy-game configuration in the shape the estimators expect."""

    game: ToyGame
    d: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d", np.asarray(self.d, dtype=np.float64).ravel())
        object.__setattr__(self, "g", np.asarray(self.g, dtype=np.float64).ravel())
        if self.d.size != self.game.d_dim or self.g.size != self.game.g_dim:
            raise ValueError("configuration does not match the game's dimensions")


# -- the Sobolev function distance ----------------------------------------


def sobolev_dist_sq(d_spec, theta_1: ParamVector, theta_2: ParamVector,
                    x_batch, h: float) -> float:
    """Mean squared input-gradient difference over the batch.

    Realizes the squared function distance between two discriminators as
    (1/n) sum_i ||grad_x D_1(x_i) - grad_x D_2(x_i)||^2.
    """
    x_batch = np.asarray(x_batch, dtype=np.float64)
    if x_batch.shape[0] == 0:
        raise ValueError("batch must be non-empty")
    g1 = input_grad_batch(d_spec, theta_1, x_batch, h)
    g2 = input_grad_batch(d_spec, theta_2, x_batch, h)
    diff = g1 - g2
    return float(np.mean(np.sum(diff * diff, axis=1)))


def _sobolev_graph(d_spec, theta: Tensor, anchor_grads: np.ndarray, x_batch, h: float):
    """Graph version of sobolev_dist_sq with the anchor side precomputed."""
    total = None
    for j, col in enumerate(input_grad_columns(d_spec, theta, x_batch, h)):
        diff = col - anchor_grads[:, j:j + 1]
        term = (diff * diff).mean()
        total = term if total is None else total + term
    return total


# -- internal game operations ----------------------------------------------


class _GanOps:
    def __init__(self, state: GanState, splits: DataSplits, cfg: ProximalConfig,
                 rng: Rng, eval_latent=None):
        if splits is None:
            raise ValueError("GAN estimation requires data splits")
        self.state = state
        self.splits = splits
        self.cfg = cfg
        self.rng = rng
        if eval_latent is None:
            eval_latent = rng.child(_EVAL_TAG).normal(
                (splits.s_c.shape[0], state.latent_dim))
        self.eval_latent = np.asarray(eval_latent, dtype=np.float64)
        self.d0 = state.theta_d
        self.g0 = state.theta_g
        self.d_dim = len(state.theta_d)
        self.g_dim = len(state.theta_g)

    def draw_batch(self):
        idx = self.rng.integers(0, self.splits.s_b.shape[0], self.cfg.batch_size)
        latent = self.rng.normal((self.cfg.batch_size, self.state.latent_dim))
        return self.splits.s_b[idx], latent

    def eval_batch(self):
        return self.splits.s_c, self.eval_latent

    def eval_value(self, theta_d, theta_g) -> float:
        return value_graph(self.state, theta_d, theta_g,
                           self.splits.s_c, self.eval_latent).item()

    def v_grad_d(self, theta_d, theta_g, batch):
        real, latent = batch
        return value_and_grad_d(self.state, theta_d, theta_g, real, latent)

    def v_grad_g(self, theta_d, theta_g, batch):
        real, latent = batch
        return value_and_grad_g(self.state, theta_d, theta_g, real, latent)

    def make_prox_step(self, anchor, theta_g, batch, lam):
        real, latent = batch
        return _gan_prox_step_fns(self.state, anchor, theta_g, real, latent,
                                  lam, self.cfg.sobolev_h)

    def project_d(self, theta_d):
        return _objective_projector(self.state.objective)(theta_d)

    def project_g(self, theta_g):
        return theta_g


class _ToyOps:
    def __init__(self, state: ToyGameState, cfg: ProximalConfig, rng: Rng):
        self.game = state.game
        self.cfg = cfg
        self.rng = rng
        self.d0 = state.d.copy()
        self.g0 = state.g.copy()
        self.d_dim = state.d.size
        self.g_dim = state.g.size

    def draw_batch(self):
        return None

    def eval_batch(self):
        return None

    def eval_value(self, d, g) -> float:
        return toy_value(self.game, d, g)

    def v_grad_d(self, d, g, batch):
        return toy_value(self.game, d, g), toy_grad_d(self.game, d, g)

    def v_grad_g(self, d, g, batch):
        return toy_value(self.game, d, g), toy_grad_g(self.game, d, g)

    def make_prox_step(self, anchor, g, batch, lam):
        anchor = np.asarray(anchor, dtype=np.float64)

        def value_only(d):
            return toy_value(self.game, d, g) - lam * float(np.sum((d - anchor) ** 2))

        def value_and_grad(d):
            grad = toy_grad_d(self.game, d, g) - 2.0 * lam * (d - anchor)
            return value_only(d), grad

        return value_and_grad, value_only

    def project_d(self, d):
        return self.game.clip_d(d)

    def project_g(self, g):
        return self.game.clip_g(g)


def _ops_for(state, splits, cfg, rng, eval_latent=None):
    if isinstance(state, GanState):
        return _GanOps(state, splits, cfg, rng, eval_latent)
    if isinstance(state, ToyGameState):
        return _ToyOps(state, cfg, rng)
    raise TypeError(f"cannot estimate gaps for {type(state).__name__}")


def _gan_prox_step_fns(state, anchor, theta_g, real, latent, lam, h):
    real = np.asarray(real, dtype=np.float64)
    latent = np.asarray(latent, dtype=np.float64)
    fake = forward(state.g_spec, theta_g, latent)
    anchor_grads = input_grad_batch(state.d_spec, anchor, real, h) if lam > 0 else None

    def value_and_grad(theta):
        check_clip_box(state.objective, theta)
        t = Tensor(theta.values, op="theta_d_tilde")
        d_real = forward_graph(state.d_spec, t, real)
        d_fake = forward_graph(state.d_spec, t, fake)
        total = objective_from_outputs(state.objective, d_real, d_fake)
        if lam > 0:
            total = total - lam * _sobolev_graph(state.d_spec, t, anchor_grads, real, h)
        total.backward()
        grad = t.grad if t.grad is not None else np.zeros_like(t.data)
        return total.item(), grad.copy()

    def value_only(theta):
        check_clip_box(state.objective, theta)
        d_real = forward_graph(state.d_spec, theta, real)
        d_fake = forward_graph(state.d_spec, theta, fake)
        total = objective_from_outputs(state.objective, d_real, d_fake)
        if lam > 0:
            t = Tensor(theta.values, op="theta_d_tilde")
            total = total - lam * _sobolev_graph(state.d_spec, t, anchor_grads, real, h)
        return total.item()

    return value_and_grad, value_only


def _prox_step_size(prox_lr: float, lam: float) -> float:
    if lam <= 0:
        return prox_lr
    return min(prox_lr, 1.0 / (STEP_GUARD * lam))


def _axpy(params, coef: float, vec: np.ndarray):
    if isinstance(params, ParamVector):
        return params.with_values(params.values + coef * vec)
    return params + coef * vec


def _prox_loop(step_fn, value_fn, anchor, project, cfg: ProximalConfig):
    theta = project(anchor)
    lr = _prox_step_size(cfg.prox_lr, cfg.lam)
    for j in range(cfg.prox_steps):
        try:
            _, grad = step_fn(theta)
        except NonFiniteError as err:
            raise ProxDivergenceError(
                f"penalized ascent diverged at inner step {j}") from err
        theta = project(_axpy(theta, lr, grad))
    return theta, value_fn(theta)


def _prox_ascend(ops, anchor, theta_g, batch, cfg: ProximalConfig):
    step_fn, value_fn = ops.make_prox_step(anchor, theta_g, batch, cfg.lam)
    return _prox_loop(step_fn, value_fn, anchor, ops.project_d, cfg)


def prox_opt(state: GanState, anchor_theta_d: ParamVector, current_theta_g: ParamVector,
             data_batch, latent_batch, cfg: ProximalConfig):
    """Penalized inner maximization: T ascent steps from the anchor.

    Maximizes V(theta, current_theta_g) - lam * sobolev_dist_sq(theta, anchor)
    over the discriminator copy; returns the final parameters and the
    penalized objective value there.  Weight-box objectives re-project after
    every step.
    """
    step_fn, value_fn = _gan_prox_step_fns(
        state, anchor_theta_d, current_theta_g,
        data_batch, latent_batch, cfg.lam, cfg.sobolev_h)
    return _prox_loop(step_fn, value_fn, anchor_theta_d,
                      _objective_projector(state.objective), cfg)


def _objective_projector(objective):
    if isinstance(objective, WassersteinClip):
        c = objective.clip
        return lambda pv: pv.with_values(np.clip(pv.values, -c, c))
    return lambda pv: pv


# -- the estimators ----------------------------------------------------------


def estimate_v_dw(state, splits, cfg: ProximalConfig, rng: Rng, eval_latent=None) -> float:
    """Worst-case discriminator value: ascend a copy of theta_d, evaluate held out.

    The search runs `worst_iters` Adam steps on minibatches of the search
    split; the returned value is V on the evaluation split with the fixed
    evaluation latent batch.
    """
    ops = _ops_for(state, splits, cfg, rng, eval_latent)
    d = ops.project_d(ops.d0)
    adam = adam_init(ops.d_dim, cfg.worst_lr)
    for _ in range(cfg.worst_iters):
        batch = ops.draw_batch()
        _, grad = ops.v_grad_d(d, ops.g0, batch)
        d, adam = adam_step(d, -grad, adam)  # ascent on V
        d = ops.project_d(d)
    return ops.eval_value(d, ops.g0)


def estimate_v_gw_lambda(state, splits, cfg: ProximalConfig, rng: Rng,
                         eval_latent=None) -> float:
    """Penalized worst-case generator value.

    Each iteration re-runs the penalized inner ascent anchored at the
    original theta_d against the current generator copy, then takes one
    descent step on V at the inner maximizer (the gradient of the penalized
    objective w.r.t. the generator).  The final value is the penalized
    objective on the evaluation split.
    """
    ops = _ops_for(state, splits, cfg, rng, eval_latent)
    g = ops.g0
    adam = adam_init(ops.g_dim, cfg.worst_lr)
    for _ in range(cfg.worst_iters):
        batch = ops.draw_batch()
        d_star, _ = _prox_ascend(ops, ops.d0, g, batch, cfg)
        _, grad_g = ops.v_grad_g(d_star, g, batch)
        g, adam = adam_step(g, grad_g, adam)  # descent on V
        g = ops.project_g(g)
    _, v_lambda = _prox_ascend(ops, ops.d0, g, ops.eval_batch(), cfg)
    return v_lambda


def estimate_v_gw_plain(state, splits, cfg: ProximalConfig, rng: Rng,
                        eval_latent=None) -> float:
    """Plain worst-case generator value: descend a copy of theta_g against the
    frozen discriminator, evaluate held out."""
    ops = _ops_for(state, splits, cfg, rng, eval_latent)
    g = ops.g0
    adam = adam_init(ops.g_dim, cfg.worst_lr)
    for _ in range(cfg.worst_iters):
        batch = ops.draw_batch()
        _, grad_g = ops.v_grad_g(ops.d0, g, batch)
        g, adam = adam_step(g, grad_g, adam)
        g = ops.project_g(g)
    return ops.eval_value(ops.d0, g)


def duality_gap(state, splits, cfg: ProximalConfig, rng: Rng) -> GapReport:
    """Both duality gaps at one configuration, sharing one evaluation latent batch."""
    eval_latent = None
    if isinstance(state, GanState):
        if splits is None:
            raise ValueError("GAN estimation requires data splits")
        eval_latent = rng.child(_EVAL_TAG).normal(
            (splits.s_c.shape[0], state.latent_dim))
    v_dw = estimate_v_dw(state, splits, cfg, rng.child(_DW_TAG), eval_latent)
    v_gw_lambda = estimate_v_gw_lambda(state, splits, cfg, rng.child(_GW_LAMBDA_TAG),
                                       eval_latent)
    v_gw_plain = estimate_v_gw_plain(state, splits, cfg, rng.child(_GW_PLAIN_TAG),
                                     eval_latent)
    return GapReport(
        v_dw=v_dw,
        v_gw_lambda=v_gw_lambda,
        dg_lambda=v_dw - v_gw_lambda,
        v_gw_plain=v_gw_plain,
        dg_plain=v_dw - v_gw_plain,
        lam=cfg.lam,
        worst_iters=cfg.worst_iters,
        prox_steps=cfg.prox_steps,
        seed=rng.seed,
    )


def lambda_sweep(state, splits, lambdas, cfg: ProximalConfig, rng: Rng):
    """Independent gap estimates per lambda with shared seeds, ordered by lambda."""
    lams = sorted(float(x) for x in lambdas)
    if not lams:
        raise ValueError("lambda list must be non-empty")
    out = []
    for lam in lams:
        report = duality_gap(state, splits, replace(cfg, lam=lam), Rng(rng.seed))
        out.append((lam, report))
    return out
