"""Optimizers over partitioned models: local SGD and coordinate/variance-reduced methods.

Six algorithms share a common interface: construct with
``build_optimizer(spec, profile, config)`` (or the concrete class), then call
``step()`` repeatedly; ``model`` exposes the current reported iterate and the
``comm_rounds`` / ``grad_w_calls`` / ``grad_beta_calls`` counters implement
the telemetry accounting (one sample gradient w.r.t. one block for one client
counts 1; full gradients count n; LSGD minibatches count B).

Algorithms:

* ``LSGD``   — local SGD: periodic w-averaging every ``tau`` steps, joint
  minibatch step on both blocks.
* ``ACD``    — accelerated block coordinate descent with full block
  gradients: (x, y, z) coupling, w-block sampled with probability ``p_w``.
* ``ASCD``   — accelerated stochastic coordinate descent: same block
  sampling with single-sample gradients, no control variates.
* ``SCD``    — plain stochastic coordinate descent (no momentum, no anchors).
* ``SVRCD``  — SCD plus SVRG-style control variates around an anchor ``v``
  refreshed with probability ``rho``.
* ``ASVRCD`` — acceleration and control variates combined.

Conventions adopted here (see also the per-family objective docs): all block
steps use gradients of F (the beta-block gradient carries the 1/M factor);
the w-branch of every coordinate method fires with probability ``p_w``; the
live-block variance-reduced estimator is ``g(x) - g(v) + grad F(v)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .model import PartitionedModel, SmoothnessProfile
from .objectives import ObjectiveSpec
from .rng import RngStream, substream_key

__all__ = [
    "StepSchedule",
    "OptimizerConfig",
    "lsgd_stepsize_bound",
    "acd_params",
    "asvrcd_params",
    "Lsgd",
    "Acd",
    "Ascd",
    "Scd",
    "Svrcd",
    "Asvrcd",
    "build_optimizer",
    "ALGORITHMS",
]


@dataclass
class StepSchedule:
    """Stepsize schedule: constant, or the PL decay ``1 / (mu (k + beta tau + 1))``."""

    kind: str = "constant"
    eta: float = 0.0
    mu: float = 0.0
    beta_offset: float = 0.0
    tau: int = 1

    def __post_init__(self):
        if self.kind not in ("constant", "pl_decay"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "constant" and self.eta <= 0:
            raise ValueError("constant schedule requires eta > 0")
        if self.kind == "pl_decay" and self.mu <= 0:
            raise ValueError("pl_decay schedule requires mu > 0")

    def at(self, k: int) -> float:
        if self.kind == "constant":
            return self.eta
        return 1.0 / (self.mu * (k + self.beta_offset * self.tau + 1))


@dataclass
class OptimizerConfig:
    """Algorithm tag plus all tunables; unused fields are ignored per algorithm."""

    algorithm: str
    eta: float | None = None
    schedule: StepSchedule | None = None
    tau: int = 1
    B: int = 1
    p_w: float | None = None
    rho: float | None = None
    theta: float | None = None
    theta1: float | None = None
    theta2: float | None = None
    gamma: float | None = None
    nu: float | None = None
    seed: int = 0
    shared_index: bool = True
    average_iterate: bool = False  # LSGD: report the weighted average iterate

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.tau < 1 or self.B < 1:
            raise ValueError("tau and B must be >= 1")
        if self.p_w is not None and not (0.0 <= self.p_w <= 1.0):
            raise ValueError("p_w must lie in [0, 1]")
        if self.rho is not None and not (0.0 < self.rho <= 1.0):
            raise ValueError("rho must lie in (0, 1]")


# --------------------------------------------------------------------------
# Closed-form parameter derivations
# --------------------------------------------------------------------------

def lsgd_stepsize_bound(profile: SmoothnessProfile, tau: int) -> float:
    """Admissible LSGD stepsize: min(1/(4 L^beta), 1/(8 sqrt(3e) (tau-1) L^w)).

    Degenerate terms (tau = 1, or a zero constant) are dropped; returns +inf
    when both degenerate (the caller must supply eta).
    """
    terms = []
    if profile.l_beta > 0:
        terms.append(1.0 / (4.0 * profile.l_beta))
    if tau > 1 and profile.l_w > 0:
        terms.append(1.0 / (8.0 * math.sqrt(3.0 * math.e) * (tau - 1) * profile.l_w))
    return min(terms) if terms else math.inf


def _require_mu(profile: SmoothnessProfile) -> float:
    if profile.mu <= 0:
        raise ValueError(
            "accelerated parameter derivations require mu > 0; supply a mu floor "
            "(the harness default is 1e-2) for weakly convex instances"
        )
    return profile.mu


def acd_params(profile: SmoothnessProfile) -> dict:
    """ACD parameters: p_w = sqrt(L^w)/(sqrt(L^w)+sqrt(L^beta)),
    nu = mu/(sqrt(L^w)+sqrt(L^beta))^2, theta = (sqrt(nu^2+4nu)-nu)/2, eta = 1/theta."""
    mu = _require_mu(profile)
    l_w, l_beta = profile.l_w, profile.l_beta
    if l_w + l_beta <= 0:
        raise ValueError("acd_params requires L^w + L^beta > 0")
    s = math.sqrt(l_w) + math.sqrt(l_beta)
    p_w = math.sqrt(l_w) / s
    nu = mu / s**2
    theta = (math.sqrt(nu**2 + 4 * nu) - nu) / 2
    return {"p_w": p_w, "nu": nu, "theta": theta, "eta": 1.0 / theta}


def asvrcd_params(profile: SmoothnessProfile, rho: float) -> dict:
    """ASVRCD parameters from the expected-smoothness constant.

    p_w = LL^w/(LL^w + LL^beta) (clamped away from {0, 1} when one constant
    vanishes), calL = 2 max(LL^w/p_w, LL^beta/p_beta), eta = 1/(4 calL),
    theta2 = 1/2, theta1 = min(1/2, sqrt(eta mu max(1/2, theta2/rho))),
    gamma = 1/max(2 mu, 4 theta1/eta), nu = 1 - gamma mu.
    """
    mu = _require_mu(profile)
    if not (0.0 < rho <= 1.0):
        raise ValueError("rho must lie in (0, 1]")
    ll_w, ll_beta = profile.ll_w, profile.ll_beta
    if ll_w + ll_beta <= 0:
        raise ValueError("asvrcd_params requires LL^w + LL^beta > 0")
    p_w = min(max(ll_w / (ll_w + ll_beta), 1e-6), 1 - 1e-6)
    cal_l = 2.0 * max(ll_w / p_w, ll_beta / (1.0 - p_w))
    eta = 1.0 / (4.0 * cal_l)
    theta2 = 0.5
    theta1 = min(0.5, math.sqrt(eta * mu * max(0.5, theta2 / rho)))
    gamma = 1.0 / max(2.0 * mu, 4.0 * theta1 / eta)
    nu = 1.0 - gamma * mu
    return {
        "p_w": p_w,
        "calL": cal_l,
        "eta": eta,
        "theta1": theta1,
        "theta2": theta2,
        "gamma": gamma,
        "nu": nu,
    }


# --------------------------------------------------------------------------
# Common machinery
# --------------------------------------------------------------------------


class _OptimizerBase:
    def __init__(self, spec: ObjectiveSpec, profile: SmoothnessProfile | None,
                 config: OptimizerConfig, init: PartitionedModel | None = None):
        self.spec = spec
        self.profile = profile
        self.config = config
        if init is None:
            init = spec.zero_model()
        self._w0, self._b0 = spec.check_model(init)
        self._w0 = self._w0.copy()
        self._b0 = self._b0.copy()
        self.stream = RngStream(config.seed, "opt")
        self.k = 0
        self.comm_rounds = 0
        self.grad_w_calls = 0
        self.grad_beta_calls = 0

    @property
    def M(self) -> int:
        return self.spec.M

    @property
    def n(self) -> int:
        return self.spec.n

    def _draw_index(self):
        """Sample index for one iteration: shared int or per-client (M,) array."""
        if self.config.shared_index:
            return self.stream.randint(self.n)
        return self.stream.randint(self.n, size=self.M)

    def step(self) -> None:
        raise NotImplementedError

    @property
    def model(self) -> PartitionedModel:
        raise NotImplementedError


def _as_model(w: np.ndarray, b_stack: np.ndarray) -> PartitionedModel:
    return PartitionedModel.from_stack(w, b_stack)


# --------------------------------------------------------------------------
# Local SGD
# --------------------------------------------------------------------------


class Lsgd(_OptimizerBase):
    """Local SGD: clients keep w-replicas, averaged every ``tau`` iterations.

    Each iteration every client draws a size-B minibatch from its own
    substream ``(seed, m, k)`` and takes a joint step on (w_m, beta_m) with
    the minibatch gradient of its f_m.
    """

    def __init__(self, spec, profile, config, init=None):
        super().__init__(spec, profile, config, init)
        if config.schedule is not None:
            self.schedule = config.schedule
        elif config.eta is not None:
            self.schedule = StepSchedule("constant", eta=config.eta)
        else:
            raise ValueError("LSGD requires eta or a schedule")
        if config.B > self.n:
            raise ValueError(f"minibatch size B={config.B} exceeds n={self.n}")
        self.W = np.tile(self._w0, (self.M, 1))  # per-client replicas
        self.B_stack = self._b0.copy()
        self._avg_weight_total = 0.0
        self._avg_W = np.zeros_like(self.W)
        self._avg_B = np.zeros_like(self.B_stack)
        # Reusable Philox for the per-(client, step) minibatch substreams:
        # rekeying one generator is ~3x cheaper than constructing a fresh
        # RngStream and draws the identical words.
        self._batch_bitgen = np.random.Philox(key=np.zeros(2, dtype=np.uint64))

    def _draw_batch(self, k: int) -> np.ndarray:
        """The (M, B) minibatch indices of RngStream(seed, m, k) for each m."""
        cfg = self.config
        bitgen = self._batch_bitgen
        batch = np.empty((self.M, cfg.B), dtype=np.int64)
        for m in range(self.M):
            state = bitgen.state
            state["state"]["counter"][:] = 0
            state["state"]["key"][:] = substream_key(cfg.seed, m, k)
            state["buffer_pos"] = 4
            state["has_uint32"] = 0
            bitgen.state = state
            raw = bitgen.random_raw(cfg.B)
            u = (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53
            batch[m] = np.minimum((u * self.n).astype(np.int64), self.n - 1)
        return batch

    def _sync(self) -> None:
        if self.spec.d0:
            self.W[:] = self.W.mean(axis=0)
        self.comm_rounds += 1

    def step(self) -> None:
        cfg = self.config
        k = self.k
        if k % cfg.tau == 0:
            self._sync()
        batch = self._draw_batch(k)  # (M, B)
        gw = np.zeros_like(self.W)
        gb = np.zeros_like(self.B_stack)
        for b in range(cfg.B):
            j = batch[:, b]
            gw += self.spec.grad_w_clients(self.W, self.B_stack, j)
            gb += self.spec.grad_b_clients(self.W, self.B_stack, j)
        gw /= cfg.B
        gb /= cfg.B
        eta = self.schedule.at(k)
        self.W = self.W - eta * gw
        self.B_stack = self.B_stack - eta * gb
        if self.spec.d0:
            self.grad_w_calls += self.M * cfg.B
        if self.spec.dm:
            self.grad_beta_calls += self.M * cfg.B
        if cfg.average_iterate and self.profile is not None:
            weight = (1.0 - eta * self.profile.mu) ** (-(k + 1))
            self._avg_weight_total += weight
            self._avg_W += weight * self.W
            self._avg_B += weight * self.B_stack
        self.k += 1

    @property
    def model(self) -> PartitionedModel:
        if self.config.average_iterate and self._avg_weight_total > 0:
            return _as_model(
                self._avg_W.mean(axis=0) / self._avg_weight_total,
                self._avg_B / self._avg_weight_total,
            )
        return _as_model(self.W.mean(axis=0) if self.spec.d0 else np.zeros(0), self.B_stack)


# --------------------------------------------------------------------------
# ACD: accelerated coordinate descent with full block gradients
# --------------------------------------------------------------------------


class Acd(_OptimizerBase):
    """Accelerated block coordinate descent (full gradients, (x, y, z) coupling)."""

    def __init__(self, spec, profile, config, init=None):
        super().__init__(spec, profile, config, init)
        params = acd_params(profile) if None in (config.p_w, config.nu, config.theta,
                                                 config.eta) else {}
        self.p_w = config.p_w if config.p_w is not None else params["p_w"]
        self.nu = config.nu if config.nu is not None else params["nu"]
        self.theta = config.theta if config.theta is not None else params["theta"]
        self.eta = config.eta if config.eta is not None else params["eta"]
        if spec.d0 == 0:
            self.p_w = 0.0
        if spec.dm == 0:
            self.p_w = 1.0
        self.y_w, self.z_w = self._w0.copy(), self._w0.copy()
        self.y_b, self.z_b = self._b0.copy(), self._b0.copy()
        self.w_branch_events = 0

    def step(self) -> None:
        th, nu, eta = self.theta, self.nu, self.eta
        l_w, l_beta = self.profile.l_w, self.profile.l_beta
        s = math.sqrt(l_w) + math.sqrt(l_beta)
        x_w = (1 - th) * self.y_w + th * self.z_w
        x_b = (1 - th) * self.y_b + th * self.z_b
        damp = 1.0 + eta * nu
        if self.stream.coin(self.p_w):
            gw = self.spec.grad_w_clients(x_w, x_b).mean(axis=0)
            self.y_w = x_w - gw / l_w
            self.z_w = (self.z_w + eta * nu * x_w - (eta / (math.sqrt(l_w) * s)) * gw) / damp
            self.z_b = (self.z_b + eta * nu * x_b) / damp
            self.w_branch_events += 1
            self.comm_rounds += 1
            self.grad_w_calls += self.M * self.n
        else:
            gb = self.spec.grad_b_clients(x_w, x_b) / self.M  # beta-block gradient of F
            self.y_b = x_b - gb / l_beta
            self.z_b = (self.z_b + eta * nu * x_b - (eta / (math.sqrt(l_beta) * s)) * gb) / damp
            self.z_w = (self.z_w + eta * nu * x_w) / damp
            self.grad_beta_calls += self.M * self.n
        self.k += 1

    @property
    def model(self) -> PartitionedModel:
        return _as_model(self.y_w, self.y_b)


# --------------------------------------------------------------------------
# Variance-reduced / stochastic coordinate methods
# --------------------------------------------------------------------------


class _AnchoredMixin:
    """Anchor-point bookkeeping shared by SVRCD and ASVRCD."""

    def _set_anchor(self, w: np.ndarray, b_stack: np.ndarray) -> None:
        spec = self.spec
        self.v_w, self.v_b = w.copy(), b_stack.copy()
        self.anchor_gw = (
            spec.grad_w_clients(self.v_w, self.v_b).mean(axis=0) if spec.d0 else np.zeros(0)
        )
        self.anchor_gb = spec.grad_b_clients(self.v_w, self.v_b)
        self.anchor_gb_mean = self.anchor_gb / spec.M  # beta-block gradient of F
        # Per-sample gradient caches at the anchor, (n, M, d) each.
        self._cache_gw = np.empty((spec.n, spec.M, spec.d0))
        self._cache_gb = np.empty((spec.n, spec.M, spec.dm))
        for j in range(spec.n):
            self._cache_gw[j] = spec.grad_w_clients(self.v_w, self.v_b, j)
            self._cache_gb[j] = spec.grad_b_clients(self.v_w, self.v_b, j)

    def _anchor_sample(self, cache: np.ndarray, j) -> np.ndarray:
        if isinstance(j, (int, np.integer)) or np.ndim(j) == 0:
            return cache[int(j)]
        return cache[np.asarray(j), np.arange(self.M)]

    def _refresh_cost(self) -> None:
        if self.spec.d0:
            self.grad_w_calls += self.M * self.n
        if self.spec.dm:
            self.grad_beta_calls += self.M * self.n
        self.comm_rounds += 1


def _resolve_pw(spec: ObjectiveSpec, config: OptimizerConfig,
                profile: SmoothnessProfile, rho: float | None) -> float:
    if config.p_w is not None:
        p_w = config.p_w
    else:
        p_w = asvrcd_params(profile, rho if rho is not None else 0.5)["p_w"]
    if spec.d0 == 0:
        p_w = 0.0
    if spec.dm == 0:
        p_w = 1.0
    return p_w


class Scd(_OptimizerBase):
    """Plain stochastic coordinate descent: one block per iteration, scaled 1/p."""

    def __init__(self, spec, profile, config, init=None):
        super().__init__(spec, profile, config, init)
        if config.eta is None:
            raise ValueError("SCD requires an explicit eta")
        self.eta = config.eta
        self.p_w = _resolve_pw(spec, config, profile, config.rho)
        self.w = self._w0.copy()
        self.b = self._b0.copy()

    def gradient_estimate(self, w, b_stack, j, zeta: bool):
        """The (g_w, g_beta) estimator at (w, b_stack); unbiased for grad F."""
        spec = self.spec
        if zeta:
            gw = spec.grad_w_clients(w, b_stack, j).mean(axis=0) / self.p_w
            gb = np.zeros((spec.M, spec.dm))
        else:
            gw = np.zeros(spec.d0)
            gb = spec.grad_b_clients(w, b_stack, j) / ((1.0 - self.p_w) * spec.M)
        return gw, gb

    def step(self) -> None:
        j = self._draw_index()
        zeta = self.stream.coin(self.p_w)
        gw, gb = self.gradient_estimate(self.w, self.b, j, zeta)
        if zeta:
            self.w = self.w - self.eta * gw
            self.comm_rounds += 1
            self.grad_w_calls += self.M
        else:
            self.b = self.b - self.eta * gb
            self.grad_beta_calls += self.M
        self.k += 1

    @property
    def model(self) -> PartitionedModel:
        return _as_model(self.w, self.b)


class Svrcd(_OptimizerBase, _AnchoredMixin):
    """SCD with SVRG control variates around an anchor refreshed w.p. rho."""

    def __init__(self, spec, profile, config, init=None):
        super().__init__(spec, profile, config, init)
        if config.eta is None or config.rho is None:
            raise ValueError("SVRCD requires eta and rho")
        self.eta = config.eta
        self.rho = config.rho
        self.p_w = _resolve_pw(spec, config, profile, config.rho)
        self.w = self._w0.copy()
        self.b = self._b0.copy()
        self._set_anchor(self.w, self.b)

    def gradient_estimate(self, w, b_stack, j, zeta: bool):
        spec = self.spec
        if zeta:
            live = spec.grad_w_clients(w, b_stack, j)
            anchored = self._anchor_sample(self._cache_gw, j)
            gw = (live - anchored).mean(axis=0) / self.p_w + self.anchor_gw
            gb = self.anchor_gb_mean
        else:
            gw = self.anchor_gw
            live = spec.grad_b_clients(w, b_stack, j)
            anchored = self._anchor_sample(self._cache_gb, j)
            gb = (live - anchored) / ((1.0 - self.p_w) * spec.M) + self.anchor_gb_mean
        return gw, gb

    def step(self) -> None:
        j = self._draw_index()
        zeta = self.stream.coin(self.p_w)
        refresh = self.stream.coin(self.rho)
        w_old, b_old = self.w, self.b
        gw, gb = self.gradient_estimate(self.w, self.b, j, zeta)
        if zeta:
            self.w = self.w - self.eta * gw
            self.comm_rounds += 1
            self.grad_w_calls += self.M
        else:
            self.b = self.b - self.eta * gb
            self.grad_beta_calls += self.M
        if refresh:
            self._set_anchor(w_old, b_old)
            self._refresh_cost()
        self.k += 1

    @property
    def model(self) -> PartitionedModel:
        return _as_model(self.w, self.b)


class Ascd(_OptimizerBase):
    """Accelerated stochastic coordinate descent: (y, z) coupling, no anchors.

    Only the live block's (y, z) pair moves in an iteration; the dead block
    is left untouched.
    """

    def __init__(self, spec, profile, config, init=None):
        super().__init__(spec, profile, config, init)
        derived = {}
        if None in (config.eta, config.gamma, config.nu) or config.p_w is None:
            derived = asvrcd_params(profile, config.rho if config.rho is not None else 0.5)
        self.eta = config.eta if config.eta is not None else derived["eta"]
        self.gamma = config.gamma if config.gamma is not None else derived["gamma"]
        self.nu = config.nu if config.nu is not None else derived["nu"]
        self.theta = config.theta if config.theta is not None else min(0.8, 1.0 / self.eta)
        self.p_w = _resolve_pw(spec, config, profile, config.rho)
        self.y_w, self.z_w = self._w0.copy(), self._w0.copy()
        self.y_b, self.z_b = self._b0.copy(), self._b0.copy()
        # Regrouped z-update coefficients (see Asvrcd.step).
        self._coef = self.gamma / self.eta
        self._x_coef = 1.0 - self.nu - self._coef

    def gradient_estimate(self, w, b_stack, j, zeta: bool):
        spec = self.spec
        if zeta:
            gw = spec.grad_w_clients(w, b_stack, j).mean(axis=0) / self.p_w
            gb = np.zeros((spec.M, spec.dm))
        else:
            gw = np.zeros(spec.d0)
            gb = spec.grad_b_clients(w, b_stack, j) / ((1.0 - self.p_w) * spec.M)
        return gw, gb

    def step(self) -> None:
        th = self.theta
        x_w = th * self.z_w + (1 - th) * self.y_w
        x_b = th * self.z_b + (1 - th) * self.y_b
        j = self._draw_index()
        zeta = self.stream.coin(self.p_w)
        gw, gb = self.gradient_estimate(x_w, x_b, j, zeta)
        coef, x_coef = self._coef, self._x_coef
        if zeta:
            new_y_w = x_w - self.eta * gw
            self.z_w = self.nu * self.z_w + x_coef * x_w + coef * new_y_w
            self.y_w = new_y_w
            self.comm_rounds += 1
            self.grad_w_calls += self.M
        else:
            new_y_b = x_b - self.eta * gb
            self.z_b = self.nu * self.z_b + x_coef * x_b + coef * new_y_b
            self.y_b = new_y_b
            self.grad_beta_calls += self.M
        self.k += 1

    @property
    def model(self) -> PartitionedModel:
        return _as_model(self.y_w, self.y_b)


class Asvrcd(_OptimizerBase, _AnchoredMixin):
    """Accelerated SVRCD: (y, z, v) triples per block with anchored estimators."""

    def __init__(self, spec, profile, config, init=None):
        super().__init__(spec, profile, config, init)
        if config.rho is None:
            raise ValueError("ASVRCD requires rho (e.g. p_w/n)")
        self.rho = config.rho
        needed = (config.eta, config.theta1, config.theta2, config.gamma, config.nu)
        derived = asvrcd_params(profile, config.rho) if None in needed else {}
        self.eta = config.eta if config.eta is not None else derived["eta"]
        self.theta1 = config.theta1 if config.theta1 is not None else derived["theta1"]
        self.theta2 = config.theta2 if config.theta2 is not None else derived["theta2"]
        self.gamma = config.gamma if config.gamma is not None else derived["gamma"]
        self.nu = config.nu if config.nu is not None else derived["nu"]
        self.p_w = _resolve_pw(spec, config, profile, config.rho)
        self.y_w, self.z_w = self._w0.copy(), self._w0.copy()
        self.y_b, self.z_b = self._b0.copy(), self._b0.copy()
        # z-update z <- nu z + (1-nu) x + (gamma/eta)(y_new - x), regrouped as
        # nu z + (1 - nu - gamma/eta) x + (gamma/eta) y_new.
        self._coef = self.gamma / self.eta
        self._x_coef = 1.0 - self.nu - self._coef
        self._ty = 1.0 - self.theta1 - self.theta2
        self._set_anchor(self._w0, self._b0)

    def gradient_estimate(self, w, b_stack, j, zeta: bool):
        spec = self.spec
        if zeta:
            live = spec.grad_w_clients(w, b_stack, j)
            anchored = self._anchor_sample(self._cache_gw, j)
            gw = (live - anchored).mean(axis=0) / self.p_w + self.anchor_gw
            gb = self.anchor_gb_mean
        else:
            gw = self.anchor_gw
            live = spec.grad_b_clients(w, b_stack, j)
            anchored = self._anchor_sample(self._cache_gb, j)
            gb = (live - anchored) / ((1.0 - self.p_w) * spec.M) + self.anchor_gb_mean
        return gw, gb

    def step(self) -> None:
        t1, t2, ty = self.theta1, self.theta2, self._ty
        x_w = t1 * self.z_w + t2 * self.v_w + ty * self.y_w
        x_b = t1 * self.z_b + t2 * self.v_b + ty * self.y_b
        j = self._draw_index()
        zeta = self.stream.coin(self.p_w)
        refresh = self.stream.coin(self.rho)
        gw, gb = self.gradient_estimate(x_w, x_b, j, zeta)
        y_w_old, y_b_old = self.y_w, self.y_b
        self.y_w = x_w - self.eta * gw
        self.y_b = x_b - self.eta * gb
        coef, x_coef = self._coef, self._x_coef
        self.z_w = self.nu * self.z_w + x_coef * x_w + coef * self.y_w
        self.z_b = self.nu * self.z_b + x_coef * x_b + coef * self.y_b
        if zeta:
            self.comm_rounds += 1
            self.grad_w_calls += self.M
        else:
            self.grad_beta_calls += self.M
        if refresh:
            self._set_anchor(y_w_old, y_b_old)
            self._refresh_cost()
        self.k += 1

    @property
    def model(self) -> PartitionedModel:
        return _as_model(self.y_w, self.y_b)


ALGORITHMS = {
    "LSGD": Lsgd,
    "ACD": Acd,
    "ASCD": Ascd,
    "SCD": Scd,
    "SVRCD": Svrcd,
    "ASVRCD": Asvrcd,
}


def build_optimizer(spec: ObjectiveSpec, profile: SmoothnessProfile | None,
                    config: OptimizerConfig, init: PartitionedModel | None = None):
    """Construct the optimizer named by ``config.algorithm``."""
    return ALGORITHMS[config.algorithm](spec, profile, config, init)
