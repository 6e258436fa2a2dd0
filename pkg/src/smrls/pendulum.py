"""Inverted pendulum-cart benchmark: target function, trajectories and run loop."""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from smrls.errors import DowndateSingular
from smrls.estimators import RlsTrainer, SgdTrainer
from smrls.input_space import Normalizer
from smrls.rbf import build_grid_network, evaluate_many
from smrls.selective import SmrlsTrainer

TRAJECTORY_KINDS = ("repetitive_perturbed", "spiral", "random_nurbs_like", "ergodic_eval")
TRAINERS = ("sgd", "rls", "ffrls", "smrls")


@dataclass(frozen=True)
class PendulumParams:
    g: float = 9.8
    m_c: float = 0.1
    m: float = 0.02
    l: float = 0.2

    def __post_init__(self):
        for name in ("g", "m_c", "m", "l"):
            if not getattr(self, name) > 0:
                raise ValueError(f"pendulum parameter {name} must be positive")


def pendulum_f(x, p, l=None):
    """Unforced angular acceleration of the pendulum.

    ``x`` is ``(x1, x2)`` or an (K, 2) array; ``l`` overrides ``p.l`` and may
    be an array broadcast against the states.
    """
    x = np.asarray(x, dtype=float)
    l = p.l if l is None else np.asarray(l, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    total = p.m_c + p.m
    s, c = np.sin(x1), np.cos(x1)
    num = p.g * s - p.m * l * x2**2 * c * s / total
    den = l * (4.0 / 3.0 - p.m * c**2 / total)
    out = num / den
    return float(out) if np.ndim(out) == 0 else out


def trajectory_case_a(t, l_before=0.2, l_after=0.3, switch_time=50.0):
    """Circle ``x1 = sin t`` with its derivative, and the active half-length."""
    t = np.asarray(t, dtype=float)
    state = np.stack([np.sin(t), np.cos(t)], axis=-1)
    l = np.where(t < switch_time, l_before, l_after)
    return state, l


def trajectory_case_b(t):
    """Growing spiral ``x1 = (20 + t) sin t / 120`` with its derivative."""
    t = np.asarray(t, dtype=float)
    x1 = (20.0 + t) * np.sin(t) / 120.0
    x2 = (np.sin(t) + (20.0 + t) * np.cos(t)) / 120.0
    return np.stack([x1, x2], axis=-1)


class RandomSplineTrajectory:
    """Seeded smooth closed curve in the (x1, x2) plane with uneven speed.

    Control points sit at sorted random angles with random radii around the
    origin. A periodic cubic spline passes through them with random
    (non-uniform) parameter spacing, so equal time steps cover some arcs
    densely and others sparsely. One loop takes ``loop_period`` seconds. The
    curve is shrunk if needed so that it stays inside ``[-bound, bound]^2``.
    """

    def __init__(self, seed, n_control=16, loop_period=300.0, bound=0.98):
        rng = np.random.default_rng(seed)
        gaps = rng.uniform(0.5, 1.5, n_control)
        angles = np.cumsum(gaps / gaps.sum() * 2.0 * np.pi)
        angles = angles - angles[0] + rng.uniform(0.0, 2.0 * np.pi)
        radii = rng.uniform(0.5, 1.2, n_control)
        pts = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)
        spacing = rng.dirichlet(np.full(n_control, 2.0))
        knots = np.concatenate([[0.0], np.cumsum(spacing)])
        knots[-1] = 1.0
        closed = np.vstack([pts, pts[:1]])
        spline = CubicSpline(knots, closed, bc_type="periodic")
        dense = spline(np.linspace(0.0, 1.0, 4001))
        peak = np.abs(dense).max()
        self.scale = min(1.0, bound / peak)
        self.control_points = pts * self.scale
        self.knots = knots
        self.loop_period = float(loop_period)
        self.seed = seed
        self._spline = CubicSpline(knots, np.vstack([self.control_points, self.control_points[:1]]),
                                   bc_type="periodic")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        s = np.mod(t / self.loop_period, 1.0)
        return self._spline(s)


def trajectory_case_c(seed, t, **kwargs):
    return RandomSplineTrajectory(seed, **kwargs)(t)


@dataclass
class TrajectorySpec:
    kind: str
    duration: float
    period: float = 0.01
    l_before: float = 0.2
    l_after: float = 0.3
    switch_time: float = math.inf
    seed: int = 0
    n_control: int = 16
    loop_period: float = 300.0

    def __post_init__(self):
        if self.kind not in TRAJECTORY_KINDS:
            raise ValueError(f"unknown trajectory kind {self.kind!r}")
        if not self.duration > 0 or not self.period > 0:
            raise ValueError("duration and period must be positive")
        steps = self.duration / self.period
        if abs(steps - round(steps)) > 1e-6:
            raise ValueError("period must divide duration")

    @property
    def n_steps(self):
        return int(round(self.duration / self.period))

    def times(self):
        return np.arange(1, self.n_steps + 1) * self.period

    def curve(self):
        if self.kind == "random_nurbs_like":
            return RandomSplineTrajectory(self.seed, self.n_control, self.loop_period)
        return None

    def sample(self, times=None):
        """States and active half-length at ``times`` (the training grid by default)."""
        t = self.times() if times is None else np.asarray(times, dtype=float)
        l = np.where(t < self.switch_time, self.l_before, self.l_after)
        if self.kind == "repetitive_perturbed":
            states, _ = trajectory_case_a(t)
        elif self.kind in ("spiral", "ergodic_eval"):
            states = trajectory_case_b(t)
        else:
            states = self.curve()(t)
        return states, l


def ergodic_path(period=0.01, duration=100.0):
    """States along the spiral used to probe generalization over the whole square."""
    t = np.arange(1, int(round(duration / period)) + 1) * period
    return t, trajectory_case_b(t)


def evaluate_learned(weights, net, normalizer, states, targets):
    """Approximation error ``f(x) - W^T Phi(xbar)`` along ``states`` and its RMS."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape[0] != net.n_neurons:
        raise ValueError("weight snapshot does not match the network")
    pred = evaluate_many(net, normalizer.normalize(states), weights)
    err = np.asarray(targets, dtype=float) - pred
    return err, rms(err)


def rms(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return float("nan")
    return float(np.sqrt(np.mean(values**2)))


def segment_rms(errors, n_segments):
    return [rms(seg) for seg in np.array_split(np.asarray(errors), n_segments)]


class TrainerError(RuntimeError):
    def __init__(self, step, cause):
        self.step = step
        self.cause = cause
        super().__init__(f"trainer failed at row {step}: {cause}")


@dataclass
class RunRecord:
    trainer: str
    times: np.ndarray
    states: np.ndarray
    norm_states: np.ndarray
    y: np.ndarray
    yhat: np.ndarray
    partitions: np.ndarray = None
    snapshots: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    control_points: np.ndarray = None
    final_weights: np.ndarray = None

    @property
    def err(self):
        return self.y - self.yhat

    def window(self, start, stop):
        return (self.times >= start - 1e-9) & (self.times <= stop + 1e-9)


def make_trainer(cfg, net):
    if cfg.trainer == "sgd":
        return SgdTrainer(net, eta=cfg.eta, w0=cfg.w0)
    if cfg.trainer == "rls":
        return RlsTrainer(net, lam=1.0, p0_scale=cfg.p0_scale, w0=cfg.w0)
    if cfg.trainer == "ffrls":
        return RlsTrainer(net, lam=cfg.lam, p0_scale=cfg.p0_scale, w0=cfg.w0)
    if cfg.trainer == "smrls":
        return SmrlsTrainer(net, cfg.partitions_per_dim, cfg.p0_scale, cfg.w0, guard=cfg.guard)
    raise ValueError(f"unknown trainer {cfg.trainer!r}")


def _tag(a, b):
    return f"{a:g}_{b:g}"


def run_experiment(cfg):
    """Run one real-time training session described by an ``ExperimentConfig``."""
    spec = cfg.trajectory_spec()
    plant = PendulumParams(cfg.g, cfg.m_c, cfg.m, cfg.l)
    net = build_grid_network(cfg.neurons_per_dim, cfg.dimension, cfg.width)
    normalizer = Normalizer(cfg.lower_bounds, cfg.upper_bounds)
    trainer = make_trainer(cfg, net)

    times = spec.times()
    states, l_active = spec.sample(times)
    y = pendulum_f(states, plant, l_active)
    xbar = np.ascontiguousarray(normalizer.normalize(states))

    K = times.shape[0]
    snap_steps = sorted({int(round(s / spec.period)): s for s in cfg.snapshots}.items())
    yhat = np.empty(K)
    parts = np.empty(K, dtype=np.int64) if cfg.trainer == "smrls" else None
    snapshots = {}
    start = 0
    for stop, t_snap in snap_steps + [(K, None)]:
        if stop > start:
            try:
                yh, pa = trainer.run(xbar[start:stop], y[start:stop])
            except DowndateSingular as exc:
                raise TrainerError(start + (exc.step or 0), exc) from exc
            yhat[start:stop] = yh
            if parts is not None:
                parts[start:stop] = pa
            start = stop
        if t_snap is not None:
            snapshots[t_snap] = net.weights.copy()

    rec = RunRecord(
        trainer=cfg.trainer, times=times, states=states, norm_states=xbar, y=y,
        yhat=yhat, partitions=parts, snapshots=snapshots,
        final_weights=net.weights.copy(),
    )
    curve = spec.curve()
    if curve is not None:
        rec.control_points = curve.control_points
    rec.summary = summarize(rec, cfg, net, normalizer, plant, spec, trainer)
    return rec


def summarize(rec, cfg, net, normalizer, plant, spec, trainer):
    out = {}
    err = rec.err
    out["tracking_rms"] = rms(err)
    for a, b in cfg.windows:
        out[f"tracking_rms_{_tag(a, b)}"] = rms(err[rec.window(a, b)])

    # learned knowledge is checked against the plant as it stands at the end
    l_final = spec.l_after if spec.duration >= spec.switch_time else spec.l_before
    w = rec.final_weights
    lk_err, out["lk_rms_train"] = evaluate_learned(
        w, net, normalizer, rec.states, pendulum_f(rec.states, plant, l_final))
    for a, b in cfg.lk_windows:
        out[f"lk_rms_train_{_tag(a, b)}"] = rms(lk_err[rec.window(a, b)])
    if cfg.ergodic_eval:
        _, path = ergodic_path(spec.period)
        e_err, out["lk_rms_ergodic"] = evaluate_learned(
            w, net, normalizer, path, pendulum_f(path, plant, l_final))
        seg = segment_rms(e_err, cfg.segments)
        out["lk_spread_ergodic"] = max(seg) / min(seg)
    times = sorted(rec.snapshots)
    for t1, t2 in zip(times, times[1:]):
        out[f"wchange_{_tag(t1, t2)}"] = float(np.linalg.norm(rec.snapshots[t2] - rec.snapshots[t1]))
    if cfg.trainer == "smrls":
        out["visited_partitions"] = float(trainer.state.store.visited_count)
    return out
