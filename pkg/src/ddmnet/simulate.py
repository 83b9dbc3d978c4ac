"""Monte Carlo integration of the networked drift-diffusion dynamics.

Euler-Maruyama with additive noise:

    x <- x + (beta * 1 - L x) h + sigma sqrt(h) xi,   x(0) = 0,

one independent counter-based random stream per trajectory (key = base
seed XOR trajectory index), so serial and parallel runs, and runs split
across any number of workers, produce bit-identical moment sums. Moments
are accumulated streaming (one pass, O(n^2) memory independent of the
trajectory count) in a fixed chunk order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .certainty import ModelParams
from .errors import UnstableStepError
from .graph import WeightedDigraph, laplacian

# fixed constants of the deterministic-merge contract: results must not
# depend on the worker count, so chunk and panel sizes never vary
CHUNK_TRAJECTORIES = 1024
PANEL_STEPS = 1000

_GRID_RTOL = 1e-9


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run configuration; sample_times must lie on the step grid.

    An empty sample-time list is a valid degenerate configuration (nothing
    simulated, nothing recorded): reports come out header-only.
    """

    params: ModelParams
    t_max: float
    step: float
    trajectories: int
    seed: int
    sample_times: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.step > 0:
            raise ValueError(f"step must be > 0, got {self.step}")
        if self.trajectories < 2:
            raise ValueError(f"need at least 2 trajectories, got {self.trajectories}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        if self.sample_times and self.t_max < max(self.sample_times) - _GRID_RTOL:
            raise ValueError("t_max must cover every sample time")
        indices = [self.step_index(t) for t in self.sample_times]
        if len(set(indices)) != len(indices):
            raise ValueError(f"duplicate sample times: {self.sample_times}")

    def step_index(self, t: float) -> int:
        """Grid index of a sample time; raises if t is not on the step grid."""
        idx = round(t / self.step)
        if abs(idx * self.step - t) > _GRID_RTOL * max(1.0, abs(t)):
            raise ValueError(f"sample time {t} is not on the step grid (h = {self.step})")
        return idx

    @property
    def total_steps(self) -> int:
        return self.step_index(max(self.sample_times)) if self.sample_times else 0


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Streaming moment sums per sample time: sum of states and of outer products."""

    n: int
    config: SimConfig
    sums: np.ndarray  # shape (num_sample_times, n)
    outers: np.ndarray  # shape (num_sample_times, n, n)

    @property
    def trajectories(self) -> int:
        return self.config.trajectories


@dataclass(frozen=True, eq=False)
class MomentReport:
    """Empirical mean/covariance at one sample time with standard errors."""

    t: float
    trajectories: int
    mean: np.ndarray
    covariance: np.ndarray
    se_mean: np.ndarray
    se_covariance: np.ndarray


@dataclass(frozen=True, eq=False)
class MomentValidation:
    """Outcome of comparing a MomentReport against analytic targets."""

    passed: bool
    z_covariance: np.ndarray
    z_mean: np.ndarray | None
    failures: tuple[str, ...]
    warnings: tuple[str, ...]


def _simulate_chunk(lap: np.ndarray, cfg: SimConfig, lo: int, hi: int,
                    sample_steps: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    """Moment sums over trajectories [lo, hi); pure function of its arguments."""
    n = lap.shape[0]
    batch = hi - lo
    h = cfg.step
    drift = cfg.params.beta * h
    noise_scale = cfg.params.sigma * math.sqrt(h)
    step_matrix_t = (np.eye(n) - h * lap).T
    sample_lookup = {s: i for i, s in enumerate(sample_steps)}

    gens = [np.random.Generator(np.random.Philox(key=cfg.seed ^ i)) for i in range(lo, hi)]
    sums = np.zeros((len(sample_steps), n))
    outers = np.zeros((len(sample_steps), n, n))
    x = np.zeros((batch, n))
    y = np.empty((batch, n))
    noise = np.empty((batch, PANEL_STEPS, n))
    total = cfg.total_steps
    if 0 in sample_lookup:  # t = 0 is a valid grid point
        idx = sample_lookup[0]
        outers[idx] += x.T @ x  # zeros; mean/cov at t=0 are exactly zero
    done = 0
    while done < total:
        span = min(PANEL_STEPS, total - done)
        for b, gen in enumerate(gens):
            noise[b, :span] = gen.standard_normal((span, n))
        panel = noise[:, :span]
        panel *= noise_scale
        for s in range(span):
            np.matmul(x, step_matrix_t, out=y)
            y += drift
            y += panel[:, s]
            x, y = y, x
            idx = sample_lookup.get(done + s + 1)
            if idx is not None:
                sums[idx] += x.sum(axis=0)
                outers[idx] += x.T @ x
        done += span
    return sums, outers


def simulate_ensemble(g: WeightedDigraph, cfg: SimConfig, workers: int = 1) -> Ensemble:
    """Simulate the ensemble and accumulate moment sums at the sample times.

    Deterministic for a given (graph, config) regardless of `workers`:
    trajectories are chunked by a fixed size, each chunk's sums are computed
    from per-trajectory streams, and chunks are merged in index order.
    """
    lap = laplacian(g)
    norm_inf = float(np.abs(lap).sum(axis=1).max())
    if norm_inf > 0 and cfg.step > 0.1 / norm_inf:
        raise UnstableStepError(
            f"step {cfg.step} exceeds the stability guard 0.1 / ||L||_inf = {0.1 / norm_inf:.3g}"
        )
    sample_steps = tuple(cfg.step_index(t) for t in cfg.sample_times)
    bounds = [(lo, min(lo + CHUNK_TRAJECTORIES, cfg.trajectories))
              for lo in range(0, cfg.trajectories, CHUNK_TRAJECTORIES)]
    sums = np.zeros((len(sample_steps), g.n))
    outers = np.zeros((len(sample_steps), g.n, g.n))
    if workers <= 1 or len(bounds) == 1:
        results = (_simulate_chunk(lap, cfg, lo, hi, sample_steps) for lo, hi in bounds)
        for s, o in results:
            sums += s
            outers += o
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate_chunk, lap, cfg, lo, hi, sample_steps)
                       for lo, hi in bounds]
            for fut in futures:  # merge strictly in chunk order
                s, o = fut.result()
                sums += s
                outers += o
    return Ensemble(n=g.n, config=cfg, sums=sums, outers=outers)


def empirical_moments(ensemble: Ensemble, t: float) -> MomentReport:
    """Unbiased mean and covariance at a recorded sample time.

    Standard error of a variance uses the Gaussian asymptotic formula
    Var(s^2) ~= 2 s^4 / (M - 1); the process is Gaussian, so this is exact
    to leading order. Off-diagonal entries use (s_kk s_jj + s_kj^2)/(M - 1).
    """
    wanted = ensemble.config.step_index(t)
    recorded = [ensemble.config.step_index(ts) for ts in ensemble.config.sample_times]
    if wanted not in recorded:
        raise ValueError(f"time {t} was not recorded; sample times: {ensemble.config.sample_times}")
    idx = recorded.index(wanted)
    m = ensemble.trajectories
    mean = ensemble.sums[idx] / m
    cov = (ensemble.outers[idx] - m * np.outer(mean, mean)) / (m - 1)
    cov = (cov + cov.T) / 2.0
    var = np.diag(cov)
    se_cov = np.sqrt((np.outer(var, var) + cov**2) / (m - 1))
    np.fill_diagonal(se_cov, np.sqrt(2.0 / (m - 1)) * np.abs(var))
    se_mean = np.sqrt(np.maximum(var, 0.0) / m)
    return MomentReport(t=t, trajectories=m, mean=mean, covariance=cov,
                        se_mean=se_mean, se_covariance=se_cov)


def validate_moments(report: MomentReport, target_covariance: np.ndarray,
                     gate: float = 4.0, offdiag_gate: float = 5.0,
                     target_mean: np.ndarray | None = None,
                     mean_gate: float = 3.0) -> MomentValidation:
    """Z-score the empirical moments against analytic targets.

    The verdict fails iff a diagonal z-score exceeds `gate` (or, when a mean
    target is supplied, a mean z-score exceeds `mean_gate`). Off-diagonal
    entries are noisier: exceedances of `offdiag_gate` are reported as
    warnings without failing the validation.
    """
    target_covariance = np.asarray(target_covariance, dtype=float)
    if target_covariance.shape != report.covariance.shape:
        raise ValueError("target covariance shape does not match the report")
    with np.errstate(divide="ignore", invalid="ignore"):
        z_cov = (report.covariance - target_covariance) / report.se_covariance
    z_cov = np.where(report.se_covariance > 0, z_cov,
                     np.where(report.covariance == target_covariance, 0.0, math.inf))
    failures: list[str] = []
    warnings: list[str] = []
    n = report.covariance.shape[0]
    for k in range(n):
        if abs(z_cov[k, k]) > gate:
            failures.append(f"Var(x_{k + 1}) off target: z = {z_cov[k, k]:+.2f} (gate {gate})")
    for k in range(n):
        for j in range(k + 1, n):
            if abs(z_cov[k, j]) > offdiag_gate:
                warnings.append(f"Cov(x_{k + 1}, x_{j + 1}) off target: z = {z_cov[k, j]:+.2f}")
    z_mean = None
    if target_mean is not None:
        target_mean = np.asarray(target_mean, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            z_mean = (report.mean - target_mean) / report.se_mean
        z_mean = np.where(report.se_mean > 0, z_mean,
                          np.where(report.mean == target_mean, 0.0, math.inf))
        for k in range(n):
            if abs(z_mean[k]) > mean_gate:
                failures.append(f"mean(x_{k + 1}) off target: z = {z_mean[k]:+.2f} (gate {mean_gate})")
    return MomentValidation(
        passed=not failures,
        z_covariance=z_cov,
        z_mean=z_mean,
        failures=tuple(failures),
        warnings=tuple(warnings),
    )
