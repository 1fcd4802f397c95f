"""CMA-ES maximization of the directional CFI with a layerwise warm start.

The strategy is the standard (mu/mu_w, lambda)-CMA-ES with cumulative
step-size adaptation and rank-one plus rank-mu covariance updates, using the
default weights and learning rates of Hansen's tutorial.  Internally it
minimizes ``-fitness``; everything it reports is in the maximization view.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .quantum import ShapeError

STOP_MAX_EVALS = "max_evaluations"
STOP_STAGNATION = "stagnation"
STOP_DEGENERATE = "degenerate_distribution"


def default_population_size(dim: int) -> int:
    return 4 + int(math.floor(3 * math.log(max(dim, 1))))


@dataclass(frozen=True)
class CmaConfig:
    """Strategy hyperparameters.  ``None`` sizes are filled in from the dimension."""

    population_size: Optional[int] = None
    initial_sigma: float = 0.5
    max_evaluations: int = 20000
    fitness_tolerance: float = 1e-12
    seed: int = 0
    parameter_dim: Optional[int] = None
    workers: int = 1

    def resolved(self, dim: int) -> "CmaConfig":
        if self.parameter_dim is not None and self.parameter_dim != dim:
            raise ShapeError(
                f"config expects dimension {self.parameter_dim}, initial mean has {dim}"
            )
        lam = self.population_size or default_population_size(dim)
        cfg = replace(self, population_size=int(lam), parameter_dim=dim)
        if cfg.population_size < 4:
            raise ValueError(f"population_size must be >= 4, got {cfg.population_size}")
        if not cfg.initial_sigma > 0:
            raise ValueError(f"initial_sigma must be positive, got {cfg.initial_sigma}")
        if cfg.max_evaluations < cfg.population_size:
            raise ValueError("max_evaluations must be at least the population size")
        return cfg


class GenerationRecord(NamedTuple):
    best_fitness: float
    mean_fitness: float
    sigma: float
    evaluations: int


@dataclass
class OptimizationTrace:
    generations: list[GenerationRecord]
    best_params: np.ndarray
    best_fitness: float
    evaluations: int
    stop_reason: str
    seed: int = 0
    initial_mean: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def summary(self) -> dict:
        return {
            "generations": len(self.generations),
            "evaluations": self.evaluations,
            "stop_reason": self.stop_reason,
            "final_sigma": self.generations[-1].sigma if self.generations else None,
            "seed": self.seed,
            "best_fitness_history": [g.best_fitness for g in self.generations],
        }


def _evaluate(fitness, xs: np.ndarray, workers: int) -> np.ndarray:
    rows = [x.copy() for x in xs]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vals = list(pool.map(fitness, rows))
    else:
        vals = [fitness(x) for x in rows]
    out = np.empty(len(vals))
    for k, v in enumerate(vals):
        try:
            out[k] = float(v)
        except (TypeError, ValueError):
            out[k] = np.nan
    return out


def cma_maximize(fitness: Callable[[np.ndarray], float], initial_mean,
                 config: CmaConfig, injected: Sequence = ()) -> OptimizationTrace:
    """Maximize ``fitness`` starting from ``initial_mean``.

    ``injected`` vectors replace the first samples of the first generation,
    so they are evaluated and take part in the update (their steps are
    clipped in Mahalanobis norm).  Non-finite fitness values are ranked
    last.  Candidates are all drawn before any is evaluated, so the result
    does not depend on ``config.workers``.
    """
    mean = np.array(initial_mean, dtype=float).reshape(-1)
    n = mean.size
    if n == 0:
        f0 = float(fitness(mean.copy()))
        rec = GenerationRecord(f0, f0, config.initial_sigma, 1)
        return OptimizationTrace([rec], mean, f0, 1, STOP_MAX_EVALS, config.seed, mean)
    cfg = config.resolved(n)
    lam = cfg.population_size
    mu = lam // 2
    weights = math.log((lam + 1) / 2) - np.log(np.arange(1, mu + 1))
    weights /= weights.sum()
    mueff = 1.0 / np.sum(weights**2)

    cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
    cs = (mueff + 2) / (n + mueff + 5)
    c1 = 2 / ((n + 1.3) ** 2 + mueff)
    cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
    damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + cs
    chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n**2))
    clip = math.sqrt(n) + 2 * n / (n + 2)

    rng = np.random.default_rng(cfg.seed)
    sigma = cfg.initial_sigma
    cov = np.eye(n)
    basis = np.eye(n)
    diag = np.ones(n)
    pc = np.zeros(n)
    ps = np.zeros(n)

    start = mean.copy()
    best_x, best_f = mean.copy(), -np.inf
    evals = 0
    gens: list[GenerationRecord] = []
    pending = [np.asarray(v, dtype=float).reshape(-1) for v in injected]
    for v in pending:
        if v.size != n:
            raise ShapeError(f"injected candidate has length {v.size}, expected {n}")
    window = 10 * n
    stop = STOP_MAX_EVALS
    gen = 0

    while evals < cfg.max_evaluations:
        z = rng.standard_normal((lam, n))
        y = (z * diag) @ basis.T
        x = mean + sigma * y
        inv_sqrt = (basis / diag) @ basis.T
        for k, v in enumerate(pending[:lam]):
            x[k] = v
            step = (v - mean) / sigma
            mahal = float(np.linalg.norm(inv_sqrt @ step))
            y[k] = step * (clip / mahal) if mahal > clip else step
        pending = []

        f = _evaluate(fitness, x, cfg.workers)
        evals += lam
        finite = np.isfinite(f)
        key = np.where(finite, -f, np.inf)
        order = np.argsort(key, kind="stable")
        if finite[order[0]] and f[order[0]] > best_f:
            best_f = float(f[order[0]])
            best_x = x[order[0]].copy()

        ysel = y[order[:mu]]
        yw = weights @ ysel
        mean = mean + sigma * yw
        ps = (1 - cs) * ps + math.sqrt(cs * (2 - cs) * mueff) * (inv_sqrt @ yw)
        ps_norm = float(np.linalg.norm(ps))
        hsig = ps_norm / math.sqrt(1 - (1 - cs) ** (2 * (gen + 1))) / chi_n < 1.4 + 2 / (n + 1)
        pc = (1 - cc) * pc + hsig * math.sqrt(cc * (2 - cc) * mueff) * yw
        rank_mu = (ysel.T * weights) @ ysel
        cov = ((1 - c1 - cmu + (1 - hsig) * c1 * cc * (2 - cc)) * cov
               + c1 * np.outer(pc, pc) + cmu * rank_mu)
        sigma *= math.exp((cs / damps) * (ps_norm / chi_n - 1))
        gen += 1

        mean_f = float(np.mean(f[finite])) if finite.any() else float("nan")
        gens.append(GenerationRecord(best_f, mean_f, sigma, evals))

        cov = 0.5 * (cov + cov.T)
        if not (np.all(np.isfinite(cov)) and math.isfinite(sigma)):
            stop = STOP_DEGENERATE
            break
        eig, basis = np.linalg.eigh(cov)
        if eig.min() <= 0 or eig.max() > 1e14 * eig.min() or sigma * math.sqrt(eig.max()) < 1e-15:
            stop = STOP_DEGENERATE
            break
        diag = np.sqrt(eig)

        if len(gens) > window and gens[-1].best_fitness - gens[-1 - window].best_fitness < cfg.fitness_tolerance:
            stop = STOP_STAGNATION
            break

    return OptimizationTrace(gens, best_x, best_f, evals, stop, cfg.seed, start)


def warm_start_extend(prev_best, rng_seed: int, new_layer_scale: float = np.pi) -> np.ndarray:
    """Append one layer of parameters drawn uniformly from ``[-scale, scale]``."""
    prev = np.asarray(prev_best, dtype=float).reshape(-1)
    if prev.size % 3:
        raise ShapeError(f"parameter vector length {prev.size} is not a multiple of 3")
    rng = np.random.default_rng(rng_seed)
    return np.concatenate([prev, rng.uniform(-new_layer_scale, new_layer_scale, 3)])


def depth_seeds(seed: int, depth: int) -> tuple[int, int]:
    """Independent (warm-start, strategy) seeds for one depth of a layerwise run."""
    a, b = np.random.SeedSequence([int(seed), int(depth)]).generate_state(2)
    return int(a), int(b)


def layerwise_optimize(problem, max_depth: int, cma: CmaConfig,
                       new_layer_scale: float = np.pi, freeze_core: bool = False,
                       callback: Optional[Callable[[int, OptimizationTrace], None]] = None,
                       ) -> list[OptimizationTrace]:
    """Optimize depths ``1..max_depth``, each warm-started from the previous optimum.

    At every depth the warm-start vector and the previous optimum padded
    with an identity-acting (all-zero) layer are injected into the first
    generation, so the best CFI never drops with depth.  With
    ``freeze_core`` only the newest layer is searched.
    """
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    prev = np.zeros(0)
    traces = []
    for depth in range(1, max_depth + 1):
        init_seed, cma_seed = depth_seeds(cma.seed, depth)
        init = warm_start_extend(prev, init_seed, new_layer_scale)
        if freeze_core and depth > 1:
            core = prev.copy()

            def f(x, core=core):
                return problem.fitness(np.concatenate([core, x]))

            cfg = replace(cma, seed=cma_seed, parameter_dim=3)
            trace = cma_maximize(f, init[-3:], cfg, injected=[init[-3:], np.zeros(3)])
            trace.best_params = np.concatenate([core, trace.best_params])
            trace.initial_mean = init
        else:
            inject = [init]
            if depth > 1:
                inject.append(np.concatenate([prev, np.zeros(3)]))
            cfg = replace(cma, seed=cma_seed, parameter_dim=3 * depth)
            trace = cma_maximize(problem.fitness, init, cfg, injected=inject)
        traces.append(trace)
        if callback is not None:
            callback(depth, trace)
        prev = trace.best_params
    return traces
