"""Strategy search: metaheuristics over the six free storage attributes.

The decision vector covers mempool size (a1), the small-fee threshold and
count (a4, a5; only for designated-space categories), the per-transaction
slot cap (a6) and the CDF scale/shape (a7, a8). Optimizers move in a
continuous box; integer attributes are rounded at evaluation time and every
candidate is judged by the volatility of a full simulation run against a
fixed dataset and seed (common random numbers), so comparisons are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import SimulationConfig, StrategyCategory, category, strategy_from_category
from .metrics import series_volatility
from .optimizers import cma_es, differential_evolution, genetic_algorithm, gbo, pso
from .simulator import run

ALGORITHMS = ("pso", "de", "ga", "cmaes", "gbo")

# Attribute search bounds: the envelope of published optima, widened.
DEFAULT_BOUNDS: Dict[str, Tuple[float, float]] = {
    "a1": (1000, 80000),
    "a4": (1.0, 2.0),
    "a5": (0, 200),
    "a6": (10, 800),
    "a7": (4.0, 10.0),
    "a8": (0.1, 1.0),
}

INTEGER_ATTRS = frozenset({"a1", "a5", "a6"})


def constriction_params(k: float, phi1: float, phi2: float) -> Tuple[float, float, float]:
    """Derive (w, c1, c2) from the constriction coefficient.

    chi = 2k / |2 - phi - sqrt(phi^2 - 4 phi)| with phi = phi1 + phi2 >= 4;
    the inertia weight is chi itself and the acceleration coefficients are
    phi1*chi and phi2*chi.
    """
    if not 0 <= k <= 1:
        raise ValueError("k must lie in [0, 1]")
    phi = phi1 + phi2
    if phi < 4:
        raise ValueError(f"phi1 + phi2 must be >= 4, got {phi}")
    chi = 2.0 * k / abs(2.0 - phi - math.sqrt(phi * phi - 4.0 * phi))
    return chi, phi1 * chi, phi2 * chi


@dataclass(frozen=True)
class SearchSpace:
    """Bounded attribute box for one strategy category."""

    category: StrategyCategory
    bounds: Dict[str, Tuple[float, float]] = field(default_factory=lambda: dict(DEFAULT_BOUNDS))

    @property
    def names(self) -> List[str]:
        keys = ["a1"]
        if self.category.designated_space:
            keys += ["a4", "a5"]
        keys += ["a6", "a7", "a8"]
        return keys

    @property
    def lb(self) -> np.ndarray:
        return np.array([self.bounds[n][0] for n in self.names], dtype=float)

    @property
    def ub(self) -> np.ndarray:
        return np.array([self.bounds[n][1] for n in self.names], dtype=float)

    def decode(self, x: Sequence[float]) -> Dict[str, float]:
        """Vector -> attribute dict, rounding integer attributes."""
        attrs = {}
        for name, value in zip(self.names, x):
            attrs[name] = int(round(value)) if name in INTEGER_ATTRS else float(value)
        return attrs


@dataclass(frozen=True)
class OptimizerConfig:
    """Hyper-parameters for the search algorithms.

    The evaluation budget is n_pop * max_gen (5000 with the defaults) for
    every algorithm, also covering the one algorithm configured directly by
    evaluation count.
    """

    algorithm: str = "pso"
    n_pop: int = 50
    max_gen: int = 100
    n_eval: Optional[int] = None
    w: float = 0.73
    c1: float = 1.50
    c2: float = 1.50
    de_f: float = 0.5
    de_cr: float = 0.9
    ga_crossover_rate: float = 0.9
    gbo_escape_prob: float = 0.5
    cmaes_popsize: Optional[int] = None
    rng_seed: int = 0

    @property
    def budget(self) -> int:
        return self.n_eval if self.n_eval is not None else self.n_pop * self.max_gen

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.budget < 1:
            raise ValueError("evaluation budget must be positive")


@dataclass
class OptimizationRun:
    algorithm: str
    category_id: int
    best_attrs: Dict[str, float]
    best_volatility: float
    trace: List[float]
    evaluations: int
    seed: int


def evaluate(candidate: Sequence[float], cat: StrategyCategory,
             dataset, cfg: SimulationConfig) -> float:
    """Objective: volatility of the simulated incentive series.

    Invalid strategies and degenerate runs (fewer than three sealed blocks)
    score +inf instead of raising, so optimizers can rank them out.
    """
    space = SearchSpace(category=cat)
    attrs = space.decode(candidate)
    try:
        strategy = strategy_from_category(cat, **attrs)
    except ValueError:
        return math.inf
    try:
        result = run(dataset, strategy, cfg)
    except ValueError:
        return math.inf
    if len(result.blocks) < 3:
        return math.inf
    return series_volatility(result.incentives)


def run_optimizer(algo: str, space: SearchSpace, objective: Callable,
                  config: OptimizerConfig) -> OptimizationRun:
    """Spend the configured budget minimizing `objective` over `space`.

    `objective` receives the decoded attribute dict. Deterministic per
    config seed; the returned generation trace is non-increasing.
    """
    lb, ub = space.lb, space.ub
    if lb.size == 0:
        raise ValueError("empty search space")
    rng = np.random.default_rng(config.rng_seed)

    def boxed(x: np.ndarray) -> float:
        return objective(space.decode(x))

    budget = config.budget
    if algo == "pso":
        w, c1, c2 = config.w, config.c1, config.c2
        result = pso(boxed, lb, ub, budget, rng, n_pop=config.n_pop, w=w, c1=c1, c2=c2)
    elif algo == "de":
        result = differential_evolution(boxed, lb, ub, budget, rng, n_pop=config.n_pop,
                                        f_weight=config.de_f, cr=config.de_cr)
    elif algo == "ga":
        result = genetic_algorithm(boxed, lb, ub, budget, rng, n_pop=config.n_pop,
                                   crossover_rate=config.ga_crossover_rate,
                                   max_gen=config.max_gen)
    elif algo == "cmaes":
        result = cma_es(boxed, lb, ub, budget, rng, popsize=config.cmaes_popsize)
    elif algo == "gbo":
        result = gbo(boxed, lb, ub, budget, rng, n_pop=config.n_pop,
                     escape_prob=config.gbo_escape_prob)
    else:
        raise ValueError(f"unknown algorithm {algo!r}")

    return OptimizationRun(
        algorithm=algo,
        category_id=space.category.id,
        best_attrs=space.decode(result.best_x),
        best_volatility=result.best_f,
        trace=result.trace,
        evaluations=result.evaluations,
        seed=config.rng_seed,
    )


# Experiment layout mirroring the published grid: per algorithm, the four
# categories in the order (time, no-space), (time, space), (fee, no-space),
# (fee, space) -> category ids 2, 1, 4, 3.
GRID_CATEGORY_ORDER = (2, 1, 4, 3)


def _grid_cell(args) -> OptimizationRun:
    algo, cat_id, bounds, cell_config, dataset, cfg = args
    cat = category(cat_id)
    space = SearchSpace(category=cat, bounds=bounds)

    def objective(attrs):
        return evaluate([attrs[n] for n in space.names], cat, dataset, cfg)

    return run_optimizer(algo, space, objective, cell_config)


def experiment_grid(dataset, cfg: SimulationConfig,
                    base_config: OptimizerConfig = OptimizerConfig(),
                    algorithms: Sequence[str] = ALGORITHMS,
                    bounds: Optional[Dict[str, Tuple[float, float]]] = None,
                    jobs: int = 1) -> List[OptimizationRun]:
    """All algorithm-by-category optimization runs (20 with the defaults).

    Each cell gets a deterministic seed derived from the base seed and its
    grid position, so results are identical no matter how many worker
    processes (`jobs`) execute the cells.
    """
    dataset = list(dataset)
    if not dataset:
        raise ValueError("experiment grid needs a non-empty dataset")
    cells = []
    for a_idx, algo in enumerate(algorithms):
        for c_idx, cat_id in enumerate(GRID_CATEGORY_ORDER):
            cell_seed = base_config.rng_seed + 1000 * a_idx + c_idx
            cell_config = replace(base_config, algorithm=algo, rng_seed=cell_seed)
            cells.append((algo, cat_id, dict(bounds) if bounds else dict(DEFAULT_BOUNDS),
                          cell_config, dataset, cfg))
    if jobs <= 1:
        return [_grid_cell(cell) for cell in cells]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_grid_cell, cells))


def grid_rows(runs: Sequence[OptimizationRun]) -> List[dict]:
    """Grid runs -> table rows shaped like the published results table."""
    rows = []
    for i, r in enumerate(runs, start=1):
        cat = category(r.category_id)
        attrs = r.best_attrs
        rows.append({
            "algorithm": r.algorithm,
            "experiment": i,
            "a1": attrs["a1"],
            "a2": cat.priority.label,
            "a3": cat.designated_space,
            "a4": attrs.get("a4", "-"),
            "a5": attrs.get("a5", "-"),
            "a6": attrs["a6"],
            "a7": attrs["a7"],
            "a8": attrs["a8"],
            "volatility": r.best_volatility,
        })
    return rows


def write_grid_csv(rows: Sequence[dict], path) -> int:
    import csv

    cols = ["algorithm", "experiment", "a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8", "volatility"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in cols])
    return len(rows)


def write_trace_csv(run_: OptimizationRun, path) -> int:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["generation", "best_volatility"])
        for gen, best in enumerate(run_.trace):
            writer.writerow([gen, _cell(best)])
    return len(run_.trace)


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)
