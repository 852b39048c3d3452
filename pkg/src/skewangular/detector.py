"""Counterexample search for inner-product behaviour of a norm.

Three independent probes are combined:

* maximise ``alpha[x,y] - beta[x,y]``; a positive value rules out an inner
  product,
* scan equal-norm pairs for ``||x+y|| > ||g x + y/g||`` over a grid of g > 0
  (Lorch's criterion),
* maximise the normalised parallelogram-law defect (classical oracle).

A found violation is a certificate; a clean run is only evidence.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .functionals import pair_geometry, pair_terms
from .norm_core import (
    NEAR_ZERO,
    NormGeometryError,
    NormSpec,
    as_vector,
    child_rng,
    norm,
    require_nonzero,
    sample_vectors,
    validate_spec,
)

# restarts are climbed in lockstep batches of this many rows; the block size
# is fixed so results never depend on how blocks are spread over threads
BLOCK = 16

# a move is accepted only if it beats the incumbent by
#   max(FORCING * step, IMPROVE_RTOL * max(|f|, 1)).
# The step term stops endless crawls along slowly improving ridges of the
# polyhedral norms; the relative floor stops rounding noise on a flat optimum
# from counting as progress.
FORCING = 1e-3
PATTERN_DOUBLINGS = 30
IMPROVE_RTOL = 1e-14

OBJECTIVES = ("alpha_minus_beta", "dunkl_williams_2", "parallelogram")
_STREAM_TAGS = {"alpha_minus_beta": 0, "dunkl_williams_2": 1, "parallelogram": 2, "lorch": 3}

COUNTEREXAMPLE = "CounterexampleFound"
NO_VIOLATION = "NoViolationFound"
NOT_INNER_PRODUCT = "NotInnerProduct"
CONSISTENT = "ConsistentWithInnerProduct"

DEFAULT_GAMMA_GRID = tuple(np.logspace(-3.0, 3.0, 61).tolist())


class InvalidConfig(NormGeometryError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    dim: int = 2
    restarts: int = 64
    seed: int = 0
    radius_range: tuple[float, float] = (0.25, 4.0)
    step_init: float = 0.5
    step_min: float = 1e-10
    violation_threshold: float = 1e-7
    max_iters_per_restart: int = 10000

    def validate(self) -> None:
        if self.dim < 1 or self.restarts < 1 or self.max_iters_per_restart < 1:
            raise InvalidConfig("dim, restarts and max_iters_per_restart must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidConfig(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        lo, hi = self.radius_range
        if not 0 < lo <= hi:
            raise InvalidConfig(f"bad radius range {self.radius_range}")
        if not 0 < self.step_min < self.step_init:
            raise InvalidConfig("need 0 < step_min < step_init")
        if not self.violation_threshold > 0:
            raise InvalidConfig("violation_threshold must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["radius_range"] = list(self.radius_range)
        return d


@dataclass(frozen=True)
class DetectionResult:
    verdict: str
    objective: str
    best_value: float
    witness_x: list[float] | None
    witness_y: list[float] | None
    alpha_at_witness: float
    beta_at_witness: float
    restarts_used: int
    evaluations: int

    @property
    def found(self) -> bool:
        return self.verdict == COUNTEREXAMPLE

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LorchViolation:
    x: list[float]
    y: list[float]
    gamma: float
    lhs: float
    rhs: float


@dataclass(frozen=True)
class LorchResult:
    violations: list[LorchViolation]
    pairs_tested: int
    gammas_per_pair: int

    def to_dict(self, limit: int | None = None) -> dict:
        shown = self.violations if limit is None else self.violations[:limit]
        return {
            "violation_count": len(self.violations),
            "violations": [asdict(v) for v in shown],
            "pairs_tested": self.pairs_tested,
            "gammas_per_pair": self.gammas_per_pair,
        }


@dataclass(frozen=True)
class Classification:
    verdict: str
    alpha_beta: DetectionResult
    lorch: LorchResult
    parallelogram: DetectionResult
    sub_verdicts: dict = field(default_factory=dict)

    def to_dict(self, lorch_limit: int | None = 5) -> dict:
        return {
            "verdict": self.verdict,
            "sub_verdicts": dict(self.sub_verdicts),
            "alpha_beta": self.alpha_beta.to_dict(),
            "lorch": self.lorch.to_dict(lorch_limit),
            "parallelogram": self.parallelogram.to_dict(),
        }


# --- objectives -------------------------------------------------------------

def violation_objective(spec: NormSpec, x, y) -> float:
    """``alpha - beta``; positive only when the norm is not an inner-product norm."""
    g = pair_geometry(spec, x, y)
    return g.alpha - g.beta


def parallelogram_defect(spec: NormSpec, x, y) -> float:
    x = as_vector(x)
    y = as_vector(y)
    return abs(norm(spec, x + y) ** 2 + norm(spec, x - y) ** 2
               - 2 * norm(spec, x) ** 2 - 2 * norm(spec, y) ** 2)


def _batch_objective(name: str, spec: NormSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    t = pair_terms(spec, x, y)
    nx, ny = t["norm_x"], t["norm_y"]
    with np.errstate(divide="ignore", invalid="ignore"):
        if name == "alpha_minus_beta":
            f = t["alpha"] - t["beta"]
        elif name == "dunkl_williams_2":
            f = t["alpha"] - 2 * t["norm_diff"] / (nx + ny)
        else:
            f = np.abs(t["norm_sum"] ** 2 + t["norm_diff"] ** 2 - 2 * nx ** 2 - 2 * ny ** 2) \
                / (nx ** 2 + ny ** 2)
    ok = (nx > NEAR_ZERO) & (ny > NEAR_ZERO) & np.isfinite(f)
    return np.where(ok, f, -np.inf)


def _objective_at(name: str, spec: NormSpec, x, y) -> float:
    if name == "alpha_minus_beta":
        return violation_objective(spec, x, y)
    nx, ny = require_nonzero(spec, x, y)
    if name == "dunkl_williams_2":
        g = pair_geometry(spec, x, y)
        return g.alpha - 2 * g.norm_diff / (g.norm_x + g.norm_y)
    return parallelogram_defect(spec, x, y) / (nx ** 2 + ny ** 2)


# --- pattern search ---------------------------------------------------------

def _climb_block(name: str, spec: NormSpec, z: np.ndarray, cfg: SearchConfig):
    """Pattern search on each row of ``z = [x | y]`` independently.

    A sweep polls +step then -step on every coordinate, keeping improvements.
    After an improving sweep the net displacement is extrapolated with
    doubling length while that keeps improving. A sweep without improvement
    halves the step and an improving one doubles it (up to ``step_init``), so
    a climb that found a kink of a polyhedral norm does not crawl along it.
    """
    n = cfg.dim
    rows = z.shape[0]
    evals = np.zeros(rows, dtype=np.int64)

    def f_of(at, zz):
        evals[at] += 1
        return _batch_objective(name, spec, zz[:, :n], zz[:, n:])

    def gain_needed(at):
        return np.maximum(FORCING * step[at], IMPROVE_RTOL * np.maximum(np.abs(f[at]), 1.0))

    everyone = np.arange(rows)
    z = z / np.maximum(norm(spec, z[:, :n]), norm(spec, z[:, n:]))[:, None]
    f = f_of(everyone, z)
    step = np.full(rows, cfg.step_init)
    iters = np.zeros(rows, dtype=np.int64)
    active = np.ones(rows, dtype=bool)
    while active.any():
        base = z.copy()
        improved = np.zeros(rows, dtype=bool)
        for j in range(2 * n):
            pending = np.flatnonzero(active)
            for sign in (1.0, -1.0):
                if pending.size == 0:
                    break
                cand = z[pending].copy()
                cand[:, j] += sign * step[pending]
                fc = f_of(pending, cand)
                better = fc > f[pending] + gain_needed(pending)
                hit = pending[better]
                z[hit] = cand[better]
                f[hit] = fc[better]
                improved[hit] = True
                pending = pending[~better]

        moving = np.flatnonzero(active & improved)
        if moving.size:
            direction = z[moving] - base[moving]
            length = np.ones(moving.size)
            live = np.ones(moving.size, dtype=bool)
            for _ in range(PATTERN_DOUBLINGS):
                if not live.any():
                    break
                at = moving[live]
                cand = z[at] + length[live, None] * direction[live]
                fc = f_of(at, cand)
                better = fc > f[at] + gain_needed(at)
                z[at[better]] = cand[better]
                f[at[better]] = fc[better]
                sub = np.flatnonzero(live)
                live[sub[~better]] = False
                length[sub[better]] *= 2.0

            # every objective is invariant under common scaling; pinning the
            # scale keeps the step size meaningful
            zi = z[moving]
            scale = np.maximum(norm(spec, zi[:, :n]), norm(spec, zi[:, n:]))
            z[moving] = zi / scale[:, None]
            f[moving] = f_of(moving, z[moving])

        iters[active] += 1
        step[active & ~improved] *= 0.5
        grow = active & improved
        step[grow] = np.minimum(2.0 * step[grow], cfg.step_init)
        active &= (step >= cfg.step_min) & (iters < cfg.max_iters_per_restart)
    return z, f, int(evals.sum())


def _initial_points(spec: NormSpec, cfg: SearchConfig, tag: int, start: int, stop: int) -> np.ndarray:
    z = np.empty((stop - start, 2 * cfg.dim))
    for row, i in enumerate(range(start, stop)):
        rng = child_rng(cfg.seed, tag, i)
        z[row] = sample_vectors(spec, cfg.dim, 2, rng, cfg.radius_range).reshape(-1)
    return z


def search_counterexample(spec: NormSpec, config: SearchConfig = SearchConfig(),
                          objective: str = "alpha_minus_beta", workers: int = 1) -> DetectionResult:
    """Multi-start pattern search maximising ``objective``.

    ``alpha_minus_beta`` is the characterisation objective; ``dunkl_williams_2``
    and ``parallelogram`` are secondary probes that share the machinery.
    """
    if objective not in OBJECTIVES:
        raise InvalidConfig(f"unknown objective {objective!r}")
    config.validate()
    validate_spec(spec, config.dim)
    tag = _STREAM_TAGS[objective]
    blocks = [(s, min(s + BLOCK, config.restarts)) for s in range(0, config.restarts, BLOCK)]

    def run(block):
        z0 = _initial_points(spec, config, tag, *block)
        return _climb_block(objective, spec, z0, config)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, blocks))
    else:
        results = [run(b) for b in blocks]

    z = np.concatenate([r[0] for r in results])
    f = np.concatenate([r[1] for r in results])
    evaluations = sum(r[2] for r in results)
    best = int(np.argmax(f))  # first index wins ties
    x, y = z[best, :config.dim], z[best, config.dim:]

    # common scaling leaves every objective unchanged
    scale = max(norm(spec, x), norm(spec, y))
    x, y = x / scale, y / scale
    value = _objective_at(objective, spec, x, y)
    g = pair_geometry(spec, x, y)
    found = value > config.violation_threshold
    return DetectionResult(
        verdict=COUNTEREXAMPLE if found else NO_VIOLATION,
        objective=objective,
        best_value=value,
        witness_x=x.tolist() if found else None,
        witness_y=y.tolist() if found else None,
        alpha_at_witness=g.alpha,
        beta_at_witness=g.beta,
        restarts_used=config.restarts,
        evaluations=evaluations,
    )


# --- Lorch scan ---------------------------------------------------------------

def lorch_scan(spec: NormSpec, config: SearchConfig = SearchConfig(),
               gamma_grid=DEFAULT_GAMMA_GRID) -> LorchResult:
    """Check ``||x+y|| <= ||g x + y/g||`` on sampled pairs with ``||x|| = ||y||``.

    Negative g needs no scan: ``||g x + y/g|| = |||g| x + y/|g|||``.
    """
    gammas = np.asarray(gamma_grid, dtype=np.float64)
    if gammas.ndim != 1 or gammas.size == 0 or not np.all(gammas > 0) \
            or not np.all(np.isfinite(gammas)):
        raise InvalidConfig("gamma grid must be a nonempty list of positive reals")
    config.validate()
    validate_spec(spec, config.dim)
    tag = _STREAM_TAGS["lorch"]
    violations = []
    for i in range(config.restarts):
        rng = child_rng(config.seed, tag, i)
        x, y = sample_vectors(spec, config.dim, 2, rng, config.radius_range)
        y = y * (norm(spec, x) / norm(spec, y))
        lhs = norm(spec, x + y)
        rhs = norm(spec, gammas[:, None] * x + y / gammas[:, None])
        bad = lhs > rhs + 1e-9 * max(lhs, 1.0)
        for k in np.flatnonzero(bad):
            violations.append(LorchViolation(x.tolist(), y.tolist(), float(gammas[k]),
                                             float(lhs), float(rhs[k])))
    return LorchResult(violations, config.restarts, int(gammas.size))


def lorch_check(spec: NormSpec, x, y, gamma: float) -> tuple[float, float]:
    """``(||x+y||, ||gamma x + y/gamma||)`` for one pair and one gamma."""
    x = as_vector(x)
    y = as_vector(y)
    return norm(spec, x + y), norm(spec, gamma * x + y / gamma)


def classify_space(spec: NormSpec, config: SearchConfig = SearchConfig(),
                   gamma_grid=DEFAULT_GAMMA_GRID, workers: int = 1) -> Classification:
    ab = search_counterexample(spec, config, "alpha_minus_beta", workers)
    lorch = lorch_scan(spec, config, gamma_grid)
    para = search_counterexample(spec, config, "parallelogram", workers)
    subs = {
        "alpha_beta": ab.found,
        "lorch": bool(lorch.violations),
        "parallelogram": para.found,
    }
    verdict = NOT_INNER_PRODUCT if any(subs.values()) else CONSISTENT
    return Classification(verdict, ab, lorch, para, subs)


def grid_gamma(start: float, stop: float, count: int) -> tuple[float, ...]:
    if not (0 < start < stop and count >= 2):
        raise InvalidConfig("need 0 < start < stop and at least two points")
    return tuple(np.geomspace(start, stop, count).tolist())


__all__ = [
    "BLOCK", "CONSISTENT", "COUNTEREXAMPLE", "Classification", "DEFAULT_GAMMA_GRID",
    "DetectionResult", "InvalidConfig", "LorchResult", "LorchViolation", "NOT_INNER_PRODUCT",
    "NO_VIOLATION", "OBJECTIVES", "SearchConfig", "classify_space", "grid_gamma", "lorch_check",
    "lorch_scan", "parallelogram_defect", "search_counterexample", "violation_objective",
]

