"""Angular and skew-angular distances and the triangle-inequality refinements.

Each quantity is computed exactly as its defining formula reads, with no
algebraic restructuring, so the values can be audited against hand
computations. The ``*_terms`` helpers work on batches of shape ``(m, n)``;
the public per-pair functions wrap them.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .norm_core import (
    NEAR_ZERO,
    Lp,
    NearZeroVector,
    NormGeometryError,
    NormSpec,
    as_vector,
    is_inner_product,
    norm,
)

TOL_REL = 1e-9

TRIANGLE_BOUNDS = ("maligranda_upper", "maligranda_lower", "dehghan_upper", "dehghan_lower")
ANGULAR_BOUNDS = ("angular_lower", "angular_upper", "massera_schaffer", "dunkl_williams_4")
SKEW_BOUNDS = ("skew_upper", "skew_lower", "mtype")
UNIVERSAL_BOUNDS = TRIANGLE_BOUNDS + ANGULAR_BOUNDS + SKEW_BOUNDS

# inequality name -> family it belongs to (two-sided estimates share a family)
BOUND_FAMILIES = {
    "maligranda_upper": "maligranda_upper",
    "maligranda_lower": "maligranda_lower",
    "dehghan_upper": "dehghan_upper",
    "dehghan_lower": "dehghan_lower",
    "angular_lower": "angular_two_sided",
    "angular_upper": "angular_two_sided",
    "massera_schaffer": "massera_schaffer",
    "dunkl_williams_4": "dunkl_williams_4",
    "skew_upper": "skew_two_sided",
    "skew_lower": "skew_two_sided",
    "mtype": "mtype",
}


class NotInnerProductSpec(NormGeometryError):
    pass


class InvalidArgument(NormGeometryError):
    pass


@dataclass(frozen=True)
class PairGeometry:
    norm_x: float
    norm_y: float
    norm_sum: float
    norm_diff: float
    alpha: float
    beta: float
    ratio: float
    abs_norm_gap: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BoundReport:
    """One ``lhs <= rhs`` instance."""

    name: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return bool(bound_holds(self.lhs, self.rhs))

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "slack": self.slack, "holds": self.holds}


def bound_holds(lhs, rhs, tol_rel: float = TOL_REL):
    """Relative-slack test with floor 1, elementwise on arrays."""
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1.0)
    return rhs - lhs >= -tol_rel * scale


# --- batched kernels --------------------------------------------------------

def _col(v: np.ndarray) -> np.ndarray:
    return v[..., None]


def pair_terms(spec: NormSpec, x: np.ndarray, y: np.ndarray) -> dict[str, np.ndarray]:
    """Every per-pair scalar for batches ``x``, ``y`` of shape ``(..., n)``.

    Rows with a near-zero vector produce nan/inf entries; callers that need
    the precondition enforced go through :func:`pair_geometry`.
    """
    nx = norm(spec, x)
    ny = norm(spec, y)
    nx_, ny_ = np.asarray(nx), np.asarray(ny)
    with np.errstate(divide="ignore", invalid="ignore"):
        ux = x / _col(nx_)
        uy = y / _col(ny_)
        return {
            "norm_x": nx_,
            "norm_y": ny_,
            "norm_sum": np.asarray(norm(spec, x + y)),
            "norm_diff": np.asarray(norm(spec, x - y)),
            "alpha": np.asarray(norm(spec, ux - uy)),
            "beta": np.asarray(norm(spec, x / _col(ny_) - y / _col(nx_))),
            "ratio": nx_ / ny_,
            "abs_norm_gap": np.abs(nx_ - ny_),
            "maligranda_gap": 2 - np.asarray(norm(spec, ux + uy)),
            "dehghan_gap": nx_ / ny_ + ny_ / nx_ - np.asarray(norm(spec, x / _col(ny_) + y / _col(nx_))),
        }


def bound_terms(t: dict[str, np.ndarray]) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """(lhs, rhs) of every bound, as ``lhs <= rhs``, from :func:`pair_terms` output."""
    nx, ny = t["norm_x"], t["norm_y"]
    lo = np.minimum(nx, ny)
    hi = np.maximum(nx, ny)
    s, d = t["norm_sum"], t["norm_diff"]
    alpha, beta, gap = t["alpha"], t["beta"], t["abs_norm_gap"]
    mg, dg = t["maligranda_gap"], t["dehghan_gap"]
    with np.errstate(divide="ignore", invalid="ignore"):
        return {
            "maligranda_upper": (s, nx + ny - mg * lo),
            "maligranda_lower": (nx + ny - mg * hi, s),
            "dehghan_upper": (s, nx + ny - dg * lo),
            "dehghan_lower": (nx + ny - dg * hi, s),
            "angular_lower": ((d - gap) / lo, alpha),
            "angular_upper": (alpha, (d + gap) / hi),
            "massera_schaffer": (alpha, 2 * d / hi),
            "dunkl_williams_4": (alpha, 4 * d / (nx + ny)),
            "dunkl_williams_2": (alpha, 2 * d / (nx + ny)),
            "skew_upper": (beta, d / hi + gap / lo),
            "skew_lower": (d / lo - gap / hi, beta),
            "mtype": (beta, (1 / nx + 1 / ny) * d),
        }


# --- per-pair API -----------------------------------------------------------

def _prepare(spec: NormSpec, x, y) -> dict[str, float]:
    x = as_vector(x)
    y = as_vector(y)
    t = pair_terms(spec, x, y)
    for key, v in (("x", x), ("y", y)):
        if t[f"norm_{key}"] <= NEAR_ZERO:
            raise NearZeroVector(f"{key} = {v.tolist()} has norm {float(t[f'norm_{key}']):g}")
    return {k: float(v) for k, v in t.items()}


def pair_geometry(spec: NormSpec, x, y) -> PairGeometry:
    t = _prepare(spec, x, y)
    return PairGeometry(**{f: t[f] for f in PairGeometry.__dataclass_fields__})


def angular_distance(spec: NormSpec, x, y) -> float:
    return pair_geometry(spec, x, y).alpha


def skew_angular_distance(spec: NormSpec, x, y) -> float:
    return pair_geometry(spec, x, y).beta


def maligranda_gap(spec: NormSpec, x, y) -> float:
    """``2 - ||x/||x|| + y/||y||||``."""
    return _prepare(spec, x, y)["maligranda_gap"]


def dehghan_gap(spec: NormSpec, x, y) -> float:
    """``||x||/||y|| + ||y||/||x|| - ||x/||y|| + y/||x||||``."""
    return _prepare(spec, x, y)["dehghan_gap"]


def _reports(spec: NormSpec, x, y, names) -> list[BoundReport]:
    b = bound_terms(_prepare(spec, x, y))
    return [BoundReport(n, float(b[n][0]), float(b[n][1])) for n in names]


def triangle_bounds(spec: NormSpec, x, y) -> list[BoundReport]:
    return _reports(spec, x, y, TRIANGLE_BOUNDS)


def angular_bounds(spec: NormSpec, x, y) -> list[BoundReport]:
    return _reports(spec, x, y, ANGULAR_BOUNDS)


def skew_angular_bounds(spec: NormSpec, x, y) -> list[BoundReport]:
    return _reports(spec, x, y, SKEW_BOUNDS)


def dunkl_williams_2(spec: NormSpec, x, y) -> BoundReport:
    """``alpha <= 2||x-y|| / (||x|| + ||y||)``; only guaranteed for inner-product norms."""
    return _reports(spec, x, y, ("dunkl_williams_2",))[0]


def sharpness_ratio(eps: float) -> float:
    """``beta * ||x|| ||y|| / ((||x|| + ||y||) ||x - y||)`` at ``x = -1``, ``y = eps`` on the line.

    Goes through :func:`pair_geometry`; the closed form is left to callers as
    a check.
    """
    if not eps > 0:
        raise InvalidArgument(f"eps must be positive, got {eps!r}")
    g = pair_geometry(Lp(1.0), [-1.0], [eps])
    return g.beta * g.norm_x * g.norm_y / ((g.norm_x + g.norm_y) * g.norm_diff)


def euclidean_identity_defect(spec: NormSpec, x, y) -> float:
    """``|beta^2 - alpha^2 - (r - 1/r)^2|``, which vanishes for inner-product norms."""
    if not is_inner_product(spec):
        raise NotInnerProductSpec(f"{spec!r} is not an inner-product norm")
    g = pair_geometry(spec, x, y)
    r = g.ratio
    return abs(g.beta ** 2 - g.alpha ** 2 - (r - 1 / r) ** 2)


# --- batch property suite ---------------------------------------------------

SCALE_FACTORS = (0.1, 3.0, 10.0)


def failure_counts(spec: NormSpec, x: np.ndarray, y: np.ndarray) -> dict[str, int]:
    """Count violations of every always-valid bound and invariant over pairs.

    ``x`` and ``y`` have shape ``(m, n)`` and must be nonzero rows. For
    inner-product specs the Dunkl-Williams constant-2 bound and the
    ``beta^2 - alpha^2 = (r - 1/r)^2`` identity are checked as well.
    """
    t = pair_terms(spec, x, y)
    b = bound_terms(t)
    counts = {name: int(np.sum(~bound_holds(*b[name]))) for name in UNIVERSAL_BOUNDS}

    alpha, beta = t["alpha"], t["beta"]
    counts["alpha_range"] = int(np.sum((alpha < 0) | (alpha > 2 + TOL_REL)))
    counts["maligranda_gap_nonneg"] = int(np.sum(t["maligranda_gap"] < -TOL_REL))
    counts["dehghan_gap_nonneg"] = int(np.sum(t["dehghan_gap"] < -TOL_REL))
    counts["reverse_triangle"] = int(np.sum(t["abs_norm_gap"] > t["norm_diff"] * (1 + TOL_REL)))

    swapped = pair_terms(spec, y, x)
    sym_bad = np.zeros(len(alpha), dtype=bool)
    for key in ("alpha", "beta"):
        sym_bad |= np.abs(swapped[key] - t[key]) > 1e-12 * np.maximum(t[key], 1.0)
    counts["symmetry"] = int(np.sum(sym_bad))

    scale_bad = np.zeros(len(alpha), dtype=bool)
    for c in SCALE_FACTORS:
        scaled = pair_terms(spec, c * x, c * y)
        for key in ("alpha", "beta"):
            scale_bad |= np.abs(scaled[key] - t[key]) > TOL_REL * np.maximum(t[key], 1.0)
    counts["scale_invariance"] = int(np.sum(scale_bad))

    eq = pair_terms(spec, x, y * (t["norm_x"] / t["norm_y"])[:, None])
    counts["equal_norm_collapse"] = int(np.sum(
        np.abs(eq["alpha"] - eq["beta"]) > TOL_REL * np.maximum(eq["alpha"], 1.0)))

    if is_inner_product(spec):
        counts["dunkl_williams_2"] = int(np.sum(~bound_holds(*b["dunkl_williams_2"])))
        r = t["ratio"]
        defect = np.abs(beta ** 2 - alpha ** 2 - (r - 1 / r) ** 2)
        counts["euclidean_identity"] = int(np.sum(defect > TOL_REL * np.maximum(beta ** 2, 1.0)))
    return counts
