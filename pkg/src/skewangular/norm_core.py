"""Norm descriptors over R^n, norm evaluation, and seeded vector sampling.

Vectors are plain float64 numpy arrays. Every evaluation routine accepts a
single vector of shape ``(n,)`` or a batch of shape ``(..., n)`` and reduces
over the last axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence, Union

import numpy as np

INF = math.inf
NEAR_ZERO = 1e-150
SYMMETRY_RTOL = 1e-12
MAX_REJECTIONS = 1000


class NormGeometryError(ValueError):
    """Base class for every error raised by this package."""


class InvalidP(NormGeometryError):
    pass


class NonPositiveWeight(NormGeometryError):
    pass


class NonSymmetricMatrix(NormGeometryError):
    pass


class NotPositiveDefinite(NormGeometryError):
    pass


class DimensionMismatch(NormGeometryError):
    pass


class NearZeroVector(NormGeometryError):
    pass


class InvalidVector(NormGeometryError):
    pass


class InternalError(RuntimeError):
    pass


@dataclass(frozen=True)
class Lp:
    p: float


@dataclass(frozen=True)
class WeightedLp:
    """``(sum_i w_i |x_i|^p)^(1/p)``; for ``p = inf`` the gauge is ``max_i w_i |x_i|``."""

    p: float
    weights: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class Gram:
    """Inner-product norm ``sqrt(x^T G x)`` for a symmetric positive-definite ``G``."""

    matrix: np.ndarray
    label: str | None = None

    def __eq__(self, other):
        return isinstance(other, Gram) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())

    @cached_property
    def factor(self) -> np.ndarray:
        # upper factor U with G = U^T U, so ||x|| = ||U x||_2
        return np.linalg.cholesky(self.matrix).T


NormSpec = Union[Lp, WeightedLp, Gram]


def as_vector(coords: Sequence[float] | np.ndarray) -> np.ndarray:
    """Coerce ``coords`` to a finite 1-D float64 array of length >= 1."""
    x = np.array(coords, dtype=np.float64)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim != 1 or x.size == 0:
        raise InvalidVector(f"expected a nonempty 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidVector(f"vector has non-finite coordinates: {coords!r}")
    return x


def spec_dim(spec: NormSpec) -> int | None:
    """Dimension fixed by the descriptor, or None when any dimension works."""
    if isinstance(spec, WeightedLp):
        return len(spec.weights)
    if isinstance(spec, Gram):
        return spec.matrix.shape[0]
    return None


def _check_p(p: float) -> None:
    if not isinstance(p, (int, float)) or math.isnan(p) or p < 1:
        raise InvalidP(f"p must be a real number >= 1 or inf, got {p!r}")


def validate_spec(spec: NormSpec, dim: int) -> None:
    """Raise unless ``spec`` describes a genuine norm on R^dim."""
    if dim < 1:
        raise DimensionMismatch(f"dimension must be positive, got {dim}")
    if isinstance(spec, Lp):
        _check_p(spec.p)
    elif isinstance(spec, WeightedLp):
        _check_p(spec.p)
        if len(spec.weights) != dim:
            raise DimensionMismatch(f"{len(spec.weights)} weights for dimension {dim}")
        for w in spec.weights:
            if not (math.isfinite(w) and w > 0):
                raise NonPositiveWeight(f"weights must be finite and > 0, got {w!r}")
    elif isinstance(spec, Gram):
        g = spec.matrix
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise DimensionMismatch(f"Gram matrix must be square, got shape {g.shape}")
        if g.shape[0] != dim:
            raise DimensionMismatch(f"{g.shape[0]}x{g.shape[0]} Gram matrix for dimension {dim}")
        if not np.all(np.isfinite(g)):
            raise NotPositiveDefinite("Gram matrix has non-finite entries")
        scale = max(np.max(np.abs(g)), np.finfo(float).tiny)
        if np.max(np.abs(g - g.T)) > SYMMETRY_RTOL * scale:
            raise NonSymmetricMatrix("Gram matrix is not symmetric")
        try:
            spec.factor
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite("Gram matrix is not positive definite") from None
    else:
        raise TypeError(f"unknown norm descriptor {spec!r}")


def is_inner_product(spec: NormSpec) -> bool:
    """True for descriptors whose norm comes from an inner product."""
    if isinstance(spec, Gram):
        return True
    return spec.p == 2


def _scaled_power_sum(a: np.ndarray, p: float, w: np.ndarray | None) -> np.ndarray:
    # factor out the largest entry so a**p cannot overflow for large p
    m = np.max(a, axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    t = (a / safe) ** p
    if w is not None:
        t = t * w
    return m[..., 0] * np.sum(t, axis=-1) ** (1.0 / p)


def norm(spec: NormSpec, x) -> float | np.ndarray:
    """Evaluate ``||x||`` under ``spec``.

    A 1-D input returns a float; batched input returns an array over the
    leading axes.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    fixed = spec_dim(spec)
    if fixed is not None and fixed != n:
        raise DimensionMismatch(f"vector of dimension {n} for a norm on R^{fixed}")

    if isinstance(spec, Gram):
        # explicit broadcast-and-sum instead of matmul: BLAS kernels may round
        # differently with batch shape, which would break run-to-run identity
        ux = np.sum(x[..., None, :] * spec.factor, axis=-1)
        out = _scaled_power_sum(np.abs(ux), 2.0, None)
    else:
        p = spec.p
        a = np.abs(x)
        w = np.asarray(spec.weights) if isinstance(spec, WeightedLp) else None
        if w is not None and p == INF:
            out = np.max(w * a, axis=-1)
        elif w is not None:
            out = _scaled_power_sum(a, p, w)
        elif p == INF:
            out = np.max(a, axis=-1)
        elif p == 1:
            out = np.sum(a, axis=-1)
        else:
            out = _scaled_power_sum(a, p, None)
    return float(out) if np.ndim(out) == 0 else out


def require_nonzero(spec: NormSpec, *vectors) -> list[float]:
    """Norms of ``vectors``, raising NearZeroVector if any is <= 1e-150."""
    norms = []
    for v in vectors:
        nv = norm(spec, v)
        if nv <= NEAR_ZERO:
            raise NearZeroVector(f"vector {np.asarray(v).tolist()} has norm {nv:g}")
        norms.append(nv)
    return norms


def child_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for task ``key`` under a 64-bit master seed."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(key)))


def sample_vectors(spec: NormSpec, dim: int, count: int, rng: np.random.Generator,
                   radius_range: tuple[float, float] = (1.0, 1.0)) -> np.ndarray:
    """Draw ``count`` nonzero vectors with norms uniform on ``radius_range``."""
    r_lo, r_hi = radius_range
    if not (0 < r_lo <= r_hi):
        raise ValueError(f"radius range must satisfy 0 < lo <= hi, got {radius_range}")
    out = rng.standard_normal((count, dim))
    rejections = 0
    while True:
        bad = ~np.any(out != 0.0, axis=1)
        if not bad.any():
            break
        rejections += int(bad.sum())
        if rejections > MAX_REJECTIONS:
            raise InternalError("too many all-zero draws")
        out[bad] = rng.standard_normal((int(bad.sum()), dim))
    radii = rng.uniform(r_lo, r_hi, size=count)
    return out * (radii / norm(spec, out))[:, None]


def sample_vector(spec: NormSpec, dim: int, rng: np.random.Generator,
                  radius_range: tuple[float, float] = (1.0, 1.0)) -> np.ndarray:
    return sample_vectors(spec, dim, 1, rng, radius_range)[0]


# --- text grammar -----------------------------------------------------------

def _parse_p(token: str) -> float:
    if token.strip().lower() == "inf":
        return INF
    try:
        p = float(token)
    except ValueError:
        raise InvalidP(f"cannot parse p from {token!r}") from None
    _check_p(p)
    if math.isinf(p):
        raise InvalidP("spell the max norm as 'inf'")
    return p


def format_p(p: float) -> str:
    if p == INF:
        return "inf"
    return str(int(p)) if float(p).is_integer() else repr(float(p))


def parse_vector(text: str) -> np.ndarray:
    """Parse ``"0.75,0.75"`` into a vector."""
    parts = [s.strip() for s in text.split(",")]
    try:
        values = [float(s) for s in parts]
    except ValueError:
        raise InvalidVector(f"malformed vector {text!r}") from None
    return as_vector(values)


def load_gram_matrix(path: str | Path) -> np.ndarray:
    """Read n rows of n whitespace-separated reals; '#' starts a comment line."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(t) for t in line.split()])
        except ValueError:
            raise NotPositiveDefinite(f"malformed Gram matrix row {line!r} in {path}") from None
    if not rows or any(len(r) != len(rows) for r in rows):
        raise DimensionMismatch(f"Gram matrix in {path} is not square")
    return np.array(rows, dtype=np.float64)


def parse_norm_spec(text: str) -> NormSpec:
    """Parse ``lp:<p>``, ``wlp:<p>:<w1,...>``, ``gram:<path>`` or ``gram:identity<n>``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind == "lp" and rest:
        return Lp(_parse_p(rest))
    if kind == "wlp":
        p_tok, _, w_tok = rest.partition(":")
        if not w_tok:
            raise NormGeometryError(f"weighted spec needs weights: {text!r}")
        try:
            weights = tuple(float(s) for s in w_tok.split(","))
        except ValueError:
            raise NonPositiveWeight(f"malformed weights {w_tok!r}") from None
        spec = WeightedLp(_parse_p(p_tok), weights)
        validate_spec(spec, len(weights))
        return spec
    if kind == "gram" and rest:
        if rest.startswith("identity") and rest[len("identity"):].isdigit():
            n = int(rest[len("identity"):])
            return Gram(np.eye(n), label=rest)
        spec = Gram(load_gram_matrix(rest), label=rest)
        validate_spec(spec, spec.matrix.shape[0])
        return spec
    raise NormGeometryError(f"unrecognized norm spec {text!r}")


def format_norm_spec(spec: NormSpec) -> str:
    """Normalized text form of ``spec`` (inverse of parse_norm_spec)."""
    if isinstance(spec, Lp):
        return f"lp:{format_p(spec.p)}"
    if isinstance(spec, WeightedLp):
        ws = ",".join(format_p(w) for w in spec.weights)
        return f"wlp:{format_p(spec.p)}:{ws}"
    if spec.label is not None:
        return f"gram:{spec.label}"
    rows = ";".join(",".join(repr(float(v)) for v in row) for row in spec.matrix)
    return f"gram:[{rows}]"
