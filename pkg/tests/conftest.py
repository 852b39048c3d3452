"""Shared fixtures and independent oracles.

The oracle helpers here never call into the package: norms come from
``np.linalg.norm`` or an explicit quadratic form, so tests that compare the
library against them check two separate routes.
"""

from fractions import Fraction

import numpy as np
import pytest

from skewangular.norm_core import Gram, Lp, WeightedLp

ACCEPTANCE_LINES = []


def oracle_norm(kind, x, p=2.0, matrix=None, weights=None):
    x = np.asarray(x, dtype=float)
    if kind == "lp":
        return np.linalg.norm(x, ord=p, axis=-1)
    if kind == "wlp":
        w = np.asarray(weights)
        if np.isinf(p):
            return np.max(w * np.abs(x), axis=-1)
        return np.sum(w * np.abs(x) ** p, axis=-1) ** (1 / p)
    return np.sqrt(np.einsum("...i,ij,...j->...", x, matrix, x))


def oracle_alpha_beta(normf, x, y):
    nx, ny = normf(x), normf(y)
    alpha = normf(x / nx[..., None] - y / ny[..., None])
    beta = normf(x / ny[..., None] - y / nx[..., None])
    return alpha, beta


def grid_alpha_minus_beta(kind, ratios, steps=360, **kw):
    """Brute-force max of alpha - beta over pairs of directions in the plane.

    x runs over ``steps`` unit directions, y over the same directions scaled
    by each radius ratio. Returns ``(best, x, y)``.
    """
    t = np.linspace(0.0, 2 * np.pi, steps, endpoint=False)
    dirs = np.stack([np.cos(t), np.sin(t)], axis=-1)
    u = dirs / oracle_norm(kind, dirs, **kw)[:, None]
    best, arg = -np.inf, None
    for rho in ratios:
        x = np.broadcast_to(u[:, None, :], (steps, steps, 2))
        y = rho * np.broadcast_to(u[None, :, :], (steps, steps, 2))
        alpha = oracle_norm(kind, u[:, None, :] - u[None, :, :], **kw)
        beta = oracle_norm(kind, x / rho - y, **kw)
        diff = alpha - beta
        i, j = np.unravel_index(np.argmax(diff), diff.shape)
        if diff[i, j] > best:
            best, arg = float(diff[i, j]), (u[i].copy(), rho * u[j])
    return best, arg[0], arg[1]


def l1_fraction(v):
    return sum(abs(c) for c in v)


def frac_vec(*vals):
    return [Fraction(v) for v in vals]


def random_spd(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return a @ a.T + n * np.eye(n)


@pytest.fixture
def spd3():
    return random_spd(3, 1234)


SPEC_FAMILIES = {
    "l1": Lp(1.0),
    "l1.5": Lp(1.5),
    "l2": Lp(2.0),
    "l3": Lp(3.0),
    "linf": Lp(np.inf),
}


def family_spec(name, dim):
    if name in SPEC_FAMILIES:
        return SPEC_FAMILIES[name]
    if name == "wlp2":
        return WeightedLp(2.0, tuple([1.0, 5.0] * dim)[:dim])
    if name == "gram":
        return Gram(random_spd(dim, 99 + dim))
    raise KeyError(name)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
