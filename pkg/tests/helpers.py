"""Shared oracles and generators for the test suite.

Finite-difference oracles here deliberately avoid the jet machinery so
they stay independent of the code under test.
"""

import numpy as np

from walkergeo.exprlang import evaluate, parse


def eval_expr(src, point):
    """Plain float evaluation of an expression string at a point."""
    env = dict(zip("uvxy", (float(t) for t in point)))
    return evaluate(parse(src) if isinstance(src, str) else src, env)


def random_point(rng, lo=-1.0, hi=1.0):
    if hasattr(rng, "integers"):  # numpy Generator
        return tuple(rng.uniform(lo, hi, size=4))
    return tuple(rng.uniform(lo, hi) for _ in range(4))


def random_poly_expr(rng, max_terms=3, max_degree=3):
    """Random small polynomial over u, v, x, y as an expression string."""
    parts = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        coef = rng.uniform(-1.5, 1.5)
        exps = [0, 0, 0, 0]
        for _ in range(int(rng.integers(0, max_degree + 1))):
            exps[int(rng.integers(0, 4))] += 1
        term = "{:.6f}".format(coef)
        for name, e in zip("uvxy", exps):
            if e == 1:
                term += "*{}".format(name)
            elif e > 1:
                term += "*{}^{}".format(name, e)
        parts.append(term)
    return " + ".join(parts)


def fd_partial(f, point, alpha, h):
    """Nested central differences for the mixed partial given by alpha."""
    todo = [i for i, k in enumerate(alpha) for _ in range(k)]

    def rec(p, vs):
        if not vs:
            return f(p)
        v, rest = vs[0], vs[1:]
        hi = list(p)
        lo = list(p)
        hi[v] += h
        lo[v] -= h
        return (rec(hi, rest) - rec(lo, rest)) / (2.0 * h)

    return rec(list(point), todo)


def fd_partial_richardson(f, point, alpha, h=1e-4):
    """One Richardson extrapolation step on the central-difference stencil."""
    coarse = fd_partial(f, point, alpha, h)
    fine = fd_partial(f, point, alpha, h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def fd_matrix_partial(gfun, point, k, h=1e-4):
    """d_k of a matrix-valued function, Richardson-extrapolated."""

    def shift(p, dk):
        q = list(p)
        q[k] += dk
        return q

    coarse = (gfun(shift(point, h)) - gfun(shift(point, -h))) / (2.0 * h)
    fine = (gfun(shift(point, h / 2)) - gfun(shift(point, -h / 2))) / h
    return (4.0 * fine - coarse) / 3.0


def fd_christoffel(gfun, point, h=1e-4):
    """Connection coefficients from finite differences of metric values.

    gfun(point) must return the 4x4 metric value matrix as a numpy array.
    """
    g0 = gfun(list(point))
    ginv = np.linalg.inv(g0)
    dg = np.array([fd_matrix_partial(gfun, point, k, h) for k in range(4)])
    gam = np.zeros((4, 4, 4))
    for a in range(4):
        for b in range(4):
            for c in range(4):
                s = 0.0
                for d in range(4):
                    s += ginv[a, d] * (dg[b, d, c] + dg[c, d, b] - dg[d, b, c])
                gam[a, b, c] = 0.5 * s
    return gam


def walker_g_values(a_src, b_src, c_src, point, omega_src=None):
    """Metric value matrix straight from the defining block layout."""
    av = eval_expr(a_src, point)
    bv = eval_expr(b_src, point)
    cv = eval_expr(c_src, point)
    g = np.array([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [1.0, 0.0, av, cv],
        [0.0, 1.0, cv, bv],
    ])
    if omega_src is not None:
        g = g * eval_expr(omega_src, point) ** 2
    return g
