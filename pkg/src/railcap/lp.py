"""Dense revised simplex for packing LPs: max c.x s.t. A x <= b, x >= 0, b >= 0.

With ``b >= 0`` the all-slack basis is feasible, so no phase one is needed.
Pricing is Dantzig's rule until a run of degenerate pivots, after which
Bland's rule takes over for the rest of the solve to rule out cycling.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from railcap.errors import NumericalFailure

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-11
DEGENERATE_RUN = 50


@dataclass
class LPResult:
    x: np.ndarray
    duals: np.ndarray
    objective: float
    iterations: int
    basis: list[int]


def solve_packing_lp(
    c: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    tol: float = 1e-8,
    max_iter: int | None = None,
) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise ValueError("right-hand side must be non-negative")
    if n == 0:
        return LPResult(np.zeros(0), np.zeros(m), 0.0, 0, list(range(m)))

    # row scaling keeps share rows (coefficient 1) and seat rows (coefficient d_k) comparable
    scale = np.abs(A).max(axis=1)
    scale[scale == 0] = 1.0
    As = A / scale[:, None]
    bs = b / scale
    M = np.hstack([As, np.eye(m)])
    cc = np.concatenate([c, np.zeros(m)])
    cscale = max(1.0, float(np.abs(c).max()))
    dtol = tol * cscale

    basis = list(range(n, n + m))
    if max_iter is None:
        max_iter = 50 * (m + n) + 100
    bland = False
    degenerate = 0
    for it in range(max_iter):
        B = M[:, basis]
        xB = np.linalg.solve(B, bs)
        y = np.linalg.solve(B.T, cc[basis])
        d = cc - y @ M
        d[basis] = 0.0
        improving = np.flatnonzero(d > dtol)
        if improving.size == 0:
            return _finish(c, A, b, As, bs, scale, M, cc, basis, xB, y, d, tol, dtol, it)
        j = int(improving[0]) if bland else int(improving[np.argmax(d[improving])])

        u = np.linalg.solve(B, M[:, j])
        rows = np.flatnonzero(u > PIVOT_TOL)
        if rows.size == 0:
            raise NumericalFailure("LP reported unbounded; packing LP must be bounded")
        ratios = np.maximum(xB[rows], 0.0) / u[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, best)]
        leave = min(ties, key=lambda r: basis[r])
        if best <= 1e-12:
            degenerate += 1
            if degenerate >= DEGENERATE_RUN and not bland:
                log.debug("switching to Bland's rule after %d degenerate pivots", degenerate)
                bland = True
        else:
            degenerate = 0
        basis[leave] = j
    raise NumericalFailure(f"simplex did not converge within {max_iter} iterations")


def _finish(c, A, b, As, bs, scale, M, cc, basis, xB, y, d, tol, dtol, iterations) -> LPResult:
    m, n = A.shape
    feas_tol = tol * max(1.0, float(np.abs(bs).max()))
    if np.any(xB < -feas_tol):
        raise NumericalFailure(f"basic solution infeasible (min {xB.min():.3e})")
    full = np.zeros(n + m)
    full[basis] = np.maximum(xB, 0.0)
    x = full[:n]

    # slack reduced cost is -y_i; optimality already requires it <= dtol
    if np.any(y < -dtol):
        raise NumericalFailure("negative dual price at termination")
    ys = np.maximum(y, 0.0)
    slack = bs - As @ x
    if np.any(slack < -feas_tol):
        raise NumericalFailure("primal solution violates a constraint")
    if np.any(np.abs(ys * slack) > dtol * max(1.0, float(bs.max()))):
        raise NumericalFailure("complementary slackness violated (rows)")
    if np.any(np.abs(x * d[:n]) > dtol * max(1.0, float(x.max(initial=0.0)))):
        raise NumericalFailure("complementary slackness violated (columns)")
    primal = float(c @ x)
    dual = float(bs @ ys)
    if abs(primal - dual) > 1e-7 * max(1.0, abs(primal)):
        raise NumericalFailure(f"duality gap {primal - dual:.3e} at termination")
    return LPResult(x, ys / scale, primal, iterations, list(basis))
