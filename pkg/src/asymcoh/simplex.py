"""Batched Nelder-Mead minimizer.

Many independent restarts advance in lockstep so that each simplex operation
is one vectorized objective call over all restarts that need it. Restarts
never interact: each keeps its own simplex, counters and stopping test.

The objective is called as ``fun(points, owners, iteration)`` where ``points``
has shape ``(m, n)``, ``owners`` gives the restart index of every row and
``iteration`` is the current step of those restarts. Deterministic objectives
ignore the last two arguments; noisy ones use them to pick random streams.
With ``reevaluate=True`` the whole simplex is re-evaluated at the start of
each step, so every comparison within a step sees the same random numbers.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class SimplexResult:
    x: np.ndarray  # (R, n) best point per restart
    fun: np.ndarray  # (R,) objective at x
    iterations: np.ndarray  # (R,) steps taken
    converged: np.ndarray  # (R,) stopping test met before max_iters
    evaluations: int


def nelder_mead(fun, x0, step=0.25, max_iters=2000, xatol=1e-8, fatol=1e-12, reevaluate=False):
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    R, n = x0.shape
    # adaptive coefficients (Gao & Han) behave better than the textbook ones for n > 2
    rho, chi = 1.0, 1.0 + 2.0 / n
    psi, sigma = 0.75 - 1.0 / (2 * n), 1.0 - 1.0 / n

    sim = np.repeat(x0[:, None, :], n + 1, axis=1)
    sim[:, 1:, :] += step * np.eye(n)[None]
    owners_all = np.arange(R)
    nevals = 0

    def evaluate(points, owners, its):
        nonlocal nevals
        nevals += len(points)
        if len(points) == 0:
            return np.empty(0)
        return np.asarray(fun(points, owners, its), dtype=float)

    fsim = evaluate(sim.reshape(-1, n), np.repeat(owners_all, n + 1), np.zeros(R * (n + 1), int))
    fsim = fsim.reshape(R, n + 1)
    iters = np.zeros(R, dtype=int)
    done = np.zeros(R, dtype=bool)
    conv = np.zeros(R, dtype=bool)

    while True:
        spent = ~done & (iters >= max_iters)
        done[spent] = True
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        if reevaluate and np.any(iters[act] > 0):
            pts = sim[act].reshape(-1, n)
            own = np.repeat(act, n + 1)
            fsim[act] = evaluate(pts, own, np.repeat(iters[act], n + 1)).reshape(-1, n + 1)
        fa = fsim[act]
        ib = np.argmin(fa, axis=1)
        iw = np.argmax(fa, axis=1)
        rows_a = np.arange(act.size)
        f0, fworst = fa[rows_a, ib], fa[rows_a, iw]
        # second-worst value: largest after masking the worst vertex
        masked = fa.copy()
        masked[rows_a, iw] = -np.inf
        fn1 = masked.max(axis=1)
        xb = sim[act, ib]
        xworst = sim[act, iw]

        spread_x = np.max(np.abs(sim[act] - xb[:, None, :]), axis=(1, 2))
        spread_f = fworst - f0
        stop = (spread_x <= xatol) & (spread_f <= fatol)
        conv[act[stop]] = True
        out_of_budget = iters[act] >= max_iters
        finished = stop | out_of_budget
        done[act[finished]] = True
        keep_rows = ~finished
        act, ib, iw = act[keep_rows], ib[keep_rows], iw[keep_rows]
        f0, fworst, fn1 = f0[keep_rows], fworst[keep_rows], fn1[keep_rows]
        xworst = xworst[keep_rows]
        if act.size == 0:
            break

        its = iters[act]
        xbar = (sim[act].sum(axis=1) - xworst) / n
        xr = (1 + rho) * xbar - rho * xworst
        fr = evaluate(xr, act, its)

        expand = fr < f0
        accept_r = (~expand) & (fr < fn1)
        outside = (~expand) & (~accept_r) & (fr < fworst)
        inside = (~expand) & (~accept_r) & (~outside)

        xnew = xr.copy()
        fnew = fr.copy()
        cand = np.empty_like(xr)
        need = expand | outside | inside
        cand[expand] = (1 + rho * chi) * xbar[expand] - rho * chi * xworst[expand]
        cand[outside] = (1 + psi * rho) * xbar[outside] - psi * rho * xworst[outside]
        cand[inside] = (1 - psi) * xbar[inside] + psi * xworst[inside]
        fc = np.full(act.size, np.inf)
        fc[need] = evaluate(cand[need], act[need], its[need])

        take_e = expand & (fc < fr)
        xnew[take_e], fnew[take_e] = cand[take_e], fc[take_e]
        take_o = outside & (fc <= fr)
        take_i = inside & (fc < fworst)
        xnew[take_o | take_i] = cand[take_o | take_i]
        fnew[take_o | take_i] = fc[take_o | take_i]
        shrink = (outside & ~take_o) | (inside & ~take_i)

        keep = ~shrink
        sim[act[keep], iw[keep]] = xnew[keep]
        fsim[act[keep], iw[keep]] = fnew[keep]

        if np.any(shrink):
            rows = act[shrink]
            best = sim[rows, ib[shrink]][:, None, :]
            sim[rows] = best + sigma * (sim[rows] - best)
            pts = sim[rows].reshape(-1, n)
            own = np.repeat(rows, n + 1)
            fsim[rows] = evaluate(pts, own, np.repeat(iters[rows], n + 1)).reshape(-1, n + 1)
        iters[act] += 1

    # final ordering so index 0 is the best vertex
    order = np.argsort(fsim, axis=1, kind="stable")
    sim = np.take_along_axis(sim, order[:, :, None], axis=1)
    fsim = np.take_along_axis(fsim, order, axis=1)
    return SimplexResult(sim[:, 0].copy(), fsim[:, 0].copy(), iters, conv, nevals)
