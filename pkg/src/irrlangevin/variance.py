"""Asymptotic variance of ergodic averages: batch means and a Poisson oracle.

The batch-means estimator works on a single long trajectory.  The oracle
solves the stationary Poisson equation -L Phi = f - pi(f) on a 2-d grid and
evaluates sigma^2 = 2 <Phi, f - pi(f)>_pi, giving a simulation-free reference
for any irreversibility strength.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy import sparse, stats
from scipy.sparse.linalg import spsolve

from .potentials import GibbsSpec, InputError
from .sde import ReplicaFailure, SimConfig, simulate_ensemble

__all__ = ["VarianceEstimate", "ergodic_average", "batch_means_variance",
           "delta_sweep", "poisson_oracle_2d"]


@dataclass(frozen=True)
class VarianceEstimate:
    value: float
    kind: str            # "var_of_time_average" | "asymptotic_sigma2"
    t_horizon: float
    n_batches: int
    ci_halfwidth: float
    method: str          # "batch_means" | "replica_spread" | "poisson_oracle" | "graph_limit"
    delta: float
    dt: float = float("nan")
    seed: int = -1


def ergodic_average(traj, f) -> float:
    """Time average t^-1 integral of f along the path (left Riemann sum)."""
    series = traj.observable_series(f)
    if len(series) < 2:
        raise InputError("trajectory too short for a time average")
    return float(np.mean(series[:-1]))


def default_n_batches(n_samples: int) -> int:
    return max(2, min(50, int(np.sqrt(n_samples))))


def batch_means_variance(traj, f, n_batches: int = None, delta=np.nan):
    """Batch-means estimate of t * Var(time average) from one trajectory.

    Returns a pair: the estimated variance of the time average over the
    full horizon, and the implied asymptotic rate sigma^2 = t * that.
    The CI halfwidth is the usual chi-squared-based normal-theory width.
    """
    series = traj.observable_series(f)[:-1]
    n = len(series)
    if n_batches is None:
        n_batches = default_n_batches(n)
    if not (2 <= n_batches <= n // 2):
        raise InputError(f"need 2 <= n_batches <= n/2, got {n_batches} for n = {n}")
    m = n // n_batches
    used = series[: m * n_batches].reshape(n_batches, m)
    bmeans = used.mean(axis=1)
    grand = bmeans.mean()
    t_batch = m * traj.dt_effective * traj.thin
    sigma2 = t_batch * float(np.sum((bmeans - grand) ** 2)) / (n_batches - 1)
    t_total = n * traj.dt_effective * traj.thin
    var_ta = sigma2 / t_total
    tcrit = stats.t.ppf(0.975, n_batches - 1)
    rel_hw = tcrit * np.sqrt(2.0 / (n_batches - 1))
    est = VarianceEstimate(
        value=var_ta, kind="var_of_time_average", t_horizon=t_total,
        n_batches=n_batches, ci_halfwidth=var_ta * rel_hw,
        method="batch_means", delta=float(delta),
        dt=traj.dt_effective, seed=traj.seed)
    asym = dataclasses.replace(est, value=sigma2, kind="asymptotic_sigma2",
                               ci_halfwidth=sigma2 * rel_hw)
    return est, asym


def replica_variance(trajs, f, horizons, delta=np.nan):
    """Var of the time average across replicas, at several horizon prefixes.

    Each trajectory is integrated once; prefixes reuse the same path.
    Returns a list of VarianceEstimate (kind var_of_time_average) per horizon.
    """
    good = [t for t in trajs if not isinstance(t, ReplicaFailure)]
    if len(good) < 2:
        raise InputError("need at least two surviving replicas")
    dt = good[0].dt_effective * good[0].thin
    out = []
    for t_h in horizons:
        k = int(np.floor(t_h / dt + 1e-9))
        if k < 1 or k > len(good[0].times) - 1:
            raise InputError(f"horizon {t_h} outside the simulated range")
        means = np.array([np.mean(tr.observable_series(f)[:k]) for tr in good])
        v = float(np.var(means, ddof=1))
        n = len(means)
        # chi-squared CI on a sample variance
        hw = v * 1.959964 * np.sqrt(2.0 / (n - 1))
        out.append(VarianceEstimate(
            value=v, kind="var_of_time_average", t_horizon=k * dt,
            n_batches=n, ci_halfwidth=hw, method="replica_spread",
            delta=float(delta), dt=good[0].dt_effective, seed=good[0].seed))
    return out


def delta_sweep(gibbs_spec, drift_template, x0, deltas, t_final, seed,
                observable, dt_base=1e-3, thin=1, n_batches=None,
                n_replicas=1, n_jobs=1, burn_in=0.0):
    """Batch-means estimates across irreversibility strengths.

    For each delta, replicas are simulated once to the full horizon; the
    batch-means estimate is computed per replica after discarding burn_in,
    then summarized by the median (value) and the per-replica scatter (ci).
    Returns a list of (delta, VarianceEstimate var_of_time_average,
    VarianceEstimate asymptotic_sigma2).
    """
    rows = []
    for d in deltas:
        field = dataclasses.replace(drift_template, delta=float(d))
        cfg = SimConfig(gibbs_spec=gibbs_spec, drift_field=field, x0=x0,
                        t_final=t_final + burn_in, seed=seed,
                        dt_base=dt_base, thin=thin)
        trajs = simulate_ensemble(cfg, n_replicas, n_jobs)
        ests = []
        for tr in trajs:
            if isinstance(tr, ReplicaFailure):
                continue
            tcut = _discard_burn_in(tr, burn_in)
            ests.append(batch_means_variance(tcut, observable, n_batches, d))
        if not ests:
            raise RuntimeError(f"all replicas diverged at delta = {d}")
        rows.append((float(d), _summarize(ests, 0), _summarize(ests, 1)))
    return rows


def _discard_burn_in(traj, burn_in):
    if burn_in <= 0:
        return traj
    step = traj.dt_effective * traj.thin
    k = int(np.floor(burn_in / step + 1e-9))
    return dataclasses.replace(
        traj, times=traj.times[k:] - traj.times[k], states=traj.states[k:])


def _summarize(ests, which):
    vals = np.array([e[which].value for e in ests])
    med = float(np.median(vals))
    proto = ests[0][which]
    if len(vals) > 1:
        hw = 1.959964 * float(np.std(vals, ddof=1)) / np.sqrt(len(vals))
    else:
        hw = proto.ci_halfwidth
    return dataclasses.replace(proto, value=med, ci_halfwidth=hw)


# ---------------------------------------------------------------------------
# 2-d Poisson oracle
# ---------------------------------------------------------------------------

def poisson_oracle_2d(gibbs_spec: GibbsSpec, drift_field, observable,
                      box: float = 2.5, grid_n: int = 256,
                      richardson: bool = False, scheme: str = "central"):
    """sigma^2 from the stationary Poisson equation on a cell-centered grid.

    Discretizes L = (-grad U + delta C) . grad + beta Laplacian with central
    differences and zero-flux ghosts; scheme="upwind" switches the
    irreversible advection to first-order upwinding (stable for any cell
    Peclet number but with O(delta h) artificial diffusion, so central is the
    default for quantitative use).  The singular system (constants in the
    kernel) is closed with a bordered row pinning the pi-average of Phi.
    With richardson=True the solve is repeated at half resolution and flagged
    if the two values differ by more than 5 percent.
    """
    scen = gibbs_spec.scenario
    beta = gibbs_spec.beta
    delta = drift_field.delta

    n = grid_n
    h = 2.0 * box / n
    ax1 = -box + (np.arange(n) + 0.5) * h
    X, Y = np.meshgrid(ax1, ax1, indexing="ij")
    gx, gy = scen.grad_u(X, Y)
    gx = np.broadcast_to(np.asarray(gx, dtype=float), X.shape)
    gy = np.broadcast_to(np.asarray(gy, dtype=float), X.shape)
    cx, cy = drift_field.c(X, Y)

    w = np.exp(-scen.u(X, Y) / beta)
    pi = (w / w.sum()).ravel()
    fv = np.asarray(observable(X, Y), dtype=float)
    fc = (fv - float(np.sum(fv.ravel() * pi))).ravel()

    N = n * n
    # stencil weights per offset; offsets in flat index: +-n (x), +-1 (y)
    c_xp = np.zeros((n, n))   # coefficient multiplying Phi(i+1, j)
    c_xm = np.zeros((n, n))
    c_yp = np.zeros((n, n))
    c_ym = np.zeros((n, n))
    c_00 = np.zeros((n, n))

    has_xp = np.zeros((n, n), dtype=bool)
    has_xp[:-1, :] = True
    has_xm = np.zeros((n, n), dtype=bool)
    has_xm[1:, :] = True
    has_yp = np.zeros((n, n), dtype=bool)
    has_yp[:, :-1] = True
    has_ym = np.zeros((n, n), dtype=bool)
    has_ym[:, 1:] = True

    # diffusion, reflecting ghosts: a missing neighbor contributes nothing
    d = beta / h**2
    for hm, arr in ((has_xp, c_xp), (has_xm, c_xm), (has_yp, c_yp), (has_ym, c_ym)):
        arr += d * hm
        c_00 -= d * hm

    def advect(v, has_p, has_m, c_p, c_m, upwind):
        """Add v * d/d(axis); central inside, one-sided at walls or upwind."""
        nonlocal c_00
        interior = has_p & has_m
        if upwind:
            pos = (v >= 0) & has_m
            neg = (v < 0) & has_p
            c_m[pos] += -v[pos] / h
            c_00 += np.where(pos, v / h, 0.0)
            c_p[neg] += v[neg] / h
            c_00 += np.where(neg, -v / h, 0.0)
            # wall cells with the wind blowing outward: one-sided inward
            rest = ~pos & ~neg
            c_p[rest & has_p] += v[rest & has_p] / h
            c_00 += np.where(rest & has_p, -v / h, 0.0)
            c_m[rest & has_m & ~has_p] += -v[rest & has_m & ~has_p] / h
            c_00 += np.where(rest & has_m & ~has_p, v / h, 0.0)
        else:
            c_p[interior] += v[interior] / (2 * h)
            c_m[interior] += -v[interior] / (2 * h)
            lo = has_p & ~has_m
            hi = has_m & ~has_p
            c_p[lo] += v[lo] / h
            c_00 += np.where(lo, -v / h, 0.0)
            c_m[hi] += -v[hi] / h
            c_00 += np.where(hi, v / h, 0.0)

    advect(-gx, has_xp, has_xm, c_xp, c_xm, upwind=False)
    advect(-gy, has_yp, has_ym, c_yp, c_ym, upwind=False)
    if delta != 0.0:
        if scheme not in ("central", "upwind"):
            raise InputError(f"unknown scheme {scheme!r}")
        up = scheme == "upwind"
        advect(delta * cx, has_xp, has_xm, c_xp, c_xm, upwind=up)
        advect(delta * cy, has_yp, has_ym, c_yp, c_ym, upwind=up)

    rows, cols, vals = [], [], []
    flat = np.arange(N).reshape(n, n)
    for arr, hm, off in ((c_xp, has_xp, n), (c_xm, has_xm, -n),
                         (c_yp, has_yp, 1), (c_ym, has_ym, -1)):
        r = flat[hm]
        rows.append(r)
        cols.append(r + off)
        vals.append(arr[hm])
    rows.append(flat.ravel())
    cols.append(flat.ravel())
    vals.append(c_00.ravel())
    L = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(N, N))

    A = sparse.bmat([[L, pi.reshape(-1, 1)], [pi.reshape(1, -1), None]],
                    format="csc")
    rhs = np.concatenate([-fc, [0.0]])
    phi = spsolve(A, rhs)[:N]
    sigma2 = 2.0 * float(np.sum(phi * fc * pi))

    est = VarianceEstimate(
        value=sigma2, kind="asymptotic_sigma2", t_horizon=np.inf, n_batches=0,
        ci_halfwidth=0.0, method="poisson_oracle", delta=float(delta))
    if richardson:
        coarse = poisson_oracle_2d(gibbs_spec, drift_field, observable,
                                   box, grid_n // 2, richardson=False,
                                   scheme=scheme)
        drift_rel = abs(coarse.value - sigma2) / max(abs(sigma2), 1e-300)
        if drift_rel > 0.05:
            import warnings
            warnings.warn(
                f"poisson oracle not grid-converged: {drift_rel:.1%} change "
                f"from n = {grid_n // 2} to {grid_n}", stacklevel=2)
        est = dataclasses.replace(est, ci_halfwidth=abs(coarse.value - sigma2))
    return est
