"""Monte-Carlo benchmarks of accuracy scaling laws and walk growth.

Every trial draws from its own counter-based stream keyed by the seed, the
grid position and the trial index, so results do not depend on worker count or
scheduling order.
"""

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy import stats

from .errors import ArgumentError
from .haar import synthesize
from .interval import private_measure_interval
from .measures import WeightedMeasure, cube_space, line_space, wasserstein1_exact, wasserstein1_line
from .metric import choose_delta, private_measure_metric
from .rng import laplace, stream
from .synth import dp_synthetic_data

INTERVAL_ATOMS = 32
CUBE_ATOMS = 128
SYNTH_POOL = 1024

DEFAULT_GRIDS = {
    "interval": [2 ** k for k in range(4, 11)],
    "cube": [2 ** k for k in range(6, 13)],
    "synth": [2 ** k for k in range(8, 15)],
    "walk": [2 ** k for k in range(6, 15)],
}
DEFAULT_TRIALS = {"interval": 200, "cube": 200, "synth": 100, "walk": 500}


def trial_stream(seed, grid_index, trial):
    return stream(seed, (grid_index << 32) | trial)


def run_trials(fn, jobs, workers=1):
    """``[fn(*job) for job in jobs]``, optionally on a process pool (same order)."""
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, *zip(*jobs), chunksize=max(1, len(jobs) // (4 * workers))))
    return [fn(*job) for job in jobs]


def fit_loglog(x, y):
    """Least-squares slope of ``log y`` on ``log x``: ``(slope, intercept, stderr)``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < 2 or np.any(x <= 0) or np.any(y <= 0):
        raise ArgumentError("log-log fit needs at least two positive points")
    res = stats.linregress(np.log(x), np.log(y))
    return float(res.slope), float(res.intercept), float(res.stderr)


def log_rate(alpha, d=1):
    """``(log^{3/2} alpha / alpha)^{1/d}``."""
    return (math.log(alpha) ** 1.5 / alpha) ** (1.0 / d)


def interval_trial(seed, gi, t, alpha):
    rng = trial_stream(seed, gi, t)
    x = np.sort(rng.random(INTERVAL_ATOMS))
    w = rng.dirichlet(np.ones(INTERVAL_ATOMS))
    mu = WeightedMeasure(line_space(x), np.arange(INTERVAL_ATOMS), w)
    res = private_measure_interval(mu, alpha, rng)
    return wasserstein1_line(mu.lift(res.net.space), res.output)


def cube_trial(seed, gi, t, alpha, d, delta=None):
    rng = trial_stream(seed, gi, t)
    space = cube_space(rng.random((CUBE_ATOMS, d)))
    mu = WeightedMeasure(space, np.arange(CUBE_ATOMS), rng.dirichlet(np.ones(CUBE_ATOMS)))
    if delta is None:
        delta = choose_delta("cube", alpha, d=d)
    res = private_measure_metric(mu, alpha, delta, rng)
    return wasserstein1_exact(mu.lift(res.net.space), res.output)


def synth_trial(seed, gi, t, n, d, epsilon, delta=None):
    """Dataset of ``n`` draws from a fixed pool of uniform points; returns W1(mu_Y, mu_X)."""
    rng = trial_stream(seed, gi, t)
    space = cube_space(rng.random((SYNTH_POOL, d)))
    data = rng.integers(0, SYNTH_POOL, n)
    synth = dp_synthetic_data(space, data, epsilon, delta=delta, rng=rng)
    mu_x = WeightedMeasure.empirical(synth.space, data)
    return wasserstein1_exact(mu_x, synth.measure())


def walk_trial(seed, gi, t, L):
    """``max_k |S_k|`` of the superregular walk and of an i.i.d. Laplace(L+2) walk."""
    rng = trial_stream(seed, gi, t)
    n = 1 << L
    z = synthesize(laplace(rng, L + 2.0, n))
    iid = laplace(rng, L + 2.0, n)
    return float(np.abs(np.cumsum(z)).max()), float(np.abs(np.cumsum(iid)).max())


def _summary(values):
    v = np.asarray(values, dtype=np.float64)
    std = float(v.std(ddof=1)) if len(v) > 1 else 0.0
    return float(v.mean()), std, std / math.sqrt(len(v))


def bench_accuracy(mode, grid=None, trials=None, seed=0, d=2, epsilon=1.0, workers=1):
    """Mean W1 error over a grid of alpha (interval, cube) or n (synth).

    Rows carry the mean, spread, the scaling-law rate and the fitted constant
    ``c_hat = mean / rate``, and a reference curve ``c (1/alpha)^{1/d}`` with
    ``c`` the fitted ``c_hat`` at the largest grid value.
    """
    if mode not in ("interval", "cube", "synth"):
        raise ArgumentError(f"unknown mode {mode!r}")
    grid = sorted(grid or DEFAULT_GRIDS[mode])
    trials = trials or DEFAULT_TRIALS[mode]
    if trials < 1:
        raise ArgumentError("trials must be positive")
    dim = 1 if mode == "interval" else d
    jobs = []
    for gi, p in enumerate(grid):
        for t in range(trials):
            if mode == "interval":
                jobs.append((interval_trial, seed, gi, t, p))
            elif mode == "cube":
                jobs.append((cube_trial, seed, gi, t, p, d))
            else:
                jobs.append((synth_trial, seed, gi, t, p, d, epsilon))
    values = run_trials(_call, [(j,) for j in jobs], workers)
    rows = []
    for gi, p in enumerate(grid):
        mean, std, sem = _summary(values[gi * trials:(gi + 1) * trials])
        alpha = p * epsilon if mode == "synth" else p
        rate = log_rate(alpha, dim)
        rows.append({"param": p, "alpha": alpha, "trials": trials, "mean_w1": mean,
                     "std": std, "sem": sem, "ci95_low": mean - 1.96 * sem,
                     "ci95_high": mean + 1.96 * sem, "rate": rate, "c_hat": mean / rate})
    report = {"mode": mode, "dim": dim, "seed": seed, "rows": rows}
    if len(grid) >= 2:
        slope, intercept, stderr = fit_loglog(grid, [r["mean_w1"] for r in rows])
        report.update(slope=slope, intercept=intercept, slope_stderr=stderr)
    c_hat = np.array([r["c_hat"] for r in rows])
    centre = 0.5 * (c_hat.max() + c_hat.min())
    report["c_hat_center"] = float(centre)
    report["c_hat_spread"] = float((c_hat.max() - c_hat.min()) / (2 * centre))
    # lower reference c (1/alpha)^{1/d} with c the envelope constant at the largest alpha
    c_ref = rows[-1]["c_hat"]
    for r in rows:
        r["reference"] = c_ref * r["alpha"] ** (-1.0 / dim)
    report["reference_ok"] = all(r["mean_w1"] >= r["reference"] * (1 - 1e-12) for r in rows)
    return report


def _call(job):
    fn, *args = job
    return fn(*args)


def bench_walk(grid=None, trials=None, seed=0, workers=1):
    """Growth of ``E max_k |S_k|`` for the superregular and the i.i.d. walk."""
    grid = sorted(grid or DEFAULT_GRIDS["walk"])
    trials = trials or DEFAULT_TRIALS["walk"]
    Ls = []
    for n in grid:
        L = int(round(math.log2(n)))
        if 1 << L != n or L < 1:
            raise ArgumentError(f"walk grid values must be powers of two >= 2, got {n}")
        Ls.append(L)
    jobs = [((walk_trial, seed, gi, t, L),) for gi, L in enumerate(Ls) for t in range(trials)]
    values = run_trials(_call, jobs, workers)
    rows = []
    for gi, n in enumerate(grid):
        chunk = np.array(values[gi * trials:(gi + 1) * trials])
        sr, sr_std, sr_sem = _summary(chunk[:, 0])
        iid, iid_std, iid_sem = _summary(chunk[:, 1])
        log2n = math.log(n) ** 2
        rows.append({"n": n, "trials": trials, "superregular": sr, "superregular_std": sr_std,
                     "superregular_sem": sr_sem, "ratio_log2": sr / log2n,
                     "ratio_log2_sem": sr_sem / log2n, "iid": iid, "iid_std": iid_std,
                     "iid_sem": iid_sem, "iid_ratio_sqrt": iid / math.sqrt(n),
                     "floor": math.log(n) / 8})
    bounded = True
    for i, a in enumerate(rows):
        for b in rows[i + 1:]:
            tol = 2 * math.hypot(a["ratio_log2_sem"], b["ratio_log2_sem"])
            if b["ratio_log2"] > a["ratio_log2"] + tol:
                bounded = False
    growth_sr = rows[-1]["superregular"] / rows[0]["superregular"]
    growth_iid = rows[-1]["iid"] / rows[0]["iid"]
    return {
        "seed": seed,
        "rows": rows,
        "bounded": bounded,
        "growth_superregular": growth_sr,
        "growth_iid": growth_iid,
        "growth_ratio": growth_iid / growth_sr,
        "floor_ok": all(r["superregular"] >= r["floor"] - 2 * r["superregular_sem"] for r in rows),
    }
