"""Monte Carlo experiment runners.

Each runner draws random user drops in a cell, solves the power
allocation per trial, and returns a ResultTable holding tidy per-user
rows plus auxiliary summary tables.  Randomness uses one substream per
trial, seeded as [seed, trial], so results are reproducible and common
random numbers carry across parameter sweeps: every sweep point sees
the same user drops, and the first K rows of a trial's draw are the
same for every user count K.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .channel import LinkGeometry, channel_gain
from .config import ExperimentConfig
from .network import (
    AreaClass,
    assign_users,
    build_grid_scene,
    cell_radius,
    cell_throughput,
)
from .noma import UserSet
from .optimizer import (
    InfeasibleError,
    brute_force_oracle,
    maximize_min_rate,
    maximize_sum_rate,
)

__all__ = [
    "ResultTable",
    "deploy_users",
    "run_fig2",
    "run_fig3",
    "run_fig4",
    "run_maxmin_example",
    "run_network_demo",
    "run_experiment",
]

_NAN = float("nan")

#: Shared tidy schema for the per-solve tables of the sweep experiments.
SWEEP_COLUMNS = (
    "experiment", "trial", "k_users", "epsilon", "tsnr_db",
    "user_index", "rate", "sum_rate", "min_rate", "feasible",
)


@dataclass
class ResultTable:
    """One experiment's output: a main table plus named auxiliary tables.

    ``feasible_solves`` and ``infeasible_solves`` count solver outcomes
    (per trial-and-sweep-point for the sweeps, per profile for the
    fixed-gain example, per user for the network demo).  ``runtime_ms``
    is kept in memory for logging only and never written to disk, so
    identical seeds give byte-identical files.
    """

    name: str
    columns: tuple[str, ...]
    rows: list = field(default_factory=list)
    aux: dict = field(default_factory=dict)
    feasible_solves: int = 0
    infeasible_solves: int = 0
    runtime_ms: float = 0.0


def deploy_users(seed, k_users: int, radius: float) -> np.ndarray:
    """Drop k_users uniformly on a disk of the given radius.

    Returns an array of shape (k_users, 2).  The draw consumes one
    uniform pair per user in row order, so for a fixed seed the first
    k rows are identical for every k_users >= k.
    """
    rng = np.random.default_rng(seed)
    uv = rng.random((k_users, 2))
    r = radius * np.sqrt(uv[:, 0])
    theta = 2.0 * math.pi * uv[:, 1]
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def _cell_gains(cfg: ExperimentConfig, positions: np.ndarray) -> np.ndarray:
    """Channel gains from a ceiling emitter at the origin, in config units."""
    params = cfg.channel_params()
    unit = cfg.gain_unit()
    h_vap = cfg.physical.vap_height_m
    h_user = cfg.physical.user_height_m
    out = np.empty(len(positions))
    for i, (x, y) in enumerate(positions):
        geom = LinkGeometry((0.0, 0.0, h_vap), (float(x), float(y), h_user))
        out[i] = channel_gain(geom, params) / unit
    return out


def _user_radius(cfg: ExperimentConfig) -> float:
    return cell_radius(
        cfg.physical.vap_height_m,
        cfg.physical.user_height_m,
        cfg.channel_params().fov_semiangle,
    )


def _mean_var(values: list) -> tuple[float, float]:
    n = len(values)
    if n == 0:
        return _NAN, _NAN
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / n
    return mean, var


def _histogram_rows(key, values: list, width: float) -> list:
    """Fixed-width bins anchored at multiples of the width, empties included."""
    if not values:
        return []
    lo = math.floor(min(values) / width)
    hi = math.floor(max(values) / width)
    counts: dict[int, int] = {}
    for v in values:
        b = min(math.floor(v / width), hi)
        counts[b] = counts.get(b, 0) + 1
    return [(key, b * width, (b + 1) * width, counts.get(b, 0))
            for b in range(lo, hi + 1)]


def _trace_table(rows: list) -> ResultTable:
    return ResultTable(
        name="trace",
        columns=("iteration", "objective", "step", "min_rate"),
        rows=list(rows),
    )


def run_fig2(cfg: ExperimentConfig, trace: bool = False) -> ResultTable:
    """Sum-rate histogram study: random drops, transmit-SNR sweep."""
    t0 = time.perf_counter()
    noma = cfg.noma
    eps = noma.epsilon[0]
    k = noma.k_users
    targets = cfg.qos_vector(k)
    radius = _user_radius(cfg)
    budgets = {t: cfg.budget(t, eps) for t in noma.tsnr_db}

    table = ResultTable(name="fig2", columns=SWEEP_COLUMNS)
    sums: dict[float, list] = {t: [] for t in noma.tsnr_db}
    trace_rows = None
    for trial in range(cfg.trials):
        positions = deploy_users([cfg.seed, trial], k, radius)
        users = UserSet(np.sort(_cell_gains(cfg, positions)), targets)
        for tsnr in noma.tsnr_db:
            want_trace = trace and trace_rows is None
            try:
                res = maximize_sum_rate(budgets[tsnr], users, cfg.solver,
                                        trace=want_trace)
            except InfeasibleError:
                table.infeasible_solves += 1
                table.rows.append(("fig2", trial, k, eps, tsnr, 0,
                                   _NAN, _NAN, _NAN, 0))
                continue
            table.feasible_solves += 1
            if want_trace and res.trace:
                trace_rows = res.trace
            total = float(np.sum(res.rates))
            lowest = float(np.min(res.rates))
            sums[tsnr].append(total)
            for j, r in enumerate(res.rates, start=1):
                table.rows.append(("fig2", trial, k, eps, tsnr, j,
                                   float(r), total, lowest, 1))

    summary = ResultTable(
        name="summary",
        columns=("tsnr_db", "epsilon", "k_users", "trials", "feasible",
                 "infeasible", "mean_sum_rate", "var_sum_rate"),
    )
    hist = ResultTable(
        name="hist",
        columns=("tsnr_db", "bin_left", "bin_right", "count"),
    )
    for tsnr in noma.tsnr_db:
        vals = sums[tsnr]
        mean, var = _mean_var(vals)
        summary.rows.append((tsnr, eps, k, cfg.trials, len(vals),
                             cfg.trials - len(vals), mean, var))
        hist.rows.extend(_histogram_rows(tsnr, vals, cfg.report.hist_bin_width))
    table.aux["summary"] = summary
    table.aux["hist"] = hist
    if trace_rows is not None:
        table.aux["trace"] = _trace_table(trace_rows)
    table.runtime_ms = (time.perf_counter() - t0) * 1e3
    return table


def run_fig3(cfg: ExperimentConfig, trace: bool = False) -> ResultTable:
    """Sum-rate sweep over user count and residual interference level."""
    t0 = time.perf_counter()
    noma = cfg.noma
    radius = _user_radius(cfg)
    kmax = max(noma.k_sweep)

    # One drop per trial, sliced to a prefix for each user count, so the
    # sweep points share common random numbers.
    gain_draws = []
    for trial in range(cfg.trials):
        positions = deploy_users([cfg.seed, trial], kmax, radius)
        gain_draws.append(_cell_gains(cfg, positions))

    table = ResultTable(name="fig3", columns=SWEEP_COLUMNS)
    summary = ResultTable(
        name="summary",
        columns=("k_users", "epsilon", "tsnr_db", "trials", "feasible",
                 "infeasible", "mean_sum_rate", "var_sum_rate"),
    )
    trace_rows = None
    for k in noma.k_sweep:
        targets = cfg.qos_vector(k)
        user_sets = [UserSet(np.sort(draw[:k]), targets) for draw in gain_draws]
        for eps in noma.epsilon_sweep:
            for tsnr in noma.tsnr_db:
                budget = cfg.budget(tsnr, eps)
                sums: list = []
                for trial, users in enumerate(user_sets):
                    want_trace = trace and trace_rows is None
                    try:
                        res = maximize_sum_rate(budget, users, cfg.solver,
                                                trace=want_trace)
                    except InfeasibleError:
                        table.infeasible_solves += 1
                        table.rows.append(("fig3", trial, k, eps, tsnr, 0,
                                           _NAN, _NAN, _NAN, 0))
                        continue
                    table.feasible_solves += 1
                    if want_trace and res.trace:
                        trace_rows = res.trace
                    total = float(np.sum(res.rates))
                    lowest = float(np.min(res.rates))
                    sums.append(total)
                    for j, r in enumerate(res.rates, start=1):
                        table.rows.append(("fig3", trial, k, eps, tsnr, j,
                                           float(r), total, lowest, 1))
                mean, var = _mean_var(sums)
                summary.rows.append((k, eps, tsnr, cfg.trials, len(sums),
                                     cfg.trials - len(sums), mean, var))
    table.aux["summary"] = summary
    if trace_rows is not None:
        table.aux["trace"] = _trace_table(trace_rows)
    table.runtime_ms = (time.perf_counter() - t0) * 1e3
    return table


def run_fig4(cfg: ExperimentConfig, trace: bool = False) -> ResultTable:
    """Max-min rate sweep over residual interference level and transmit SNR."""
    t0 = time.perf_counter()
    noma = cfg.noma
    k = noma.k_users
    targets = cfg.qos_vector(k)
    radius = _user_radius(cfg)

    user_sets = []
    for trial in range(cfg.trials):
        positions = deploy_users([cfg.seed, trial], k, radius)
        user_sets.append(UserSet(np.sort(_cell_gains(cfg, positions)), targets))

    table = ResultTable(name="fig4", columns=SWEEP_COLUMNS)
    summary = ResultTable(
        name="summary",
        columns=("epsilon", "tsnr_db", "k_users", "trials", "feasible",
                 "infeasible", "mean_min_rate", "var_min_rate"),
    )
    trace_rows = None
    for eps in noma.epsilon_sweep:
        for tsnr in noma.tsnr_db:
            budget = cfg.budget(tsnr, eps)
            mins: list = []
            for trial, users in enumerate(user_sets):
                want_trace = trace and trace_rows is None
                try:
                    res = maximize_min_rate(budget, users, cfg.solver,
                                            trace=want_trace)
                except InfeasibleError:
                    table.infeasible_solves += 1
                    table.rows.append(("fig4", trial, k, eps, tsnr, 0,
                                       _NAN, _NAN, _NAN, 0))
                    continue
                table.feasible_solves += 1
                if want_trace and res.trace:
                    trace_rows = res.trace
                total = float(np.sum(res.rates))
                lowest = float(np.min(res.rates))
                mins.append(lowest)
                for j, r in enumerate(res.rates, start=1):
                    table.rows.append(("fig4", trial, k, eps, tsnr, j,
                                       float(r), total, lowest, 1))
            mean, var = _mean_var(mins)
            summary.rows.append((eps, tsnr, k, cfg.trials, len(mins),
                                 cfg.trials - len(mins), mean, var))
    table.aux["summary"] = summary
    if trace_rows is not None:
        table.aux["trace"] = _trace_table(trace_rows)
    table.runtime_ms = (time.perf_counter() - t0) * 1e3
    return table


def run_maxmin_example(cfg: ExperimentConfig, trace: bool = False) -> ResultTable:
    """Max-min allocation for a fixed gain triple under named QoS profiles.

    Gains in the config are quoted in normalized units; under the
    physical gain scale they are converted back to raw channel gains.
    Each profile's solver answer is cross-checked against the exhaustive
    grid oracle when the user count permits it.
    """
    t0 = time.perf_counter()
    mm = cfg.maxmin
    gains = np.array(mm.gains)
    if cfg.noma.gain_scale == "physical":
        gains = gains * 1e-4
    budget = cfg.budget(mm.tsnr_db, mm.epsilon)

    table = ResultTable(
        name="maxmin_example",
        columns=("experiment", "profile", "user_index", "gain", "target",
                 "rate", "feasible"),
    )
    summary = ResultTable(
        name="summary",
        columns=("profile", "tsnr_db", "epsilon", "min_rate", "sum_rate",
                 "oracle_min_rate", "min_gap", "iterations", "feasible"),
    )
    trace_rows = None
    for profile in mm.profiles:
        label = "-".join(f"{t:g}" for t in profile)
        users = UserSet(gains, np.array(profile))
        want_trace = trace and trace_rows is None
        try:
            res = maximize_min_rate(budget, users, cfg.solver, trace=want_trace)
        except InfeasibleError:
            table.infeasible_solves += 1
            for j, (g, t) in enumerate(zip(gains, profile), start=1):
                table.rows.append(("maxmin_example", label, j, float(g),
                                   float(t), _NAN, 0))
            summary.rows.append((label, mm.tsnr_db, mm.epsilon, _NAN, _NAN,
                                 _NAN, _NAN, 0, 0))
            continue
        table.feasible_solves += 1
        if want_trace and res.trace:
            trace_rows = res.trace
        oracle_min = _NAN
        gap = _NAN
        if users.k_users <= 4:
            try:
                oracle = brute_force_oracle(budget, users, objective="min",
                                            grid_step=mm.oracle_grid)
                oracle_min = float(np.min(oracle.rates))
                gap = float(np.min(res.rates)) - oracle_min
            except InfeasibleError:
                pass
        for j, (g, t, r) in enumerate(zip(gains, profile, res.rates), start=1):
            table.rows.append(("maxmin_example", label, j, float(g), float(t),
                               float(r), 1))
        summary.rows.append((label, mm.tsnr_db, mm.epsilon,
                             float(np.min(res.rates)), float(np.sum(res.rates)),
                             oracle_min, gap, res.iterations, 1))
    table.aux["summary"] = summary
    if trace_rows is not None:
        table.aux["trace"] = _trace_table(trace_rows)
    table.runtime_ms = (time.perf_counter() - t0) * 1e3
    return table


def run_network_demo(cfg: ExperimentConfig, trace: bool = False) -> ResultTable:
    """Multi-cell slice: drop users in the central cell, assign, and solve."""
    t0 = time.perf_counter()
    net = cfg.network
    if net.rows < 2 or net.cols < 2:
        from .config import ConfigError

        raise ConfigError("network.rows",
                          "need at least a 2x2 grid for the central-cell drop")
    budget = cfg.budget(cfg.noma.tsnr_db[0], cfg.noma.epsilon[0])
    scene = build_grid_scene(
        net.rows, net.cols, net.spacing_m,
        vap_height=cfg.physical.vap_height_m,
        user_height=cfg.physical.user_height_m,
        params=cfg.channel_params(),
        budget=budget,
        bandwidth_hz=net.bandwidth_hz,
        gain_unit=cfg.gain_unit(),
    )

    # Users fall in one full lattice square near the middle of the grid.
    a = net.spacing_m
    i0 = (net.rows - 2) // 2
    j0 = (net.cols - 2) // 2
    rng = np.random.default_rng([cfg.seed, 0])
    uv = rng.random((net.users, 2))
    positions = np.column_stack(((i0 + uv[:, 0]) * a, (j0 + uv[:, 1]) * a))

    assignments = assign_users(scene, positions, net.dedicated_fraction,
                               net.dedicated_cap)
    rates, reports = cell_throughput(scene, assignments,
                                     qos_target=net.qos_target,
                                     criterion=net.criterion,
                                     config=cfg.solver)

    table = ResultTable(
        name="network_demo",
        columns=("user_id", "x", "y", "area_class", "vap_id", "dedicated",
                 "bandwidth_hz", "rate_bps", "feasible"),
    )
    for asn in assignments:
        rate = float(rates[asn.user_id])
        served = math.isfinite(rate)
        if served:
            table.feasible_solves += 1
        else:
            table.infeasible_solves += 1
        x, y = positions[asn.user_id]
        table.rows.append((
            asn.user_id, float(x), float(y), int(asn.area_class),
            asn.vap_id if asn.vap_id is not None else -1,
            int(asn.dedicated), float(asn.bandwidth_hz),
            rate if served else _NAN, int(served),
        ))

    cells = ResultTable(
        name="cells",
        columns=("vap_id", "x", "y", "color", "shared_users",
                 "dedicated_users", "shared_bandwidth_hz",
                 "dedicated_pool_hz", "feasible", "sum_rate_bps"),
    )
    vap_by_id = {v.vap_id: v for v in scene.vaps}
    for rep in reports:
        vap = vap_by_id[rep.vap_id]
        cells.rows.append((rep.vap_id, vap.x, vap.y, vap.color,
                           rep.shared_users, rep.dedicated_users,
                           rep.shared_bandwidth_hz, rep.dedicated_pool_hz,
                           int(rep.feasible), rep.sum_rate_bps))

    classes = ResultTable(
        name="classes",
        columns=("area_class", "count", "fraction"),
    )
    counts = {cls: 0 for cls in AreaClass}
    for asn in assignments:
        counts[asn.area_class] += 1
    for cls in AreaClass:
        classes.rows.append((int(cls), counts[cls],
                             counts[cls] / len(assignments) if assignments else _NAN))

    table.aux["cells"] = cells
    table.aux["classes"] = classes
    table.runtime_ms = (time.perf_counter() - t0) * 1e3
    return table


_RUNNERS = {
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "maxmin_example": run_maxmin_example,
    "network_demo": run_network_demo,
}


def run_experiment(cfg: ExperimentConfig, trace: bool = False) -> ResultTable:
    """Dispatch to the runner named by the config."""
    try:
        runner = _RUNNERS[cfg.name]
    except KeyError:
        from .config import ConfigError

        raise ConfigError("experiment.name", f"unknown experiment {cfg.name!r}")
    return runner(cfg, trace=trace)
