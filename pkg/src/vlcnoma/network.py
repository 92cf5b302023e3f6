"""Frequency-reuse-2 interference management over a grid of optical cells.

Ceiling LEDs (VAPs) sit on a rectangular grid and are colored like a
checkerboard into two frequency bands, so adjacent cells never share a
band.  A user "sees" every VAP whose horizontal offset is inside the
coverage radius (H - z) * tan(Psi_c); the count of visible VAPs labels
the user's area class L1..L4.  Users who see exactly one VAP on some
band connect there and are interference free by construction; users
with no interference-free band (the class-L4 center region) get a
dedicated slice carved out of their strongest VAP's band instead of
joining the NOMA superposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .channel import ChannelParams, LinkGeometry, channel_gain
from .noma import LinkBudget, UserSet
from .optimizer import (
    InfeasibleError,
    SolverConfig,
    maximize_min_rate,
    maximize_sum_rate,
)

__all__ = [
    "AreaClass",
    "VapNode",
    "NetworkScene",
    "Assignment",
    "CellReport",
    "cell_radius",
    "build_grid_scene",
    "color_grid",
    "classify",
    "assign_users",
    "cell_throughput",
]


class AreaClass(IntEnum):
    """Number of visible VAPs at a user position (HOLE = none)."""

    HOLE = 0
    L1 = 1
    L2 = 2
    L3 = 3
    L4 = 4


@dataclass(frozen=True)
class VapNode:
    """One ceiling luminaire: integer id, horizontal position, band color."""

    vap_id: int
    x: float
    y: float
    color: int

    def __post_init__(self) -> None:
        if self.vap_id < 0:
            raise ValueError("vap_id must be nonnegative")
        if self.color not in (0, 1):
            raise ValueError(f"band color must be 0 or 1, got {self.color!r}")


def cell_radius(vap_height: float, user_height: float, fov_semiangle: float) -> float:
    """Horizontal coverage radius (H - z) * tan(Psi_c) of one VAP."""
    if vap_height <= user_height:
        raise ValueError(
            f"VAP height {vap_height!r} must exceed user height {user_height!r}"
        )
    if not 0.0 < fov_semiangle < math.pi / 2:
        raise ValueError(f"FOV semiangle must lie in (0, pi/2), got {fov_semiangle!r}")
    return (vap_height - user_height) * math.tan(fov_semiangle)


@dataclass(frozen=True)
class NetworkScene:
    """A colored VAP layout plus the physics shared by every link."""

    vaps: tuple[VapNode, ...]
    vap_height: float
    user_height: float
    params: ChannelParams
    budget: LinkBudget
    bandwidth_hz: float
    gain_unit: float = 1.0  # channel gains are divided by this before rate math

    def __post_init__(self) -> None:
        if not self.vaps:
            raise ValueError("scene needs at least one VAP")
        if self.bandwidth_hz <= 0.0:
            raise ValueError("bandwidth must be positive")
        if self.gain_unit <= 0.0:
            raise ValueError("gain unit must be positive")
        # validates the height ordering and FOV range
        cell_radius(self.vap_height, self.user_height, self.params.fov_semiangle)

    @property
    def radius(self) -> float:
        return cell_radius(self.vap_height, self.user_height, self.params.fov_semiangle)

    def user_gain(self, vap: VapNode, x: float, y: float) -> float:
        geom = LinkGeometry(
            (vap.x, vap.y, self.vap_height), (x, y, self.user_height)
        )
        return channel_gain(geom, self.params) / self.gain_unit


def color_grid(positions: np.ndarray, spacing: float) -> np.ndarray:
    """Checkerboard colors for VAPs on a rectangular grid.

    Positions must sit on a uniform rectangular lattice with the given
    spacing; anything else raises, since frequency reuse 2 is defined
    on the checkerboard parity (row + col) % 2.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] == 0:
        raise ValueError("positions must be a non-empty (n, 2) array")
    if spacing <= 0.0:
        raise ValueError("spacing must be positive")
    origin = pos.min(axis=0)
    idx = (pos - origin) / spacing
    rounded = np.rint(idx)
    if np.any(np.abs(idx - rounded) > 1e-6):
        raise ValueError("VAP layout is not a rectangular grid with the given spacing")
    keys = {(int(r), int(c)) for r, c in rounded}
    if len(keys) != pos.shape[0]:
        raise ValueError("VAP layout has duplicate grid positions")
    return ((rounded[:, 0] + rounded[:, 1]).astype(int)) % 2


def build_grid_scene(
    rows: int,
    cols: int,
    spacing: float,
    vap_height: float = 3.0,
    user_height: float = 0.85,
    params: ChannelParams | None = None,
    budget: LinkBudget | None = None,
    bandwidth_hz: float = 2e7,
    gain_unit: float = 1.0,
) -> NetworkScene:
    """Rectangular rows x cols VAP grid with checkerboard coloring."""
    if rows < 1 or cols < 1:
        raise ValueError("grid needs at least one row and one column")
    if spacing <= 0.0:
        raise ValueError("spacing must be positive")
    positions = np.array(
        [(r * spacing, c * spacing) for r in range(rows) for c in range(cols)]
    )
    colors = color_grid(positions, spacing)
    vaps = tuple(
        VapNode(i, float(positions[i, 0]), float(positions[i, 1]), int(colors[i]))
        for i in range(positions.shape[0])
    )
    return NetworkScene(
        vaps=vaps,
        vap_height=vap_height,
        user_height=user_height,
        params=params or ChannelParams(),
        budget=budget or LinkBudget(tsnr_db=70.0),
        bandwidth_hz=bandwidth_hz,
        gain_unit=gain_unit,
    )


def classify(scene: NetworkScene, x: float, y: float) -> tuple[AreaClass, tuple[int, ...]]:
    """Area class and visible VAP ids at a horizontal position (boundary inclusive)."""
    r = scene.radius
    visible = tuple(
        vap.vap_id
        for vap in scene.vaps
        if math.hypot(vap.x - x, vap.y - y) <= r + 1e-12
    )
    if len(visible) > 4:
        raise ValueError(
            f"{len(visible)} visible VAPs at ({x}, {y}); the reuse-2 layout "
            "supports at most 4 overlapping cells"
        )
    return AreaClass(len(visible)), visible


@dataclass(frozen=True)
class Assignment:
    """Service decision for one user (vap_id is None in a coverage hole)."""

    user_id: int
    vap_id: int | None
    area_class: AreaClass
    dedicated: bool
    gain: float
    bandwidth_hz: float


def assign_users(
    scene: NetworkScene,
    positions: np.ndarray,
    dedicated_fraction: float = 0.1,
    dedicated_cap: float = 0.5,
) -> list[Assignment]:
    """Serve users one by one in id order under the reuse-2 policy.

    A user picks among the interference-free bands of its visible set
    (bands carrying exactly one visible VAP): fewest connected users
    first, then higher channel gain, then lower VAP id.  Users without
    an interference-free band get a dedicated slice on the strongest
    visible VAP: nominally ``dedicated_fraction`` of the band per user,
    with the per-VAP pool capped at ``dedicated_cap`` of the band and
    split equally once the cap binds.  ``bandwidth_hz`` on a NOMA user
    is the width of its VAP's shared band.
    """
    if not 0.0 < dedicated_fraction <= 1.0:
        raise ValueError("dedicated_fraction must lie in (0, 1]")
    if not 0.0 < dedicated_cap <= 1.0:
        raise ValueError("dedicated_cap must lie in (0, 1]")
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise ValueError("positions must be an (n, 2) array")

    load = {vap.vap_id: 0 for vap in scene.vaps}
    n_dedicated = {vap.vap_id: 0 for vap in scene.vaps}
    by_id = {vap.vap_id: vap for vap in scene.vaps}
    picks: list[tuple[int, int | None, AreaClass, bool, float]] = []

    for uid in range(pos.shape[0]):
        x, y = float(pos[uid, 0]), float(pos[uid, 1])
        area, visible = classify(scene, x, y)
        if not visible:
            picks.append((uid, None, area, False, 0.0))
            continue
        gains = {vid: scene.user_gain(by_id[vid], x, y) for vid in visible}
        per_color: dict[int, list[int]] = {}
        for vid in visible:
            per_color.setdefault(by_id[vid].color, []).append(vid)
        free = [vids[0] for vids in per_color.values() if len(vids) == 1]
        if free:
            # load balance, then stronger link, then lower id
            choice = min(free, key=lambda vid: (load[vid], -gains[vid], vid))
            picks.append((uid, choice, area, False, gains[choice]))
        else:
            choice = min(visible, key=lambda vid: (-gains[vid], vid))
            n_dedicated[choice] += 1
            picks.append((uid, choice, area, True, gains[choice]))
        load[choice] += 1

    band = scene.bandwidth_hz
    pool = {
        vid: min(n_dedicated[vid] * dedicated_fraction * band, dedicated_cap * band)
        for vid in n_dedicated
    }
    out = []
    for uid, vid, area, dedicated, gain in picks:
        if vid is None:
            width = 0.0
        elif dedicated:
            width = pool[vid] / n_dedicated[vid]
        else:
            width = band - pool[vid]
        out.append(Assignment(uid, vid, area, dedicated, gain, width))
    return out


@dataclass(frozen=True)
class CellReport:
    """Throughput summary of one VAP's cell."""

    vap_id: int
    shared_users: int
    dedicated_users: int
    shared_bandwidth_hz: float
    dedicated_pool_hz: float
    feasible: bool
    sum_rate_bps: float


def cell_throughput(
    scene: NetworkScene,
    assignments: list[Assignment],
    qos_target: float = 0.0,
    criterion: str = "sum",
    config: SolverConfig | None = None,
) -> tuple[np.ndarray, list[CellReport]]:
    """Per-user throughput (bit/s) and per-cell reports.

    Each VAP's shared-band users form one NOMA group (gains ascending)
    solved under the chosen criterion and scaled by the shared band;
    dedicated users get their single-user capacity over their slice.
    A cell whose QoS targets are infeasible is reported as such (NaN
    user rates) without aborting the scene.
    """
    if criterion not in ("sum", "min"):
        raise ValueError(f"criterion must be 'sum' or 'min', got {criterion!r}")
    solver = maximize_sum_rate if criterion == "sum" else maximize_min_rate
    rates = np.full(len(assignments), np.nan)
    shared: dict[int, list[int]] = {}
    dedicated: dict[int, list[int]] = {}
    for i, a in enumerate(assignments):
        if a.vap_id is None:
            continue
        (dedicated if a.dedicated else shared).setdefault(a.vap_id, []).append(i)

    reports = []
    for vap in scene.vaps:
        vid = vap.vap_id
        idx_shared = shared.get(vid, [])
        idx_ded = dedicated.get(vid, [])
        if not idx_shared and not idx_ded:
            continue
        shared_bw = assignments[idx_shared[0]].bandwidth_hz if idx_shared else None
        ded_pool = sum(assignments[i].bandwidth_hz for i in idx_ded)
        if shared_bw is None:
            shared_bw = scene.bandwidth_hz - ded_pool
        feasible = True
        cell_sum = 0.0
        if idx_shared:
            order = sorted(idx_shared, key=lambda i: (assignments[i].gain, i))
            gains = np.array([assignments[i].gain for i in order])
            targets = np.full(gains.size, qos_target)
            try:
                res = solver(scene.budget, UserSet(gains, targets), config)
                for slot, i in enumerate(order):
                    rates[i] = res.rates[slot] * shared_bw
                    cell_sum += rates[i]
            except InfeasibleError:
                feasible = False
        for i in idx_ded:
            a = assignments[i]
            try:
                res = maximize_sum_rate(
                    scene.budget,
                    UserSet(np.array([a.gain]), np.array([qos_target])),
                    config,
                )
                rates[i] = res.rates[0] * a.bandwidth_hz
                cell_sum += rates[i]
            except InfeasibleError:
                feasible = False
        reports.append(
            CellReport(
                vap_id=vid,
                shared_users=len(idx_shared),
                dedicated_users=len(idx_ded),
                shared_bandwidth_hz=float(shared_bw),
                dedicated_pool_hz=float(ded_pool),
                feasible=feasible,
                sum_rate_bps=float(cell_sum),
            )
        )
    return rates, reports
