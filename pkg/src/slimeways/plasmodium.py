"""Particle-based virtual plasmodium on a habitat lattice.

The collective is a population of identical particles on a discrete
lattice coupled to a diffusive chemoattractant field.  Each scheduler
step runs, in order: a sensory stage (heading updates from three offset
sensors), a motor stage (forward movement with collision-blocked
deposition), synchronous diffusion with damping, projection of nutrient
stimuli at city cells, and a periodic growth/shrinkage adaptation pass.

Per-particle stages iterate in a fresh random permutation each time.
All randomness comes from a single numpy PCG64 generator seeded per run
(seed = base_seed XOR run_index), so runs replay exactly.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .citymap import HABITABLE, HabitatMap, Scenario

DIGEST_PREFIX = b"slimeways-state-v1"

# Digest of the empty state: zero particles on an all-zero 1x1 chemo
# lattice.  Pinned so any change to the hashing scheme is caught.
EMPTY_STATE_DIGEST = (
    "1c2dbaf4dbf2148c670ba9d70ca2f3a7d526f46db681eef7668d8f17bb85da2a"
)


@dataclass
class SimState:
    """Mutable simulation state for one run.

    Particle arrays are allocated to `capacity` (the habitable cell
    count, a hard population ceiling); the first `n` entries are live.
    `occupancy[y, x]` holds particle index + 1, or 0 when empty.
    """

    n: int
    px: np.ndarray          # float64 (capacity,) continuous x
    py: np.ndarray          # float64 (capacity,) continuous y
    heading: np.ndarray     # float64 (capacity,) degrees in [0, 360)
    cellx: np.ndarray       # int32 (capacity,)
    celly: np.ndarray       # int32 (capacity,)
    moved: np.ndarray       # bool (capacity,) last motor stage succeeded
    chemo: np.ndarray       # float64 (height, width)
    occupancy: np.ndarray   # int32 (height, width)
    step: int
    rng: np.random.Generator
    seed: int

    @property
    def capacity(self) -> int:
        return self.px.shape[0]


def _habitable_mask(habitat: HabitatMap) -> np.ndarray:
    return habitat.cells == HABITABLE


def init_population(scenario: Scenario, seed: int) -> SimState:
    """Uniform random placement on distinct habitable cells.

    Places floor(coverage * habitable_count) particles with headings
    uniform in [0, 360); the chemoattractant lattice starts at zero.
    """
    habitat = scenario.habitat
    mask = _habitable_mask(habitat)
    hab_idx = np.flatnonzero(mask.ravel())
    capacity = hab_idx.size
    count = int(scenario.coverage * capacity)
    if count < 1:
        raise ValueError(
            f"coverage {scenario.coverage} on {capacity} habitable cells "
            "yields zero particles"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    chosen = rng.choice(hab_idx, size=count, replace=False)
    ys, xs = np.divmod(chosen, habitat.width)

    px = np.zeros(capacity)
    py = np.zeros(capacity)
    heading = np.zeros(capacity)
    cellx = np.zeros(capacity, dtype=np.int32)
    celly = np.zeros(capacity, dtype=np.int32)
    moved = np.zeros(capacity, dtype=np.bool_)
    px[:count] = xs
    py[:count] = ys
    cellx[:count] = xs
    celly[:count] = ys
    heading[:count] = rng.random(count) * 360.0

    occupancy = np.zeros(habitat.cells.shape, dtype=np.int32)
    occupancy[ys, xs] = np.arange(1, count + 1, dtype=np.int32)

    return SimState(
        n=count,
        px=px,
        py=py,
        heading=heading,
        cellx=cellx,
        celly=celly,
        moved=moved,
        chemo=np.zeros(habitat.cells.shape),
        occupancy=occupancy,
        step=0,
        rng=rng,
        seed=seed,
    )


def decide_heading(f: float, fl: float, fr: float, heading: float, ra: float) -> float:
    """Single-particle steering rule, applied in this order:

    1. front strictly strongest -> keep
    2. front strictly weakest   -> rotate by RA toward the larger side
    3. left sensor weaker       -> rotate right (toward FR) by RA
    4. right sensor weaker      -> rotate left (toward FL) by RA
    5. otherwise                -> keep

    FL is sampled at heading - SA and FR at heading + SA, so "right"
    means + RA.
    """
    if f > fl and f > fr:
        return heading % 360.0
    if f < fl and f < fr:
        if fr > fl:
            return (heading + ra) % 360.0
        if fl > fr:
            return (heading - ra) % 360.0
        return heading % 360.0
    if fl < fr:
        return (heading + ra) % 360.0
    if fr < fl:
        return (heading - ra) % 360.0
    return heading % 360.0


@njit(cache=True)
def _round_cell(v):
    return int(np.floor(v + 0.5))


@njit(cache=True)
def _sample(chemo, habitat, x, y):
    h, w = chemo.shape
    if x < 0 or y < 0 or x >= w or y >= h:
        return 0.0
    if habitat[y, x] != 1:
        return 0.0
    return chemo[y, x]


@njit(cache=True)
def _sensory_kernel(order, px, py, heading, chemo, habitat, so, sa, ra):
    for k in range(order.shape[0]):
        i = order[k]
        h = heading[i]
        rad = h * np.pi / 180.0
        rad_l = (h - sa) * np.pi / 180.0
        rad_r = (h + sa) * np.pi / 180.0
        f = _sample(chemo, habitat,
                    _round_cell(px[i] + so * np.cos(rad)),
                    _round_cell(py[i] + so * np.sin(rad)))
        fl = _sample(chemo, habitat,
                     _round_cell(px[i] + so * np.cos(rad_l)),
                     _round_cell(py[i] + so * np.sin(rad_l)))
        fr = _sample(chemo, habitat,
                     _round_cell(px[i] + so * np.cos(rad_r)),
                     _round_cell(py[i] + so * np.sin(rad_r)))
        if f > fl and f > fr:
            pass
        elif f < fl and f < fr:
            if fr > fl:
                h = h + ra
            elif fl > fr:
                h = h - ra
        elif fl < fr:
            h = h + ra
        elif fr < fl:
            h = h - ra
        heading[i] = h % 360.0


@njit(cache=True)
def _motor_kernel(order, px, py, heading, cellx, celly, moved,
                  chemo, occupancy, habitat, rand_headings, deposit):
    hgt, wdt = chemo.shape
    for k in range(order.shape[0]):
        i = order[k]
        rad = heading[i] * np.pi / 180.0
        nx = px[i] + np.cos(rad)
        ny = py[i] + np.sin(rad)
        tx = _round_cell(nx)
        ty = _round_cell(ny)
        ok = False
        if 0 <= tx < wdt and 0 <= ty < hgt and habitat[ty, tx] == 1:
            occ = occupancy[ty, tx]
            if occ == 0 or occ == i + 1:
                ok = True
        if ok:
            occupancy[celly[i], cellx[i]] = 0
            occupancy[ty, tx] = i + 1
            px[i] = nx
            py[i] = ny
            cellx[i] = tx
            celly[i] = ty
            chemo[ty, tx] += deposit
            moved[i] = True
        else:
            heading[i] = rand_headings[k] * 360.0
            moved[i] = False


@njit(cache=True)
def _count_window(occupancy, cx, cy, half):
    hgt, wdt = occupancy.shape
    c = 0
    for y in range(cy - half, cy + half + 1):
        if y < 0 or y >= hgt:
            continue
        for x in range(cx - half, cx + half + 1):
            if x < 0 or x >= wdt:
                continue
            if occupancy[y, x] != 0:
                c += 1
    return c


@njit(cache=True)
def _growth_kernel(order, n, px, py, heading, cellx, celly, moved, alive,
                   occupancy, habitat, growth_half, growth_min, growth_max,
                   rand_pairs):
    hgt, wdt = occupancy.shape
    new_n = n
    capacity = px.shape[0]
    for k in range(order.shape[0]):
        i = order[k]
        if not alive[i]:
            continue
        if not moved[i]:
            continue
        cnt = _count_window(occupancy, cellx[i], celly[i], growth_half) - 1
        if cnt < growth_min or cnt > growth_max:
            continue
        # collect vacant habitable cells in the immediate 3x3 ring
        vac_x = np.empty(8, dtype=np.int32)
        vac_y = np.empty(8, dtype=np.int32)
        nv = 0
        for dy in range(-1, 2):
            for dx in range(-1, 2):
                if dx == 0 and dy == 0:
                    continue
                x = cellx[i] + dx
                y = celly[i] + dy
                if 0 <= x < wdt and 0 <= y < hgt and habitat[y, x] == 1 and occupancy[y, x] == 0:
                    vac_x[nv] = x
                    vac_y[nv] = y
                    nv += 1
        if nv == 0 or new_n >= capacity:
            continue
        pick = int(rand_pairs[k, 0] * nv)
        if pick >= nv:
            pick = nv - 1
        j = new_n
        px[j] = float(vac_x[pick])
        py[j] = float(vac_y[pick])
        cellx[j] = vac_x[pick]
        celly[j] = vac_y[pick]
        heading[j] = rand_pairs[k, 1] * 360.0
        moved[j] = False
        alive[j] = True
        occupancy[vac_y[pick], vac_x[pick]] = j + 1
        new_n += 1
    return new_n


@njit(cache=True)
def _shrink_kernel(order, alive, cellx, celly, occupancy,
                   shrink_half, shrink_max, includes_self):
    for k in range(order.shape[0]):
        i = order[k]
        if not alive[i]:
            continue
        cnt = _count_window(occupancy, cellx[i], celly[i], shrink_half)
        if not includes_self:
            cnt -= 1
        if cnt > shrink_max:
            alive[i] = False
            occupancy[celly[i], cellx[i]] = 0


def diffuse(state: SimState, scenario: Scenario) -> None:
    """Synchronous 3x3 mean filter with damping.

    Every habitable cell becomes damping * (sum of its 3x3 neighbourhood
    / 9), where out-of-lattice and non-habitable neighbours contribute
    zero; non-habitable cells stay at zero.
    """
    chemo = state.chemo
    padded = np.zeros((chemo.shape[0] + 2, chemo.shape[1] + 2))
    padded[1:-1, 1:-1] = chemo
    acc = np.zeros_like(chemo)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            acc += padded[dy : dy + chemo.shape[0], dx : dx + chemo.shape[1]]
    acc *= scenario.params.damping / 9.0
    acc[~_habitable_mask(scenario.habitat)] = 0.0
    state.chemo = acc


def project_stimuli(state: SimState, scenario: Scenario) -> None:
    """Pin each city centre cell at the scenario's nutrient level."""
    level = scenario.nutrient_value
    for _, x, y in scenario.cities.cities:
        state.chemo[y, x] = level


def adapt_population(state: SimState, scenario: Scenario) -> None:
    """Growth then shrinkage pass, each over a fresh random permutation
    of the particles that existed when the pass began.

    Growth: a particle that moved last motor stage and counts
    growth_min..growth_max neighbours in its growth window (excluding
    itself) divides into a uniformly chosen vacant habitable cell of its
    3x3 neighbourhood.  Newly spawned particles do not act until the
    next scheduler step.

    Shrinkage: a particle whose shrink window census exceeds shrink_max
    is annihilated (with the default include-self counting this fires
    only when the full window is occupied).
    """
    p = scenario.params
    habitat = scenario.habitat.cells
    n0 = state.n
    alive = np.zeros(state.capacity, dtype=np.bool_)
    alive[:n0] = True

    order = state.rng.permutation(n0)
    rand_pairs = state.rng.random((n0, 2))
    new_n = _growth_kernel(
        order, n0, state.px, state.py, state.heading, state.cellx, state.celly,
        state.moved, alive, state.occupancy, habitat,
        p.growth_window // 2, p.growth_min, p.growth_max, rand_pairs,
    )

    order2 = state.rng.permutation(n0)
    _shrink_kernel(
        order2, alive, state.cellx, state.celly, state.occupancy,
        p.shrink_window // 2, p.shrink_max, p.shrink_count_includes_self,
    )

    _compact(state, alive, new_n)


def _compact(state: SimState, alive: np.ndarray, n_total: int) -> None:
    keep = np.flatnonzero(alive[:n_total])
    m = keep.size
    for arr in (state.px, state.py, state.heading, state.cellx, state.celly, state.moved):
        arr[:m] = arr[keep]
    state.occupancy[:] = 0
    state.occupancy[state.celly[:m], state.cellx[:m]] = np.arange(1, m + 1, dtype=np.int32)
    state.n = m


def sensory_stage(state: SimState, scenario: Scenario) -> None:
    p = scenario.params
    order = state.rng.permutation(state.n)
    _sensory_kernel(
        order, state.px, state.py, state.heading, state.chemo,
        scenario.habitat.cells, p.sensor_offset, p.sensor_angle, p.rotation_angle,
    )


def motor_stage(state: SimState, scenario: Scenario) -> None:
    order = state.rng.permutation(state.n)
    rand_headings = state.rng.random(state.n)
    _motor_kernel(
        order, state.px, state.py, state.heading, state.cellx, state.celly,
        state.moved, state.chemo, state.occupancy, scenario.habitat.cells,
        rand_headings, scenario.params.deposit,
    )


def step(state: SimState, scenario: Scenario) -> SimState:
    """One scheduler step: sense, move, diffuse, project, adapt-when-due."""
    sensory_stage(state, scenario)
    motor_stage(state, scenario)
    diffuse(state, scenario)
    project_stimuli(state, scenario)
    state.step += 1
    if state.step % scenario.params.adaptation_interval == 0:
        adapt_population(state, scenario)
    return state


def state_digest(state: SimState) -> str:
    """Stable hex digest of the particle multiset and chemo lattice.

    Particle rows are sorted before hashing, so the digest is invariant
    under any permutation of the particle list.  The digest of an empty
    state (n = 0, all-zero 1x1 chemo lattice) is the documented constant
    EMPTY_STATE_DIGEST.
    """
    n = state.n
    rows = np.empty((n, 6))
    rows[:, 0] = state.cellx[:n]
    rows[:, 1] = state.celly[:n]
    rows[:, 2] = state.px[:n]
    rows[:, 3] = state.py[:n]
    rows[:, 4] = state.heading[:n]
    rows[:, 5] = state.moved[:n]
    if n:
        idx = np.lexsort(rows.T[::-1])
        rows = rows[idx]
    h = hashlib.sha256()
    h.update(DIGEST_PREFIX)
    h.update(struct.pack("<qqq", n, state.chemo.shape[0], state.chemo.shape[1]))
    h.update(np.ascontiguousarray(rows, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(state.chemo, dtype="<f8").tobytes())
    return h.hexdigest()


@dataclass
class RunResult:
    run_index: int
    seed: int
    digest: str
    final_state: SimState
    edges: "object"  # SimpleCityGraph
    snapshots: dict[int, dict[str, np.ndarray]] = field(default_factory=dict)


def run_seed(base_seed: int, run_index: int) -> int:
    """Per-run seed: base_seed XOR run_index (PCG64 input)."""
    return base_seed ^ run_index


def run(scenario: Scenario, run_index: int, dilation: int = 1,
        keep_snapshots: bool = True) -> RunResult:
    """Execute one full run of the scenario and extract its city graph."""
    from .netextract import extract_with_dilation

    if run_index >= scenario.runs:
        raise ValueError(f"run_index {run_index} >= configured runs {scenario.runs}")
    seed = run_seed(scenario.base_seed, run_index)
    state = init_population(scenario, seed)
    snapshots: dict[int, dict[str, np.ndarray]] = {}

    def snap(at):
        occ = (state.occupancy != 0).astype(np.uint8)
        snapshots[at] = {"occupancy": occ, "chemo": state.chemo.copy()}

    if keep_snapshots and 0 in scenario.snapshot_steps:
        snap(0)
    for _ in range(scenario.steps):
        step(state, scenario)
        if keep_snapshots and state.step in scenario.snapshot_steps:
            snap(state.step)

    edges = extract_with_dilation(state, scenario.cities, scenario.habitat, dilation)
    return RunResult(
        run_index=run_index,
        seed=seed,
        digest=state_digest(state),
        final_state=state,
        edges=edges,
        snapshots=snapshots,
    )
