"""Solution-set analytics.

Two distances between solutions are used: a state-space distance (time
average of <f|f> for f = psi_j - psi_k along the evolution, bounded by 4)
and a control-space Manhattan distance (summed L1 time-integrals of the
bounds-rescaled controls).  A greedy nearest-unvisited ordering turns a
distance matrix into a reachability sequence whose valleys are contiguous
blocks of mutually close solutions ("clans").  An incremental triangle
construction embeds solutions into the plane for landscape rendering, and
the direct Hilbert velocity quantifies how fast the state moves toward the
back-propagated target, governing the fidelity/duration trade-off.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize

from .control import ControlPath, contract, dilate
from .errors import UndefinedHilbertVelocityError
from .optimizer import Solution, path_fidelity
from .physics import (
    ProblemConfig,
    StateTrajectory,
    TweezerBounds,
    Wavefunction,
    apply_hamiltonian,
    backpropagate_store,
    evolve,
    gaussian_well,
    kinetic_phase,
    propagate_store,
    step_phase_matrix,
    TweezerState,
)

log = logging.getLogger(__name__)

#: Default decimation of stored state trajectories used for distances.
#: Every 2nd sample keeps the trapezoid quadrature error of the state
#: distance below 1e-4 on this problem's energy scales (every 5th would
#: admit ~3e-3).
TRAJECTORY_STRIDE = 2


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric pairwise distances with the metric they were computed in."""

    values: np.ndarray
    metric: str                      # "state" | "control"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("distance matrix must be square")
        if not np.allclose(v, v.T, atol=1e-12):
            raise ValueError("distance matrix must be symmetric")
        if np.any(np.abs(np.diag(v)) > 1e-12):
            raise ValueError("distance matrix must have a zero diagonal")
        if self.metric == "state" and (v.min() < -1e-9 or v.max() > 4.0 + 1e-6):
            raise ValueError("state-metric distances must lie in [0, 4]")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _as_path(obj) -> ControlPath:
    return obj.path if isinstance(obj, Solution) else obj


def solution_trajectory(sol: Solution, cfg: ProblemConfig,
                        stride: int = TRAJECTORY_STRIDE) -> StateTrajectory:
    """The stored trajectory if compatible, otherwise a fresh simulation."""
    handle = sol.trajectory_handle
    if handle is not None and handle.stride == stride and handle.grid == cfg.grid:
        return handle
    return evolve(cfg.initial_state(), sol.path, cfg, store=stride)


def state_distance(sol_j: Solution, sol_k: Solution, cfg: ProblemConfig,
                   stride: int = TRAJECTORY_STRIDE) -> float:
    """Time-averaged squared state difference along the two evolutions.

    (1/T) integral of <f|f> dt with f = psi_j - psi_k, which equals
    2 - 2 Re<psi_j|psi_k> for normalized states; the time quadrature is
    trapezoidal on the stored samples.  Both solutions must share the
    duration (and hence the sampling).
    """
    if abs(sol_j.duration - sol_k.duration) > 1e-9:
        raise ValueError(f"durations differ: {sol_j.duration} vs {sol_k.duration}")
    ta = solution_trajectory(sol_j, cfg, stride)
    tb = solution_trajectory(sol_k, cfg, stride)
    overlap = np.sum(np.conj(ta.states) * tb.states, axis=1).real * cfg.grid.dx
    ff = 2.0 - 2.0 * overlap
    return float(np.trapezoid(ff, ta.times) / sol_j.duration)


def control_distance(sol_j, sol_k, bounds: TweezerBounds) -> float:
    """Manhattan distance between two control paths.

    Each control is affinely rescaled by its allowed range onto [0, 1];
    the distance is the sum over controls of the trapezoidal time integral
    of the absolute difference.
    """
    pa, pb = _as_path(sol_j), _as_path(sol_k)
    if pa.n_steps != pb.n_steps or abs(pa.dt - pb.dt) > 1e-12:
        raise ValueError("control paths must share duration and sampling")
    dx0 = np.abs(pa.x0 - pb.x0) / bounds.x_range
    damp = np.abs(pa.amp - pb.amp) / bounds.amp_range
    return float(np.trapezoid(dx0, dx=pa.dt) + np.trapezoid(damp, dx=pa.dt))


def distance_matrix(solutions: Sequence[Solution], metric: str, cfg: ProblemConfig,
                    stride: int = TRAJECTORY_STRIDE) -> DistanceMatrix:
    """Pairwise distances over a solution set in the chosen metric."""
    n = len(solutions)
    out = np.zeros((n, n))
    if metric == "state":
        trajs = [solution_trajectory(s, cfg, stride) for s in solutions]
        times = trajs[0].times
        for t in trajs[1:]:
            if len(t.times) != len(times) or np.max(np.abs(t.times - times)) > 1e-9:
                raise ValueError("all solutions must share duration and sampling")
        duration = solutions[0].duration
        for j in range(n):
            for k in range(j + 1, n):
                overlap = np.sum(np.conj(trajs[j].states) * trajs[k].states, axis=1).real * cfg.grid.dx
                d = float(np.trapezoid(2.0 - 2.0 * overlap, times) / duration)
                out[j, k] = out[k, j] = d
    elif metric == "control":
        for j in range(n):
            for k in range(j + 1, n):
                d = control_distance(solutions[j], solutions[k], cfg.tweezer_bounds)
                out[j, k] = out[k, j] = d
    else:
        raise ValueError(f"unknown metric {metric!r} (want 'state' or 'control')")
    return DistanceMatrix(values=out, metric=metric)


# ---------------------------------------------------------------------------
# Reachability ordering and clans
# ---------------------------------------------------------------------------

def reachability_order(dm: DistanceMatrix, rng=None, start: Optional[int] = None):
    """Greedy nearest-unvisited chain through the solution set.

    Starts from a random solution (or ``start`` when given) and repeatedly
    jumps to the closest not-yet-visited one.  Returns (order, distances)
    where distances[i] is the jump length from order[i] to order[i+1]
    (the reachability plot).
    """
    n = dm.n
    if n < 2:
        raise ValueError("need at least two solutions")
    if start is None:
        rng = np.random.default_rng(rng)
        start = int(rng.integers(n))
    visited = np.zeros(n, dtype=bool)
    order = [start]
    dists = []
    visited[start] = True
    cur = start
    for _ in range(n - 1):
        row = np.where(visited, np.inf, dm.values[cur])
        nxt = int(np.argmin(row))
        dists.append(float(row[nxt]))
        visited[nxt] = True
        order.append(nxt)
        cur = nxt
    return np.array(order), np.array(dists)


@dataclass
class Clan:
    """A contiguous reachability block of closely spaced solutions."""

    member_ids: np.ndarray           # indices into the original solution set
    label: str
    mean_x0: Optional[np.ndarray] = None
    std_x0: Optional[np.ndarray] = None
    mean_amp: Optional[np.ndarray] = None
    std_amp: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return len(self.member_ids)


def extract_clans(order: np.ndarray, distances: np.ndarray, threshold: float = 0.05,
                  min_size: int = 10, solutions: Optional[Sequence[Solution]] = None) -> list[Clan]:
    """Maximal runs of consecutive reachability distances below ``threshold``.

    A run of m qualifying gaps spans m+1 solutions; runs shorter than
    ``min_size`` solutions are dropped.  When the solution set is supplied,
    each clan carries the per-sample mean and standard deviation of its
    members' controls.
    """
    clans: list[Clan] = []
    i = 0
    n = len(order)
    while i < n:
        j = i
        while j < n - 1 and distances[j] <= threshold:
            j += 1
        if j - i + 1 >= min_size:
            ids = order[i:j + 1]
            clan = Clan(member_ids=np.array(ids), label=f"clan-{len(clans)}")
            if solutions is not None:
                x0s = np.array([solutions[s].path.x0 for s in ids])
                amps = np.array([solutions[s].path.amp for s in ids])
                clan.mean_x0 = x0s.mean(axis=0)
                clan.std_x0 = x0s.std(axis=0)
                clan.mean_amp = amps.mean(axis=0)
                clan.std_amp = amps.std(axis=0)
            clans.append(clan)
        i = j + 1
    return clans


# ---------------------------------------------------------------------------
# 2D landscape embedding
# ---------------------------------------------------------------------------

@dataclass
class Embedding2D:
    """Planar coordinates approximating a distance matrix.

    ``residuals[k]`` is the placement cost S_k = sum_j |De_jk - D_jk| over
    the points already placed when k was positioned (0 for the first
    three, which embed exactly whenever their distances permit).
    """

    coords: np.ndarray
    residuals: np.ndarray
    fidelities: Optional[np.ndarray] = None
    placement_order: Optional[np.ndarray] = None

    @property
    def total_stress(self) -> float:
        return float(np.sum(self.residuals))


def embed_2d(dm: DistanceMatrix, rng=None, restarts: int = 8,
             fidelities: Optional[np.ndarray] = None) -> Embedding2D:
    """Incremental planar embedding of a distance matrix.

    Construction: a random solution sits at the origin; its two nearest
    neighbours complete a triangle reproducing their three mutual
    distances exactly; every further point, taken in ascending order of
    minimal distance to the placed set (ties by index), is positioned by
    derivative-free simplex minimization of S_k with ``restarts`` starts
    (circle-intersection guesses from the two nearest anchors plus random
    perturbations).
    """
    n = dm.n
    if n < 3:
        raise ValueError("need at least three solutions to embed")
    rng = np.random.default_rng(rng)
    d = dm.values
    coords = np.zeros((n, 2))
    residuals = np.zeros(n)
    if d.max() <= 0.0:
        log.warning("embed_2d: all distances are zero; collapsing every point to the origin")
        return Embedding2D(coords=coords, residuals=residuals, fidelities=fidelities,
                           placement_order=np.arange(n))

    first = int(rng.integers(n))
    nearest = np.argsort(d[first], kind="stable")
    second, third = int(nearest[1]), int(nearest[2])
    coords[second] = (d[first, second], 0.0)
    d12 = d[first, second]
    x3 = (d[first, third] ** 2 + d12**2 - d[second, third] ** 2) / (2.0 * d12) if d12 > 0 else 0.0
    y3_sq = d[first, third] ** 2 - x3**2
    coords[third] = (x3, np.sqrt(max(y3_sq, 0.0)))
    placed = [first, second, third]
    for idx in (first, second, third):
        others = [j for j in placed if j != idx]
        residuals[idx] = _placement_cost(coords[idx], coords[others], d[idx, others])
    # first three points must reproduce their distances; count each pair once
    residuals[first] = residuals[second] = 0.0

    remaining = [i for i in range(n) if i not in placed]
    while remaining:
        placed_arr = np.array(placed)
        min_d = [d[i, placed_arr].min() for i in remaining]
        pick = remaining[int(np.lexsort((remaining, min_d))[0])]
        anchors = coords[placed_arr]
        targets = d[pick, placed_arr]
        best_xy, best_cost = _place_point(anchors, targets, rng, restarts)
        coords[pick] = best_xy
        residuals[pick] = best_cost
        placed.append(pick)
        remaining.remove(pick)
    return Embedding2D(coords=coords, residuals=residuals, fidelities=fidelities,
                       placement_order=np.array(placed))


def _placement_cost(xy, anchors, targets) -> float:
    de = np.hypot(*(anchors - xy).T)
    return float(np.sum(np.abs(de - targets)))


def _circle_intersections(p0, r0, p1, r1):
    """Intersection points of two circles (may coincide); [] if disjoint."""
    delta = p1 - p0
    dist = np.hypot(*delta)
    if dist == 0:
        return []
    a = (r0**2 - r1**2 + dist**2) / (2 * dist)
    h_sq = r0**2 - a**2
    mid = p0 + a * delta / dist
    if h_sq < 0:
        return [mid]
    h = np.sqrt(h_sq)
    perp = np.array([-delta[1], delta[0]]) / dist
    return [mid + h * perp, mid - h * perp]


def _place_point(anchors: np.ndarray, targets: np.ndarray, rng, restarts: int):
    order = np.argsort(targets, kind="stable")
    guesses = []
    if len(anchors) >= 2:
        i, j = order[0], order[1]
        guesses.extend(_circle_intersections(anchors[i], targets[i], anchors[j], targets[j]))
    guesses.append(anchors[order[0]] + targets[order[0]] * _unit(rng))
    scale = max(targets.max(), 1e-3)
    while len(guesses) < restarts:
        guesses.append(anchors[order[0]] + scale * rng.standard_normal(2))
    best_xy, best_cost = None, np.inf
    for g in guesses[:max(restarts, len(guesses))]:
        res = minimize(_placement_cost, np.asarray(g, dtype=float),
                       args=(anchors, targets), method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 600})
        if res.fun < best_cost:
            best_xy, best_cost = res.x, float(res.fun)
    return best_xy, best_cost


def _unit(rng) -> np.ndarray:
    angle = rng.uniform(0, 2 * np.pi)
    return np.array([np.cos(angle), np.sin(angle)])


# ---------------------------------------------------------------------------
# Direct Hilbert velocity and the fidelity/duration trade-off
# ---------------------------------------------------------------------------

@dataclass
class HilbertVelocity:
    """Q(t) samples and the time average <Q>_T for one solution."""

    times: np.ndarray
    q: np.ndarray
    mean: float
    fidelity: float


def hilbert_velocity(sol: Solution, cfg: ProblemConfig,
                     target: Optional[Wavefunction] = None) -> HilbertVelocity:
    """Rate at which the state advances toward the back-propagated target.

    With chi(t) the target propagated backward and F the (conserved)
    fidelity, the component of chi orthogonal to psi is

        xi = (|chi><chi| - F) |psi> / sqrt(F (1 - F))

    and Q(t) = Im <xi(t)|H(t)|psi(t)>.  Only defined while F < 1; a sample
    with F = 1 (within 1e-12) raises UndefinedHilbertVelocityError.
    """
    chi_T = target if target is not None else cfg.target_state()
    grid = cfg.grid
    path = sol.path
    kin = kinetic_phase(grid, cfg.dt)
    phases = step_phase_matrix(cfg, path.x0, path.amp)
    fwd = propagate_store(cfg.initial_state().amplitudes, phases, kin)
    bwd = backpropagate_store(chi_T.amplitudes, phases, kin)
    n = path.n_steps
    q = np.empty(n + 1)
    waist = cfg.target_trap.waist
    for i in range(n + 1):
        c_i = np.vdot(bwd[i], fwd[i]) * grid.dx
        f_i = abs(c_i) ** 2
        if f_i >= 1.0 - 1e-12 or f_i <= 1e-12:
            # the orthogonal component is undefined at F = 1 and direction-
            # less at F = 0
            raise UndefinedHilbertVelocityError(i)
        v = cfg.static_potential + gaussian_well(
            grid.x, TweezerState(x0=path.x0[i], amplitude=path.amp[i], waist=waist))
        h_psi = apply_hamiltonian(fwd[i], v, grid)
        xi = (bwd[i] * c_i - f_i * fwd[i]) / np.sqrt(f_i * (1.0 - f_i))
        q[i] = np.imag(np.vdot(xi, h_psi) * grid.dx)
    duration = path.duration
    mean = float(np.trapezoid(q, dx=cfg.dt) / duration)
    f_final = float(abs(np.vdot(chi_T.amplitudes, fwd[-1]) * grid.dx) ** 2)
    return HilbertVelocity(times=path.times.copy(), q=q, mean=mean, fidelity=f_final)


def uniform_extension_dfdt(sol: Solution, cfg: ProblemConfig,
                           target: Optional[Wavefunction] = None) -> float:
    """Centered finite difference of fidelity under uniform time extension.

    Contracts and dilates the path by one sample (no re-optimization) and
    differences the fidelities; this is the dF/dT that the direct Hilbert
    velocity relation dF/dT = 2 sqrt(F(1-F)) <Q>_T describes.
    """
    n = sol.path.n_steps
    up = dilate(sol.path, (n + 1) / n)
    down = contract(sol.path, (n - 1) / n)
    f_up = path_fidelity(up, cfg, target)
    f_down = path_fidelity(down, cfg, target)
    return (f_up - f_down) / (2.0 * cfg.dt)


# ---------------------------------------------------------------------------
# sin^2 fit of a family's fidelity-duration curve
# ---------------------------------------------------------------------------

@dataclass
class QslFit:
    """Parameters of F(T) ~ sin^2(a T + b) fitted to a family."""

    a: float
    b: float
    t_qsl: float
    residual: float                  # RMS of F - sin^2(aT + b) over the fit set
    n_used: int


def qsl_fit(family, f_cut: float = 0.999) -> QslFit:
    """Least-squares sin^2(aT + b) fit over a family's sub-unit members.

    Only members with F < ``f_cut`` enter the fit (the orthogonal-component
    construction behind the model needs F < 1).  Requires at least five
    such members and a non-degenerate spread of fidelities.  The fitted
    speed limit is T_QSL = (pi/2 - b) / a; the RMS residual doubles as the
    deviation-from-sin^2 statistic.
    """
    ts = np.array([s.duration for s in family.members if s.fidelity < f_cut])
    fs = np.array([s.fidelity for s in family.members if s.fidelity < f_cut])
    if len(ts) < 5:
        raise ValueError(f"need >= 5 members with F < {f_cut}, have {len(ts)}")
    if np.ptp(fs) < 1e-12:
        raise ValueError("family fidelities are constant; sin^2 fit is degenerate")

    def resid(p):
        return np.sin(p[0] * ts + p[1]) ** 2 - fs

    t_hi = ts.max()
    best = None
    # small-a starts cover near-flat families; larger ones the sin^2 decays
    for a0 in np.pi / 2.0 / t_hi * np.array([0.05, 0.25, 0.5, 1.0, 2.0, 4.0]):
        for b0 in (-1.0, -0.5, 0.0, 0.5, 1.0, 1.5):
            fit = least_squares(resid, x0=[a0, b0], xtol=1e-15, ftol=1e-15, gtol=1e-15)
            if best is None or fit.cost < best.cost:
                best = fit
    a, b = float(best.x[0]), float(best.x[1])
    # sin^2 is invariant under (a, b) -> (-a, -b) and b -> b + pi; pick the
    # positive-slope representative with b in (-pi/2, pi/2]
    if a < 0:
        a, b = -a, -b
    b = (b + np.pi / 2.0) % np.pi - np.pi / 2.0
    rms = float(np.sqrt(np.mean(resid([a, b]) ** 2)))
    return QslFit(a=a, b=b, t_qsl=(np.pi / 2.0 - b) / a, residual=rms, n_used=len(ts))
