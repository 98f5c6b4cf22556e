"""Dimensionless 1D quantum mechanics for tweezer-driven atom transport.

Everything works in units with hbar = m = 1: the Schrodinger equation reads

    i dpsi/dt = -1/2 d^2psi/dx^2 + V(x, t) psi

Potentials are Gaussian wells, V = A * exp(-2 (x - x0)^2 / w0^2) with A <= 0,
one static well holding the atom plus one movable tweezer.  Time evolution
uses the symmetric split-step (Strang) scheme with a spectral kinetic step,
so the spatial grid is periodic and its size must be a power of two.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import BoundsViolationError, CapacityError, GridMismatchError, NumericalFailureError

CONFIG_SCHEMA_VERSION = 1

#: Norm tolerance for constructed and evolved wavefunctions.
NORM_TOL = 1e-8


@dataclass(frozen=True)
class Grid:
    """Uniform periodic spatial grid.

    Parameters
    ----------
    x_min, x_max : float
        Interval covered by the grid; the point x_max itself is excluded
        (periodic wrap).
    n_points : int
        Number of samples; must be a power of two and at least 64 so the
        spectral kinetic step stays exact and fast.
    """

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 64 or self.n_points & (self.n_points - 1):
            raise ValueError(f"n_points must be a power of two >= 64, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        """Grid points (length n_points, read-only)."""
        x = self.x_min + (self.x_max - self.x_min) * np.arange(self.n_points) / self.n_points
        x.flags.writeable = False
        return x

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT ordering (read-only)."""
        k = 2.0 * np.pi * sfft.fftfreq(self.n_points, d=self.dx)
        k.flags.writeable = False
        return k


@dataclass(frozen=True)
class Wavefunction:
    """Normalized complex amplitudes sampled on a :class:`Grid`.

    The array is copied and frozen at construction; the squared norm
    (sum |psi|^2 dx) must be 1 within ``NORM_TOL``.
    """

    amplitudes: np.ndarray
    grid: Grid

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex)
        if amp.shape != (self.grid.n_points,):
            raise ValueError(f"amplitudes shape {amp.shape} does not match grid {self.grid.n_points}")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)
        nsq = self.norm_sq()
        if abs(nsq - 1.0) > NORM_TOL:
            raise ValueError(f"wavefunction not normalized: |psi|^2 integrates to {nsq:.12g}")

    @classmethod
    def from_array(cls, amplitudes, grid: Grid, normalize: bool = True) -> "Wavefunction":
        """Build a wavefunction, optionally rescaling to unit norm first."""
        amp = np.asarray(amplitudes, dtype=complex)
        if normalize:
            nsq = np.sum(np.abs(amp) ** 2) * grid.dx
            if nsq <= 0 or not np.isfinite(nsq):
                raise ValueError("cannot normalize: zero or non-finite norm")
            amp = amp / np.sqrt(nsq)
        return cls(amp, grid)

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dx)

    def inner(self, other: "Wavefunction") -> complex:
        """L2 inner product <self|other> with the dx quadrature weight."""
        _require_same_grid(self.grid, other.grid)
        return complex(np.vdot(self.amplitudes, other.amplitudes) * self.grid.dx)

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class TweezerState:
    """A Gaussian well: amplitude (<= 0 for a well) at position x0 with waist w0."""

    x0: float
    amplitude: float
    waist: float = 0.25

    def __post_init__(self):
        if not self.waist > 0:
            raise ValueError("waist must be positive")


@dataclass(frozen=True)
class TweezerBounds:
    """Control box and kinematic limit for the movable tweezer."""

    x_min: float = -1.2
    x_max: float = 1.2
    amp_min: float = -200.0
    amp_max: float = 0.0
    max_speed: float = 20.0

    @property
    def x_range(self) -> float:
        return self.x_max - self.x_min

    @property
    def amp_range(self) -> float:
        return self.amp_max - self.amp_min

    def check(self, tweezer: TweezerState):
        """Raise :class:`BoundsViolationError` naming the offending field."""
        if not self.x_min <= tweezer.x0 <= self.x_max:
            raise BoundsViolationError("x0", tweezer.x0, self.x_min, self.x_max)
        if not self.amp_min <= tweezer.amplitude <= self.amp_max:
            raise BoundsViolationError("amplitude", tweezer.amplitude, self.amp_min, self.amp_max)


@dataclass(frozen=True)
class ProblemConfig:
    """Full definition of one transport problem instance.

    The atom starts in the ground state of the static trap; the goal is the
    ground state of the target trap (the tweezer parked at its rest
    position).  All defaults are serialized explicitly by :meth:`to_json`.
    """

    static_trap: TweezerState = TweezerState(x0=0.5, amplitude=-130.0)
    target_trap: TweezerState = TweezerState(x0=-0.5, amplitude=-100.0)
    tweezer_bounds: TweezerBounds = TweezerBounds()
    grid: Grid = Grid(-1.5, 1.5, 256)
    dt: float = 0.002

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")

    @cached_property
    def static_potential(self) -> np.ndarray:
        v = gaussian_well(self.grid.x, self.static_trap)
        v.flags.writeable = False
        return v

    @cached_property
    def _initial_state(self) -> Wavefunction:
        return stationary_states(self.static_potential, 1, self)[0][1]

    @cached_property
    def _target_state(self) -> Wavefunction:
        return stationary_states(gaussian_well(self.grid.x, self.target_trap), 1, self)[0][1]

    def initial_state(self) -> Wavefunction:
        """Ground state of the static trap alone."""
        return self._initial_state

    def target_state(self) -> Wavefunction:
        """Ground state of the target trap alone."""
        return self._target_state

    def with_grid(self, n_points: int) -> "ProblemConfig":
        return replace(self, grid=replace(self.grid, n_points=n_points))

    def to_json(self) -> str:
        doc = {
            "schema_version": CONFIG_SCHEMA_VERSION,
            "static_trap": _tweezer_doc(self.static_trap),
            "target_trap": _tweezer_doc(self.target_trap),
            "tweezer_bounds": {
                "x_min": self.tweezer_bounds.x_min,
                "x_max": self.tweezer_bounds.x_max,
                "amp_min": self.tweezer_bounds.amp_min,
                "amp_max": self.tweezer_bounds.amp_max,
                "max_speed": self.tweezer_bounds.max_speed,
            },
            "grid": {"x_min": self.grid.x_min, "x_max": self.grid.x_max, "n_points": self.grid.n_points},
            "dt": self.dt,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ProblemConfig":
        doc = json.loads(text)
        version = doc.get("schema_version")
        if version != CONFIG_SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema version: {version}")
        return cls(
            static_trap=TweezerState(**doc["static_trap"]),
            target_trap=TweezerState(**doc["target_trap"]),
            tweezer_bounds=TweezerBounds(**doc["tweezer_bounds"]),
            grid=Grid(**doc["grid"]),
            dt=doc["dt"],
        )


def _tweezer_doc(t: TweezerState) -> dict:
    return {"x0": t.x0, "amplitude": t.amplitude, "waist": t.waist}


def _require_same_grid(a: Grid, b: Grid):
    if a != b:
        raise GridMismatchError(f"grids differ: {a} vs {b}")


def gaussian_well(x: np.ndarray, tweezer: TweezerState) -> np.ndarray:
    """Evaluate A * exp(-2 (x - x0)^2 / w0^2) on the given points."""
    return tweezer.amplitude * np.exp(-2.0 * (x - tweezer.x0) ** 2 / tweezer.waist**2)


def build_potential(tweezer: TweezerState, cfg: ProblemConfig) -> np.ndarray:
    """Total potential: static trap plus the movable tweezer.

    Raises :class:`BoundsViolationError` if the tweezer sits outside the
    configured control bounds.
    """
    cfg.tweezer_bounds.check(tweezer)
    return cfg.static_potential + gaussian_well(cfg.grid.x, tweezer)


# ---------------------------------------------------------------------------
# Split-step propagation
# ---------------------------------------------------------------------------

def kinetic_phase(grid: Grid, dt: float) -> np.ndarray:
    """Full-step kinetic propagator exp(-i dt k^2 / 2) in FFT ordering."""
    return np.exp(-0.5j * dt * grid.k**2)


def half_potential_phase(potential: np.ndarray, dt: float) -> np.ndarray:
    """Half-step potential propagator exp(-i dt V / 2)."""
    return np.exp(-0.5j * dt * potential)


def strang_step(amp: np.ndarray, half_phase: np.ndarray, kin: np.ndarray) -> np.ndarray:
    """One symmetric split step on raw amplitudes (no copies, no checks)."""
    return half_phase * sfft.ifft(kin * sfft.fft(half_phase * amp))


def split_step(psi: Wavefunction, potential: np.ndarray, dt: float) -> Wavefunction:
    """Advance one symmetric split step under a frozen potential.

    Half potential phase, full spectral kinetic step, half potential phase;
    norm is preserved to machine precision.
    """
    if np.shape(potential) != (psi.grid.n_points,):
        raise GridMismatchError("potential is not sampled on the wavefunction's grid")
    if not dt > 0:
        raise ValueError("dt must be positive")
    out = strang_step(psi.amplitudes, half_potential_phase(potential, dt), kinetic_phase(psi.grid, dt))
    return Wavefunction(out, psi.grid)


def step_phase_matrix(cfg: ProblemConfig, x0_samples: np.ndarray, amp_samples: np.ndarray) -> np.ndarray:
    """Half-step potential phases for every step of a sampled control path.

    Step j (between samples j and j+1) uses the control midpoint, which keeps
    the scheme second order for time-dependent controls.  Returns an
    (n_steps, n_points) complex array.
    """
    xm = 0.5 * (x0_samples[:-1] + x0_samples[1:])
    am = 0.5 * (amp_samples[:-1] + amp_samples[1:])
    waist = cfg.target_trap.waist
    v = cfg.static_potential[None, :] + am[:, None] * np.exp(
        -2.0 * (cfg.grid.x[None, :] - xm[:, None]) ** 2 / waist**2
    )
    return np.exp(-0.5j * cfg.dt * v)


def propagate(amp: np.ndarray, phases: np.ndarray, kin: np.ndarray) -> np.ndarray:
    """Run all steps of a phase matrix; returns the final raw amplitudes."""
    out = amp
    for p in phases:
        out = p * sfft.ifft(kin * sfft.fft(p * out))
    return out


def propagate_store(amp: np.ndarray, phases: np.ndarray, kin: np.ndarray) -> np.ndarray:
    """Like :func:`propagate` but returns all n_steps+1 states as rows."""
    n_steps = phases.shape[0]
    out = np.empty((n_steps + 1, amp.shape[0]), dtype=complex)
    out[0] = amp
    cur = amp
    for j in range(n_steps):
        p = phases[j]
        cur = p * sfft.ifft(kin * sfft.fft(p * cur))
        out[j + 1] = cur
    return out


def backpropagate_store(amp_final: np.ndarray, phases: np.ndarray, kin: np.ndarray) -> np.ndarray:
    """Adjoint propagation of a final costate back through every step.

    Row j holds the costate just before step j, so row 0 pairs with the
    initial state and the overlap <costate_j|state_j> is step-independent.
    """
    n_steps = phases.shape[0]
    kin_b = np.conj(kin)
    out = np.empty((n_steps + 1, amp_final.shape[0]), dtype=complex)
    out[n_steps] = amp_final
    cur = amp_final
    for j in range(n_steps - 1, -1, -1):
        p = np.conj(phases[j])
        cur = p * sfft.ifft(kin_b * sfft.fft(p * cur))
        out[j] = cur
    return out


@dataclass(frozen=True)
class StateTrajectory:
    """Stored snapshots of psi(t) along a control path.

    ``states[i]`` is the state at ``times[i]``; samples may be decimated by
    a stride relative to the underlying control sampling.
    """

    times: np.ndarray
    states: np.ndarray
    grid: Grid
    stride: int = 1

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> Wavefunction:
        return Wavefunction(self.states[-1], self.grid)

    def state_at(self, i: int) -> Wavefunction:
        return Wavefunction(self.states[i], self.grid)

    def to_npz(self, path):
        np.savez_compressed(path, times=self.times, states=self.states,
                            x=self.grid.x, stride=self.stride)

    @classmethod
    def from_npz(cls, path, grid: Grid) -> "StateTrajectory":
        with np.load(path) as data:
            if not np.allclose(data["x"], grid.x):
                raise GridMismatchError("stored trajectory grid differs from the provided grid")
            return cls(times=data["times"], states=data["states"], grid=grid,
                       stride=int(data["stride"]))

    def to_csv(self, path):
        """Wide CSV: one row per sample, columns t, re_0.., im_0.. over the grid."""
        n = self.grid.n_points
        header = "t," + ",".join(f"re_{i}" for i in range(n)) + "," + ",".join(f"im_{i}" for i in range(n))
        table = np.hstack([self.times[:, None], self.states.real, self.states.imag])
        np.savetxt(path, table, delimiter=",", header=header, comments="", fmt="%.12g")


def evolve(psi0: Wavefunction, path, cfg: ProblemConfig, store="all") -> StateTrajectory:
    """Propagate an initial state along a control path.

    Parameters
    ----------
    psi0 : Wavefunction
        Initial state on ``cfg.grid``.
    path : ControlPath
        Controls sampled at ``cfg.dt``.
    cfg : ProblemConfig
    store : "all", "final", or int
        Which snapshots to keep: every sample, only the endpoints, or every
        ``store``-th sample (the final sample is always kept).

    The squared norm of the final state is checked against 1 within
    ``NORM_TOL``; a violation raises :class:`NumericalFailureError`.
    """
    _require_same_grid(psi0.grid, cfg.grid)
    if abs(path.dt - cfg.dt) > 1e-12:
        raise ValueError(f"path dt {path.dt} does not match config dt {cfg.dt}")
    n_steps = path.n_steps
    kin = kinetic_phase(cfg.grid, cfg.dt)
    if n_steps == 0:
        return StateTrajectory(np.array([0.0]), psi0.amplitudes[None, :].copy(), cfg.grid)
    phases = step_phase_matrix(cfg, path.x0, path.amp)

    if store == "final":
        final = propagate(psi0.amplitudes, phases, kin)
        _check_norm(final, cfg.grid.dx)
        times = np.array([0.0, n_steps * cfg.dt])
        return StateTrajectory(times, np.vstack([psi0.amplitudes, final]), cfg.grid, stride=n_steps)

    stride = 1 if store == "all" else int(store)
    if stride < 1:
        raise ValueError("store stride must be >= 1")
    keep = list(range(0, n_steps + 1, stride))
    if keep[-1] != n_steps:
        keep.append(n_steps)
    states = np.empty((len(keep), cfg.grid.n_points), dtype=complex)
    states[0] = psi0.amplitudes
    cur = psi0.amplitudes
    out_i = 1
    for j in range(n_steps):
        p = phases[j]
        cur = p * sfft.ifft(kin * sfft.fft(p * cur))
        if out_i < len(keep) and j + 1 == keep[out_i]:
            states[out_i] = cur
            out_i += 1
    _check_norm(cur, cfg.grid.dx)
    times = np.array(keep, dtype=float) * cfg.dt
    return StateTrajectory(times, states, cfg.grid, stride=stride)


def _check_norm(amp: np.ndarray, dx: float):
    nsq = np.sum(np.abs(amp) ** 2) * dx
    if not np.isfinite(nsq) or abs(nsq - 1.0) > NORM_TOL:
        raise NumericalFailureError(f"norm drifted to {nsq:.12g} during propagation")


def edge_leakage(psi: Wavefunction, margin_fraction: float = 0.05) -> float:
    """Probability mass within the outer ``margin_fraction`` of the grid.

    The kinetic step is periodic, so any appreciable mass at the edges means
    the box is too small for the dynamics at hand.
    """
    n = psi.grid.n_points
    m = max(1, int(round(margin_fraction * n)))
    p = psi.density()
    return float((p[:m].sum() + p[-m:].sum()) * psi.grid.dx)


# ---------------------------------------------------------------------------
# Stationary states and derived quantities
# ---------------------------------------------------------------------------

def hamiltonian_matrix(potential: np.ndarray, grid: Grid) -> np.ndarray:
    """Dense Hamiltonian with the same spectral kinetic operator used by
    the split-step propagator (periodic boundary conditions)."""
    n = grid.n_points
    eye = np.eye(n)
    kinetic = sfft.ifft((0.5 * grid.k**2)[:, None] * sfft.fft(eye, axis=0), axis=0)
    h = kinetic + np.diag(potential)
    return 0.5 * (h + h.conj().T)


def stationary_states(potential: np.ndarray, k: int, cfg: ProblemConfig):
    """Lowest ``k`` eigenpairs of -1/2 d^2/dx^2 + V.

    Uses dense diagonalization of the spectral Hamiltonian, which is
    consistent with the propagator's kinetic operator (a finite-difference
    kinetic matrix would disagree with the split-step dynamics at O(dx^2)).
    Returns ``[(energy, Wavefunction), ...]`` with ascending energies and
    eigenstates orthonormal under the dx weight.  The global phase is fixed
    by making the largest-magnitude sample real and positive.
    """
    grid = cfg.grid
    if k >= grid.n_points // 4:
        raise CapacityError(f"k={k} too large for n_points={grid.n_points} (need k < n/4)")
    if k < 1:
        raise ValueError("k must be >= 1")
    if np.shape(potential) != (grid.n_points,):
        raise GridMismatchError("potential is not sampled on the config grid")
    h = hamiltonian_matrix(potential, grid)
    energies, vectors = np.linalg.eigh(h)
    out = []
    for i in range(k):
        phi = vectors[:, i] / np.sqrt(grid.dx)
        j = int(np.argmax(np.abs(phi)))
        phi = phi * np.exp(-1j * np.angle(phi[j]))
        if abs(phi[j].imag) < 1e-12:
            phi = phi.real.astype(complex)
        out.append((float(energies[i]), Wavefunction(phi, grid)))
    return out


def fidelity(psi: Wavefunction, chi: Wavefunction) -> float:
    """Squared overlap |<chi|psi>|^2 of two normalized states."""
    _require_same_grid(psi.grid, chi.grid)
    return float(abs(np.vdot(chi.amplitudes, psi.amplitudes) * psi.grid.dx) ** 2)


def populations(psi: Wavefunction, potential: np.ndarray, k: int, cfg: ProblemConfig) -> np.ndarray:
    """Fractions |<phi_n|psi>|^2 in the lowest k eigenstates of ``potential``."""
    states = stationary_states(potential, k, cfg)
    return np.array([abs(w.inner(psi)) ** 2 for _, w in states])


def energy_expectation(psi: Wavefunction, potential: np.ndarray) -> float:
    """<psi|H|psi> with the spectral kinetic operator."""
    amp = psi.amplitudes
    h_amp = apply_hamiltonian(amp, potential, psi.grid)
    return float(np.real(np.vdot(amp, h_amp) * psi.grid.dx))


def apply_hamiltonian(amp: np.ndarray, potential: np.ndarray, grid: Grid) -> np.ndarray:
    """H psi on raw amplitudes: spectral kinetic term plus diagonal potential."""
    return sfft.ifft(0.5 * grid.k**2 * sfft.fft(amp)) + potential * amp


def ground_state_imaginary_time(potential: np.ndarray, cfg: ProblemConfig,
                                dtau: float = 0.001, tol: float = 1e-12,
                                max_steps: int = 200_000):
    """Ground state by imaginary-time split-step relaxation.

    Independent cross-check for :func:`stationary_states`: evolves exp(-H dtau)
    with renormalization until the state stops moving, then reports the
    energy expectation value.  Slower but shares no linear-algebra machinery
    with the dense diagonalization.
    """
    grid = cfg.grid
    kin = np.exp(-0.5 * dtau * grid.k**2)
    half = np.exp(-0.5 * dtau * potential)
    rng = np.random.default_rng(7)
    amp = np.exp(-((grid.x - grid.x[np.argmin(potential)]) ** 2)) + 0.01 * rng.standard_normal(grid.n_points)
    amp = amp.astype(complex)
    amp /= np.sqrt(np.sum(np.abs(amp) ** 2) * grid.dx)
    prev = amp
    for _ in range(max_steps):
        amp = half * sfft.ifft(kin * sfft.fft(half * amp))
        amp /= np.sqrt(np.sum(np.abs(amp) ** 2) * grid.dx)
        if np.max(np.abs(amp - prev)) < tol:
            break
        prev = amp
    psi = Wavefunction.from_array(amp, grid, normalize=True)
    return energy_expectation(psi, potential), psi
