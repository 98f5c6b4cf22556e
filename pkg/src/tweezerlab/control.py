"""Control paths for the movable tweezer and how they are generated.

A control path samples the two controls, tweezer position x0(t) and tweezer
amplitude A(t), on the uniform time grid t_k = k * dt.  Seeds for the local
optimizer start from the constant-speed out-and-back reference motion and are
roughened by random sine series whose mode magnitudes fall off with frequency.
"""

from __future__ import annotations

import io
import json
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InfeasiblePathError
from .physics import ProblemConfig

log = logging.getLogger(__name__)

#: Tolerance on T being an exact multiple of dt.
DURATION_TOL = 1e-9


@dataclass(frozen=True)
class ControlPath:
    """Sampled tweezer controls on the uniform dt grid.

    ``x0`` and ``amp`` hold n_steps + 1 samples; duration = n_steps * dt.
    Arrays are copied and frozen at construction.
    """

    dt: float
    x0: np.ndarray
    amp: np.ndarray

    def __post_init__(self):
        x0 = np.array(self.x0, dtype=float)
        amp = np.array(self.amp, dtype=float)
        if x0.ndim != 1 or x0.shape != amp.shape or len(x0) < 1:
            raise ValueError("x0 and amp must be 1-D arrays of equal nonzero length")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        x0.flags.writeable = False
        amp.flags.writeable = False
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "amp", amp)

    @property
    def n_steps(self) -> int:
        return len(self.x0) - 1

    @property
    def duration(self) -> float:
        return self.n_steps * self.dt

    @cached_property
    def times(self) -> np.ndarray:
        t = np.arange(self.n_steps + 1) * self.dt
        t.flags.writeable = False
        return t

    def with_samples(self, x0: np.ndarray, amp: np.ndarray) -> "ControlPath":
        return ControlPath(self.dt, x0, amp)

    # -- canonical file formats ------------------------------------------

    def to_csv(self) -> str:
        """Canonical CSV: header t,x0,amp; >= 12 significant digits."""
        buf = io.StringIO()
        buf.write("t,x0,amp\n")
        for k in range(self.n_steps + 1):
            buf.write(f"{k * self.dt:.12g},{self.x0[k]:.17g},{self.amp[k]:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ControlPath":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0].strip() != "t,x0,amp":
            raise ValueError("control path CSV must start with header 't,x0,amp'")
        rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        if rows.shape[0] < 1 or rows.shape[1] != 3:
            raise ValueError("malformed control path CSV")
        t = rows[:, 0]
        if len(t) > 1:
            dt = t[1] - t[0]
            if np.max(np.abs(np.diff(t) - dt)) > DURATION_TOL:
                raise ValueError("control path CSV times are not uniformly spaced")
        else:
            dt = 0.002
        return cls(dt=float(dt), x0=rows[:, 1], amp=rows[:, 2])

    def to_json(self) -> str:
        return json.dumps({
            "duration": self.duration,
            "dt": self.dt,
            "x0": self.x0.tolist(),
            "amp": self.amp.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "ControlPath":
        doc = json.loads(text) if isinstance(text, str) else text
        path = cls(dt=float(doc["dt"]), x0=np.asarray(doc["x0"], dtype=float),
                   amp=np.asarray(doc["amp"], dtype=float))
        if abs(path.duration - float(doc["duration"])) > DURATION_TOL:
            raise ValueError("duration field inconsistent with sample count")
        return path


def steps_for_duration(T: float, dt: float) -> int:
    """Number of steps for duration T, requiring T to be a multiple of dt."""
    n = int(round(T / dt))
    if n < 1 or abs(n * dt - T) > DURATION_TOL:
        raise ValueError(f"duration {T} is not a positive multiple of dt={dt}")
    return n


@dataclass(frozen=True)
class SeedSpectrum:
    """Random sine-series spectrum for seed generation.

    Mode n (1-based in frequency, amplitude index n starting at 0) gets a
    random sign and magnitude scale / (n + 1)**decay, scaled per control by
    the allowed control range, so magnitudes strictly decrease with
    frequency.
    """

    n_modes: int = 8
    scale: float = 0.05
    decay: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if self.decay <= 0:
            raise ValueError("decay must be positive for magnitudes to fall off")

    def magnitudes(self, control_range: float) -> np.ndarray:
        n = np.arange(self.n_modes)
        return self.scale * control_range / (n + 1.0) ** self.decay


def base_motion(cfg: ProblemConfig, T: float) -> ControlPath:
    """Constant-speed reference motion: out to the static trap and back.

    The tweezer starts at the target position, reaches the static trap at
    T/2 and returns, with the amplitude held at the reference value -100.
    """
    x_t = cfg.target_trap.x0
    x_s = cfg.static_trap.x0
    t_min = 2.0 * abs(x_s - x_t) / cfg.tweezer_bounds.max_speed
    if T < t_min - DURATION_TOL:
        raise InfeasiblePathError(
            f"T={T} too short: the round trip needs at least {t_min} at max_speed="
            f"{cfg.tweezer_bounds.max_speed}"
        )
    n = steps_for_duration(T, cfg.dt)
    t = np.arange(n + 1) * cfg.dt
    x0 = np.interp(t, [0.0, T / 2.0, T], [x_t, x_s, x_t])
    amp = np.full(n + 1, -100.0)
    return ControlPath(cfg.dt, x0, amp)


def random_sin_seed(cfg: ProblemConfig, T: float, spectrum: SeedSpectrum) -> ControlPath:
    """Reference motion roughened by independent random sine series.

    Each control u_i receives sum_n X_i[n] * sin(n pi k / N) with random
    signs and magnitudes from ``spectrum`` (independent draws for amplitude
    and position).  Both endpoints are pinned to the reference motion and
    out-of-range samples are clipped to the control bounds (clipping is
    logged, not fatal).
    """
    base = base_motion(cfg, T)
    n = base.n_steps
    rng = np.random.default_rng(spectrum.rng_seed)
    k_over_n = np.arange(n + 1) / n
    bounds = cfg.tweezer_bounds

    def perturb(samples: np.ndarray, control_range: float) -> np.ndarray:
        mags = spectrum.magnitudes(control_range)
        signs = rng.choice([-1.0, 1.0], size=spectrum.n_modes)
        out = samples.copy()
        for mode, x_n in enumerate(signs * mags):
            out += x_n * np.sin(mode * np.pi * k_over_n)
        return out

    amp = perturb(base.amp, bounds.amp_range)
    x0 = perturb(base.x0, bounds.x_range)
    # physical endpoints stay fixed regardless of floating-point sin(n pi)
    x0[0], x0[-1] = base.x0[0], base.x0[-1]
    amp[0], amp[-1] = base.amp[0], base.amp[-1]

    x0_c = np.clip(x0, bounds.x_min, bounds.x_max)
    amp_c = np.clip(amp, bounds.amp_min, bounds.amp_max)
    n_clipped = int(np.sum(x0_c != x0) + np.sum(amp_c != amp))
    if n_clipped:
        log.info("random_sin_seed: clipped %d samples to control bounds", n_clipped)
    return ControlPath(cfg.dt, x0_c, amp_c)


def _resample(path: ControlPath, n_steps_new: int) -> ControlPath:
    """Linear-time rescaling onto a new uniform grid with the same dt."""
    if n_steps_new < 1:
        raise ValueError("rescaled path must keep at least one step")
    scale = path.n_steps / n_steps_new
    t_old = path.times
    t_probe = np.arange(n_steps_new + 1) * path.dt * scale
    t_probe[-1] = t_old[-1]  # guard rounding at the right endpoint
    return ControlPath(path.dt, np.interp(t_probe, t_old, path.x0),
                       np.interp(t_probe, t_old, path.amp))


def contract(path: ControlPath, a: float) -> ControlPath:
    """Contract a path linearly in time: u(t) -> u(a t), duration a * T.

    ``a`` must lie in (0, 1) and a * n_steps must land on the sample grid;
    a = (N-1)/N is the canonical one-step contraction.
    """
    if not 0.0 < a < 1.0:
        raise ValueError(f"contraction factor must be in (0, 1), got {a}")
    n_new = int(round(a * path.n_steps))
    if abs(a * path.n_steps - n_new) > 1e-6 or n_new < 1:
        raise ValueError(f"a={a} does not map {path.n_steps} steps onto the dt grid")
    return _resample(path, n_new)


def dilate(path: ControlPath, a: float) -> ControlPath:
    """Dilate a path linearly in time: u(t) -> u(a t) with a > 1."""
    if not a > 1.0:
        raise ValueError(f"dilation factor must exceed 1, got {a}")
    n_new = int(round(a * path.n_steps))
    if abs(a * path.n_steps - n_new) > 1e-6:
        raise ValueError(f"a={a} does not map {path.n_steps} steps onto the dt grid")
    return _resample(path, n_new)


@dataclass(frozen=True)
class Violation:
    """One validation finding: which rule, where, and a readable message."""

    kind: str          # "bounds" | "speed" | "duration" | "structural"
    index: int         # offending sample, or -1 for whole-path findings
    message: str


def validate(path: ControlPath, cfg: ProblemConfig) -> list[Violation]:
    """Check a path against the problem's constraints.

    Returns a list of violations (empty means valid): control bounds, the
    per-step speed limit, dt consistency, and structural soundness (finite
    samples).
    """
    out: list[Violation] = []
    bad = ~(np.isfinite(path.x0) & np.isfinite(path.amp))
    if bad.any():
        idx = int(np.argmax(bad))
        out.append(Violation("structural", idx, f"non-finite sample at index {idx}"))
        return out
    if abs(path.dt - cfg.dt) > 1e-12:
        out.append(Violation("duration", -1, f"path dt {path.dt} differs from config dt {cfg.dt}"))
    b = cfg.tweezer_bounds
    for name, arr, lo, hi in (("x0", path.x0, b.x_min, b.x_max),
                              ("amp", path.amp, b.amp_min, b.amp_max)):
        outside = (arr < lo - 1e-12) | (arr > hi + 1e-12)
        for idx in np.flatnonzero(outside):
            out.append(Violation("bounds", int(idx),
                                 f"{name}[{idx}]={arr[idx]:.6g} outside [{lo}, {hi}]"))
    speed = np.abs(np.diff(path.x0)) / path.dt
    for idx in np.flatnonzero(speed > b.max_speed + 1e-9):
        out.append(Violation("speed", int(idx),
                             f"|x0[{idx + 1}]-x0[{idx}]|/dt={speed[idx]:.6g} exceeds max_speed={b.max_speed}"))
    return out
