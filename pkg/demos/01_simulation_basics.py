"""Tour of the simulation layer: traps, ground states, time evolution.

The atom lives on a periodic 1D grid in dimensionless units (hbar = m = 1).
A deep static Gaussian well at x = +0.5 holds it; a movable tweezer well
(the control) starts parked at x = -0.5.  We build the potentials, find
ground states, propagate the Schrodinger equation with the split-step
scheme, and watch what a crude constant-speed transport attempt does.

Run:  python demos/01_simulation_basics.py
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tweezerlab import (
    ProblemConfig,
    TweezerState,
    base_motion,
    build_potential,
    evolve,
    fidelity,
    populations,
    stationary_states,
)

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

cfg = ProblemConfig()
x = cfg.grid.x
print(f"grid: {cfg.grid.n_points} points on [{cfg.grid.x_min}, {cfg.grid.x_max}], dt={cfg.dt}")

# The combined potential at t = 0: static trap plus the parked tweezer.
v0 = build_potential(cfg.target_trap, cfg)
psi0 = cfg.initial_state()     # ground state of the static trap
chi = cfg.target_state()       # goal: ground state of the parked tweezer

print(f"initial overlap with the target: {fidelity(psi0, chi):.2e}  (the atom is far away)")

# Lowest few stationary states of the static trap; the well is deep, so the
# lowest levels look harmonic with omega = 2 sqrt(130)/0.25 ~ 91.
states = stationary_states(cfg.static_potential, 4, cfg)
print("static-trap levels:", ", ".join(f"{e:.2f}" for e, _ in states))
spacing = states[1][0] - states[0][0]
print(f"level spacing {spacing:.2f} vs harmonic 91.2 (anharmonic corrections shift it)")

# Drag the tweezer out and back at constant speed, the obvious first try.
T = 0.40
path = base_motion(cfg, T)
traj = evolve(psi0, path, cfg, store=10)
f_final = fidelity(traj.final_state, chi)
print(f"constant-speed transport at T={T}: fidelity {f_final:.3f} - fast motion sloshes the atom")

fig, axes = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
axes[0].plot(x, v0, "b-", lw=1)
axes[0].plot(x, cfg.static_potential, "k--", lw=0.8, label="static trap alone")
axes[0].set_ylabel("V(x)")
axes[0].legend()
axes[0].set_title("potential at t = 0")

for i in range(0, len(traj), max(1, len(traj) // 6)):
    axes[1].plot(x, traj.states[i].real**2 + traj.states[i].imag**2,
                 label=f"t={traj.times[i]:.2f}")
axes[1].set_xlabel("x")
axes[1].set_ylabel("|psi|^2")
axes[1].legend(fontsize=7)
axes[1].set_title("density snapshots under the constant-speed drag")
fig.tight_layout()
fig.savefig(out_dir / "01_transport_attempt.png", dpi=120)
print(f"wrote {out_dir / '01_transport_attempt.png'}")

# How spread out does the final state end up?
p = populations(traj.final_state, v0, 8, cfg)
print("final populations in the t=0 potential's lowest levels:",
      np.array2string(p, precision=3, suppress_small=True))
