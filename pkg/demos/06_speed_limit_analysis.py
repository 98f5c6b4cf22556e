"""Fidelity-duration trade-off and the direct Hilbert velocity.

For a family of solutions traced across durations, fidelity falls below 1
under some duration; the rate of that fall is governed by
dF/dT = 2 sqrt(F (1-F)) <Q>_T, where Q measures how fast the state moves
toward the back-propagated target.  We verify the relation numerically and
fit sin^2(aT + b) to the family's fidelity curve, the shape expected when
<Q>_T is duration-independent.

Run:  python demos/06_speed_limit_analysis.py
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tweezerlab import (
    OptimizerParams,
    ProblemConfig,
    base_motion,
    hilbert_velocity,
    optimize,
    qsl_fit,
    sweep_down,
    uniform_extension_dfdt,
)

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

cfg = ProblemConfig()
root = optimize(base_motion(cfg, 0.32), cfg, OptimizerParams(max_iters=300),
                lineage={"kind": "base"})
family = sweep_down(root, 0.12, cfg, OptimizerParams(max_iters=60))
print(f"family of {len(family)} members, F from {family.fidelities[0]:.4f} "
      f"down to {family.fidelities[-1]:.4f}")

rows = []
for sol in family.members:
    if 0.05 <= sol.fidelity <= 0.99:
        hv = hilbert_velocity(sol, cfg)
        predicted = 2.0 * np.sqrt(sol.fidelity * (1 - sol.fidelity)) * hv.mean
        measured = uniform_extension_dfdt(sol, cfg)
        rows.append((sol.duration, sol.fidelity, hv.mean, predicted, measured))
rows = np.array(rows)
rel = np.abs(rows[:, 3] - rows[:, 4]) / np.abs(rows[:, 4])
print(f"trade-off relation check on {len(rows)} members: "
      f"median deviation {np.median(rel):.2%}, worst {rel.max():.2%}")

fit = qsl_fit(family)
print(f"sin^2(aT+b) fit: a={fit.a:.3f} b={fit.b:.3f} -> T_QSL={fit.t_qsl:.3f}, "
      f"RMS residual {fit.residual:.3g} (nonzero residual = deviation from the "
      f"universal shape)")

fig, axes = plt.subplots(1, 2, figsize=(11, 4.2))
axes[0].plot(family.durations, family.fidelities, "b.-", lw=0.8, label="family")
tt = np.linspace(family.durations.min(), family.durations.max(), 200)
axes[0].plot(tt, np.sin(fit.a * tt + fit.b) ** 2, "r--", label="sin^2 fit")
axes[0].set_xlabel("T")
axes[0].set_ylabel("fidelity")
axes[0].legend()

axes[1].plot(rows[:, 0], rows[:, 4], "k.", label="finite difference dF/dT")
axes[1].plot(rows[:, 0], rows[:, 3], "r+", label="2 sqrt(F(1-F)) <Q>")
axes[1].set_xlabel("T")
axes[1].legend()
fig.tight_layout()
fig.savefig(out_dir / "06_speed_limit.png", dpi=120)
print(f"wrote {out_dir / '06_speed_limit.png'}")
