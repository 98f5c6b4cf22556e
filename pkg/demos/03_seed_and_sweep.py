"""A miniature random-seed campaign with duration sweeps.

Every seed is the constant-speed reference motion roughened by a random
sine series; each optimized solution is then contracted one time step at a
time and re-optimized, tracing a family of solutions across durations.
The best-fidelity envelope over families shows where solutions stop being
perfect: the apparent speed limit.  (Desk-scale: a handful of seeds and a
modest per-duration budget; expect a few minutes.)

Run:  python demos/03_seed_and_sweep.py
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from tweezerlab import OptimizerParams, ProblemConfig, SeedSpectrum, kass_campaign
from tweezerlab.archive import write_campaign

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

cfg = ProblemConfig()
result = kass_campaign(
    n_seeds=4,
    cfg=cfg,
    params=OptimizerParams(max_iters=40),
    root_params=OptimizerParams(max_iters=300),
    spectrum=SeedSpectrum(rng_seed=0),
    t_start=0.40,
    t_min=0.20,
    goal=0.99,    # at this tiny budget the 0.99 frontier is the readable one
)

print(f"{len(result.families)} families; apparent speed limit (F=0.99): {result.qsl}")
archive_dir = write_campaign(out_dir / "mini_campaign", result, cfg)
print(f"archive written to {archive_dir}")

fig, ax = plt.subplots(figsize=(8, 5))
for i, fam in enumerate(result.families):
    ax.plot(fam.durations, fam.fidelities, lw=0.8, alpha=0.6, label=f"family {i}")
ax.plot(result.envelope.durations, result.envelope.best_fidelity, "k-", lw=2,
        label="envelope")
if result.qsl:
    ax.axvline(result.qsl, color="r", ls=":", label=f"apparent QSL {result.qsl:.3f}")
ax.axhline(0.99, color="gray", ls="--", lw=0.7)
ax.set_xlabel("process duration T")
ax.set_ylabel("fidelity")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(out_dir / "03_envelope.png", dpi=120)
print(f"wrote {out_dir / '03_envelope.png'}")
