"""Clustering solutions into clans and flattening the landscape to 2D.

A solution set at a fixed duration is compared pairwise: either by the
time-averaged distance between the evolving states, or by the Manhattan
distance between the rescaled control paths.  A greedy nearest-unvisited
ordering turns the matrix into a reachability sequence whose valleys are
clans; an incremental triangle construction gives 2D coordinates whose
Euclidean distances approximate the control-space distances.

Run:  python demos/05_clans_and_landscape.py
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tweezerlab import (
    OptimizerParams,
    ProblemConfig,
    SeedSpectrum,
    distance_matrix,
    embed_2d,
    extract_clans,
    optimize,
    random_sin_seed,
    reachability_order,
)
from tweezerlab.hilo import direct_search

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

cfg = ProblemConfig()
T = 0.15
budget = OptimizerParams(max_iters=80)

# Mix two seeding strategies so the set contains distinct basins.
solutions = [r.solution for r in direct_search(cfg, budget, T=T, grid_shape=(3, 3, 3))]
for s in range(10):
    solutions.append(optimize(random_sin_seed(cfg, T, SeedSpectrum(rng_seed=s)),
                              cfg, budget, lineage={"kind": "random", "rng_seed": s},
                              store_trajectory=2))
print(f"{len(solutions)} solutions at T={T}")

dm_state = distance_matrix(solutions, "state", cfg)
order, dists = reachability_order(dm_state, rng=0)
clans = extract_clans(order, dists, threshold=0.05, min_size=4, solutions=solutions)
print(f"{len(clans)} clans of sizes {[c.size for c in clans]} "
      f"(threshold 0.05 on consecutive state distance)")

dm_ctrl = distance_matrix(solutions, "control", cfg)
emb = embed_2d(dm_ctrl, rng=0, fidelities=np.array([s.fidelity for s in solutions]))

fig, axes = plt.subplots(1, 3, figsize=(15, 4.5))
im = axes[0].imshow(dm_state.values[np.ix_(order, order)], cmap="viridis")
axes[0].set_title("state-distance map (reachability order)")
plt.colorbar(im, ax=axes[0], shrink=0.8)

axes[1].plot(dists, "k.-", lw=0.7)
axes[1].axhline(0.05, color="r", ls="--", lw=0.8, label="clan threshold")
axes[1].set_title("reachability plot (valleys = clans)")
axes[1].set_xlabel("position in ordering")
axes[1].set_ylabel("distance to previous")
axes[1].legend()

sc = axes[2].scatter(emb.coords[:, 0], emb.coords[:, 1], c=emb.fidelities,
                     cmap="plasma", s=40)
axes[2].set_title("2D landscape embedding (color = fidelity)")
plt.colorbar(sc, ax=axes[2], shrink=0.8)
fig.tight_layout()
fig.savefig(out_dir / "05_clans_landscape.png", dpi=120)
print(f"wrote {out_dir / '05_clans_landscape.png'}")
