"""Sample paths of the subordinators and the counting processes.

Draws one path of each process on a common grid and saves a figure when
matplotlib is available; otherwise prints compact path summaries.
"""

import numpy as np

from fracount import FnbpLaw, FppLaw, GammaLaw, PathConfig, RngStream, SfppLaw
from fracount.paths import (
    fnbp_paths,
    fpp_path,
    inverse_stable_path,
    polya_path,
    sfpp_path,
)

rng = RngStream(20260810, 1)
gamma = GammaLaw(2.0, 1.0)
cfg = PathConfig(t_max=10.0, steps=200, mesh=1.0 / 256)

paths = {
    "inverse stable clock (beta=0.6)": inverse_stable_path(0.6, cfg, rng.child(0)),
    "FPP (beta=0.6, lam=1)": fpp_path(FppLaw(0.6, 1.0), cfg, rng.child(1)),
    "FNBP (beta=0.5)": fnbp_paths(FnbpLaw(FppLaw(0.5, 1.0), gamma), cfg, rng.child(2))[0],
    "Polya": polya_path(gamma, cfg, rng.child(3)),
    "SFPP (beta=0.5)": sfpp_path(SfppLaw(0.5, gamma), cfg, rng.child(4)),
}

for name, path in paths.items():
    v = np.asarray(path.values, dtype=float)
    print(f"{name:<32} end value {v[-1]:>8.2f}   jumps {int(np.sum(np.diff(v) > 0)):>4}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(len(paths), 1, figsize=(8, 11), sharex=True)
    for ax, (name, path) in zip(axes, paths.items()):
        ax.step(path.times, path.values, where="post", lw=1)
        ax.set_ylabel(name, fontsize=7)
    axes[-1].set_xlabel("t")
    fig.tight_layout()
    fig.savefig("demo_sample_paths.png", dpi=120)
    print("\nwrote demo_sample_paths.png")
except ImportError:
    print("\nmatplotlib not installed; skipped the figure")
