"""Train a small adversarial generator on a two-mode mixture and monitor
convergence with both duality gaps.

The plain gap searches the generator's worst case against the frozen
discriminator and stays noisy; the penalized gap confines that search to a
neighbourhood of the current discriminator and tracks the histogram
divergence closely.  Writes its run directory under ./demo_runs/.
"""

import shutil
import time
from pathlib import Path

from proxgap.harness import config_from_text, correlate, read_metrics, train

OUT = Path("demo_runs/train_and_monitor")
if OUT.exists():
    shutil.rmtree(OUT)

cfg = config_from_text(f"""
seed = 2
out = {OUT}
train.steps = 1200
train.checkpoint_every = 150
train.ratio = 2
train.batch = 256
optim.lr_d = 1e-3
optim.lr_g = 3e-4
disc.hidden = 32 32
gen.hidden = 32 32
latent.dim = 4
distribution.means = -1.2 0; 1.2 0
distribution.variances = 0.09 0.09; 0.09 0.09
prox.worst_iters = 100
prox.worst_lr = 5e-3
""")

print("training a probabilistic-objective model on a 2-mode mixture ...")
t0 = time.time()
run_dir = train(cfg)
print(f"done in {time.time() - t0:.0f}s -> {run_dir}\n")

rows = read_metrics(run_dir / "metrics.csv")
print(f"{'step':>6} {'plain gap':>10} {'penalized gap':>14} {'hist JSD':>9}")
for r in rows:
    print(f"{r.step:6.0f} {r.dg_plain:10.3f} {r.dg_lambda:14.3f}"
          f" {r.hist_jsd:9.3f}")

rep = correlate(run_dir / "metrics.csv")
print(f"\ncorrelation with the divergence trajectory:")
print(f"  penalized gap: r = {rep.r_dg_lambda:+.3f}")
print(f"  plain gap    : r = {rep.r_dg_plain:+.3f}")
print("\nthe penalized gap is the better convergence monitor whenever the")
print("model settles somewhere that is not a saddle of the raw objective.")
