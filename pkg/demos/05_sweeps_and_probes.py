"""Penalty-weight sweep and non-Nash probes at a trained checkpoint.

Requires the run directory produced by 04_train_and_monitor.py.  The sweep
shows the penalized gap staying flat for small weights and rising toward
the plain gap past a threshold; the deviation probe shows a converged model
that a unilateral generator update still improves in value while making its
samples worse; the spectrum probe records the generator Hessian's sign
pattern at the same point.
"""

from pathlib import Path

from proxgap.harness import probe_cmd
from proxgap.harness.runner import lambda_sweep_cmd

RUN = Path("demo_runs/train_and_monitor")
ckpt = sorted(RUN.glob("checkpoint_*.npz"))[-1]
print(f"using checkpoint {ckpt}\n")

print("=" * 60)
print("1. penalty-weight sweep")
print("=" * 60)
out = lambda_sweep_cmd(ckpt, [0.01, 0.1, 1.0, 10.0, 100.0, 1e6],
                       RUN / "lambda_sweep.csv")
for line in out.read_text().splitlines():
    print("  " + line)

print()
print("=" * 60)
print("2. unilateral generator deviation")
print("=" * 60)
dev = probe_cmd(ckpt, "deviation", steps=300, lr=1e-3, eval_every=60,
                out=RUN / "deviation.csv")
print("  step  objective  histogram divergence")
for line in dev.read_text().splitlines()[1:]:
    step, value, div = line.split(",")
    print(f"  {step:>4}  {float(value):+9.4f}  {float(div):.4f}")
print("  (a falling objective with a rising divergence is the signature of")
print("   a stable point that is not a Nash point)")

print()
print("=" * 60)
print("3. generator Hessian spectrum")
print("=" * 60)
spec = probe_cmd(ckpt, "spectrum", k=5, out=RUN / "spectrum.json")
print("  " + spec.read_text().replace("\n", "\n  "))
