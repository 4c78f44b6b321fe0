"""Full training pipeline driver; resumable via stage checkpoints."""
import sys, time
sys.stdout.reconfigure(line_buffering=True)
from flowsur.pipeline import train_all

t0 = time.time()
train_all("/root/pkg/artifacts", "/root/pkg/artifacts", stage="all", seed=0)
print(f"TRAINING DONE in {(time.time()-t0)/3600:.2f} h")
