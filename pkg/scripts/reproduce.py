"""Build the default reward surface, run the closed-loop experiment and print the headline numbers.

    python scripts/reproduce.py [--out out] [--seeds 20]

Writes out/reward_map/ and out/supervise/ exactly as the CLI would, then
repeats the supervised run over seeds 0..N-1 for the variance comparison.
"""

import argparse
import json
import sys
from pathlib import Path

from hitl.cli import main as cli
from hitl.reward import load_surface
from hitl.supervisor import SupervisorConfig, run

CONFIGS = Path(__file__).resolve().parent / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="out")
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()
    out = Path(args.out)
    surface_csv = out / "reward_map" / "surface.csv"
    if not surface_csv.exists():
        rc = cli(["reward-map", str(CONFIGS / "reward_map.json"), "--out", str(out / "reward_map")])
        if rc:
            return rc
    sup = json.loads((CONFIGS / "supervise.json").read_text())
    sup["surface"]["path"] = str(surface_csv)
    cfg = out / "supervise.json"
    cfg.write_text(json.dumps(sup, indent=2))
    rc = cli(["supervise", str(cfg), "--out", str(out / "supervise")])
    if rc:
        return rc
    summary = json.loads((out / "supervise" / "summary.json").read_text())
    print(f"mean p_bar {summary['mean_p_bar']:.4f}   var p_bar {summary['var_p_bar']:.6f}   "
          f"var p0 {summary['var_p0']:.6f}   containment {summary['containment']:.3f}")
    surface = load_surface(surface_csv)
    wins = 0
    for seed in range(args.seeds):
        res = run(surface, SupervisorConfig(seed=seed))
        wins += res.var_p_bar < res.var_p0
    print(f"Var(p_bar) < Var(p0) in {wins}/{args.seeds} seeds")
    long = run(surface, SupervisorConfig(n_tasks=10_000))
    print(f"containment over 10^4 tasks: {long.containment:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
