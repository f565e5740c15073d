"""Run the preset scenarios and write their CSV and manifest files.

    python scripts/reproduce_figures.py --out runs [--only fig1 fig2c] [--workers 4]
"""

import argparse
import time
from pathlib import Path

from pairloss.experiments import RunConfig, run_scenario, sweep_temperature

SCENARIOS = ("fig1", "fig2a", "fig2c", "fig3")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs")
    ap.add_argument("--only", nargs="+", choices=SCENARIOS, default=list(SCENARIOS))
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    for name in args.only:
        cfg = RunConfig(scenario=name, output_path=str(Path(args.out) / name))
        start = time.perf_counter()
        if name == "fig3":
            for row in sweep_temperature(cfg, workers=args.workers):
                esd = "none" if row.esd_time is None else f"{row.esd_time:.4g}"
                print(f"  T={row.temperature:g}: esd {esd}, final negativity {row.negativity_at_t_final:.4g}")
        else:
            traj, _ = run_scenario(cfg)
            rec = traj.records[-1]
            print(f"  final t={rec.time:.4g} P00={rec.p00:.5f} negativity={rec.negativity:.5f}")
        print(f"{name}: {time.perf_counter() - start:.1f} s -> {cfg.output_path}")


if __name__ == "__main__":
    main()
