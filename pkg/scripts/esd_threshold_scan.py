"""Locate the temperature below which entanglement never dies within 6/Upsilon.

Prints the ESD time and the smallest post-entanglement negativity per
temperature, so runs where the negativity only grazes the threshold show up.

    python scripts/esd_threshold_scan.py --temperatures 0.01,0.02,0.05,0.1 --samples 2001
"""

import argparse

import numpy as np

from pairloss.entanglement import ESD_THRESHOLD, detect_esd
from pairloss.experiments import RunConfig, resolve, simulate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--temperatures", default="0.01,0.02,0.03,0.05,0.07,0.1")
    ap.add_argument("--samples", type=int, default=2001)
    args = ap.parse_args()
    for T in (float(x) for x in args.temperatures.split(",")):
        cfg = resolve(RunConfig(scenario="fig2c", temperature=T, sample_count=args.samples))
        traj = simulate(cfg)
        neg = traj.column("negativity")
        first = int(np.argmax(neg > ESD_THRESHOLD))
        esd, rebirth = detect_esd(traj.times, neg)
        esd_text = "none" if esd is None else f"{esd:.4g}"
        print(f"T={T:g}: esd {esd_text}, rebirth {rebirth}, min negativity after onset {neg[first:].min():.3g}")


if __name__ == "__main__":
    main()
