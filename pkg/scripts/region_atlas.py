"""Print the DoF region of every configuration in a box, one line each.

    python3 scripts/region_atlas.py --max 4 --scenario crc-full
"""

import argparse
import itertools

from dof_atlas.regions import AntennaConfig, RegionError, format_halfspace, format_rational
from dof_atlas.cli import build_region


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max", type=int, default=4, help="largest antenna count")
    ap.add_argument("--scenario", default="ic-nocsit",
                    choices=["ic-nocsit", "crc-nocsit-iid", "crc-nocsit-corr", "crc-full"])
    args = ap.parse_args()

    covered = skipped = 0
    for t in itertools.product(range(1, args.max + 1), repeat=4):
        try:
            region = build_region(args.scenario, AntennaConfig(*t))
        except RegionError:
            skipped += 1
            continue
        covered += 1
        verts = " ".join(f"({format_rational(v.d1)},{format_rational(v.d2)})" for v in region.vertices)
        bounds = "; ".join(format_halfspace(h) for h in region.minimal() if h.label != "nonneg")
        print(f"{t}: {bounds} | {verts}")
    print(f"# {covered} configurations covered, {skipped} outside the regime")


if __name__ == "__main__":
    main()
