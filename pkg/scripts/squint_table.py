"""Print the normalized array gain of the three combiners across the band.

    python3 scripts/squint_table.py --rows 100 --cols 100 --subcarriers 18
"""
import argparse
import math

import numpy as np

from thzsim.array_model import ArrayGeometry, Direction
from thzsim.channel_model import OfdmGrid
from thzsim.combining import (
    auto_partition,
    build_ttd_combiner,
    digital_combiner,
    narrowband_combiner,
    normalized_array_gain,
)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--rows", type=int, default=100)
    p.add_argument("--cols", type=int, default=100)
    p.add_argument("--carrier-ghz", type=float, default=300.0)
    p.add_argument("--bandwidth-ghz", type=float, default=40.0)
    p.add_argument("--subcarriers", type=int, default=18)
    p.add_argument("--azimuth-deg", type=float, default=60.0)
    p.add_argument("--polar-deg", type=float, default=45.0)
    args = p.parse_args(argv)

    geom = ArrayGeometry.half_wavelength(args.rows, args.cols, args.carrier_ghz * 1e9)
    bw = args.bandwidth_ghz * 1e9
    d = Direction(math.radians(args.azimuth_deg), math.radians(args.polar_deg))
    f = OfdmGrid(args.subcarriers, bw).freqs
    part = auto_partition(geom, bw)
    gains = {
        "narrowband": normalized_array_gain(narrowband_combiner(geom, d), geom, d, f),
        "proposed": normalized_array_gain(build_ttd_combiner(geom, d, part).column(f), geom, d, f),
        "digital": normalized_array_gain(digital_combiner(geom, d, f), geom, d, f),
    }
    print(f"# {geom.rows}x{geom.cols}, partition {part.n_sb}x{part.m_sb}, B = {args.bandwidth_ghz:g} GHz")
    print(f"{'f [GHz]':>9} " + " ".join(f"{k:>11}" for k in gains))
    for s in range(f.size):
        print(f"{f[s] / 1e9:9.3f} " + " ".join(f"{gains[k][s]:11.4f}" for k in gains))
    print(f"{'min':>9} " + " ".join(f"{np.min(v):11.4f}" for v in gains.values()))


if __name__ == "__main__":
    main()
