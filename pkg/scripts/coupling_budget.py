#!/usr/bin/env python3
"""Walk the coupling-constant budget from mode volume to collective coupling."""

import argparse

from spincavity import experiments as ex
from spincavity import spin_models as sm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--density", type=float, default=ex.SAMPLE1_NV_PPM, help="ppm")
    ap.add_argument("--volume", type=float, default=ex.SAMPLE1_VOLUME_MM3, help="mm^3")
    ap.add_argument("--orientation", type=float, default=0.5,
                    help="fraction of bond orientations that tune through the cavity")
    ap.add_argument("--nuclear", type=float, default=1.0,
                    help="fraction of nuclear projections in the addressed line")
    ap.add_argument("--filling", type=float, default=1.0)
    ap.add_argument("--mode-volume", type=float, default=ex.MODE_VOLUME_MM3, help="mm^3")
    ap.add_argument("--weight", type=float, default=ex.DEFAULT_TRANSITION_WEIGHT,
                    help="squared drive matrix element of the transition")
    args = ap.parse_args()

    budget = ex.coupling_budget(
        density_ppm=args.density,
        volume_mm3=args.volume,
        orientation_fraction=args.orientation,
        nuclear_fraction=args.nuclear,
        filling_factor=args.filling,
        mode_volume_mm3=args.mode_volume,
        transition_weight=args.weight,
    )
    print(f"mode volume        {args.mode_volume:g} mm^3 at {ex.OMEGA_R_MHZ:g} MHz")
    print(f"vacuum B_rms       {budget['brms_pt']:.3f} pT")
    print(f"single-spin g      {budget['g_single_hz']:.4f} Hz "
          f"(gamma_e {sm.GAMMA_E:g} MHz/mT, weight {args.weight:g})")
    print(f"effective spins    {budget['n_spins']:.4g} "
          f"({args.density:g} ppm in {args.volume:g} mm^3, "
          f"orientation {args.orientation:g}, nuclear {args.nuclear:g})")
    print(f"ensemble coupling  {budget['g_ens_mhz']:.3f} MHz (filling {args.filling:g})")


if __name__ == "__main__":
    main()
