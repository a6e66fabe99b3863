#!/usr/bin/env python3
"""Sweep the port coupling capacitance and compare circuit Qs against fits.

For each cc the lumped network is solved for its two-port transmission, the
transmitted power is fit with a Lorentzian, and the external Q extracted from
peak height and width is compared to the closed-form decomposition.
"""

import argparse

import numpy as np

from spincavity import circuit_model as cm
from spincavity import experiments as ex
from spincavity import fitting as ft


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=9)
    ap.add_argument("--qext-min", type=float, default=ex.Q_EXT_MIN)
    ap.add_argument("--qext-max", type=float, default=ex.Q_EXT_MAX)
    args = ap.parse_args()

    cc_lo = ex.cc_for_qext(args.qext_max)
    cc_hi = ex.cc_for_qext(args.qext_min)
    print(f"cc {cc_lo:.2f}..{cc_hi:.2f} fF spans Q_ext "
          f"{args.qext_max:g}..{args.qext_min:g}")
    print(f"{'cc_fF':>7} {'f0_MHz':>10} {'Q_int':>7} {'Q_ext':>9} "
          f"{'Q_ext_fit':>10} {'diff_%':>7}")
    for cc in np.linspace(cc_lo, cc_hi, args.points):
        elems = ex.loop_gap_elements(cc)
        f0, q_int, q_e1, q_e2 = cm.q_decomposition(elems)
        q_ext = 1.0 / (1.0 / q_e1 + 1.0 / q_e2)
        grid, s21 = ex.loop_gap_trace(elems)
        # fit the power so the fitted width is the -3 dB width
        fit = ft.fit_lorentzian(ft.Spectrum1D(grid, np.abs(s21) ** 2))
        peak_amp = np.sqrt(fit.params["amplitude"] + fit.params["baseline"])
        qs = ft.extract_qs(fit, peak_amp)
        diff = 100 * (qs["q_ext"] - q_ext) / q_ext
        print(f"{cc:7.3f} {f0:10.2f} {q_int:7.1f} {q_ext:9.1f} "
              f"{qs['q_ext']:10.1f} {diff:+7.3f}")


if __name__ == "__main__":
    main()
