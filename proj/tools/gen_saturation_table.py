#!/usr/bin/env python3
"""Regenerate data/saturation_co2.csv from CoolProp (CO2 saturation line)."""
import sys

import CoolProp.CoolProp as CP


def main(path):
    rows = []
    p = 6.0
    while p <= 72.0 + 1e-9:
        pa = p * 1e5
        rows.append((p,
                     CP.PropsSI("D", "P", pa, "Q", 0, "CO2"),
                     CP.PropsSI("D", "P", pa, "Q", 1, "CO2"),
                     CP.PropsSI("H", "P", pa, "Q", 0, "CO2"),
                     CP.PropsSI("H", "P", pa, "Q", 1, "CO2")))
        p = round(p + 0.5, 1)
    with open(path, "w", newline="\n") as f:
        f.write("p_bar,rho_liq,rho_gas,h_liq,h_gas\n")
        for r in rows:
            f.write("%.1f,%.4f,%.4f,%.2f,%.2f\n" % r)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/saturation_co2.csv")
