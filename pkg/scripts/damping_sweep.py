#!/usr/bin/env python3
"""Spectral radius of the amplification matrix over z = lambda*dt < 0.

Shows the controllable high-frequency damping: as z -> -inf the spectral
radius approaches rho_inf (slowly for rho_inf = 0, whose infinite-step
matrix is nilpotent).
"""

import numpy as np

from genalpha import amplification_matrix, params_from_rho_inf, spectral_radius


def main():
    z_values = [-(10.0 ** k) for k in range(-2, 9)]
    rhos = (0.0, 0.5, 1.0)
    header = "z".rjust(12) + "".join(f"  rho_inf={r:<6}" for r in rhos)
    print(header)
    for z in z_values:
        row = f"{z:12.3g}"
        for rho in rhos:
            sr = spectral_radius(amplification_matrix(z, params_from_rho_inf(rho)))
            row += f"  {sr:13.6e}"
        print(row)


if __name__ == "__main__":
    main()
