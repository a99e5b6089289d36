"""Print the headline numbers next to their closed forms."""
from __future__ import annotations

import argparse

import numpy as np

from ewkit.config import default_seed
from ewkit.positive_maps import MapSpec, PhaseCollection
from ewkit.states import phi6_spa_decomposition, ppt_entangled_state
from ewkit.witness_engine import choi_of_map, robertson_spectrum_profile, spa


def row(label, got, want):
    print(f"{label:<44} {got:>+.12f} {want:>+.12f} {abs(got - want):.1e}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(default_seed())
    print(f"{'quantity':<44} {'computed':>16} {'closed form':>16} err")
    for n in range(2, args.nmax + 1):
        r = spa(choi_of_map(MapSpec("reduction", n)))
        row(f"reduction n={n}: lambda_min", r.lambda_min, -1 / n)
        row(f"reduction n={n}: p*", r.p_star, 1 / (n + 1))
    for n in range(3, args.nmax + 1):
        r = spa(choi_of_map(MapSpec("gen-reduction", n, PhaseCollection.uniform(n, -1))))
        row(f"gen-reduction z=-1 n={n}: lambda_min", r.lambda_min, -1 / (n * (n - 1)))
        row(f"gen-reduction z=-1 n={n}: p*", r.p_star, (n - 1) / (2 * n - 1))
    for k in (2, 3):
        prof = robertson_spectrum_profile(k)
        row(f"Robertson k={k}: negative eigenvalue", prof["negatives"][0][0], -1 / (2 * k))
        z = PhaseCollection.random_unimodular(k, rng)
        s = ppt_entangled_state(k, z)
        row(f"PPT state k={k}, random z: Tr(W rho)", s.certificates["detection"]["value"], -1 / (24 * k * (k - 1)))
    res = phi6_spa_decomposition()
    print(f"Phi_6 SPA: twirl={res['twirl']} coefficients={np.round(res['coefficients'], 6).tolist()} "
          f"residual={res['residual']:.1e}")


if __name__ == "__main__":
    main()
