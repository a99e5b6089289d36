"""Write witness, state and certificate JSON for a small parameter sweep."""
from __future__ import annotations

import argparse
from pathlib import Path

from ewkit.cli import main as cli_main


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="artifacts")
    args = ap.parse_args()
    out = Path(args.out)
    runs = {
        "reduction_n3": ["witness", "--family", "reduction", "--n", "3", "--out", str(out / "w_reduction_n3.json")],
        "gen_reduction_n4": ["witness", "--family", "gen-reduction", "--n", "4", "--z", "all:-1",
                             "--out", str(out / "w_gen_reduction_n4.json")],
        "gen_robertson_k3": ["witness", "--family", "gen-robertson", "--k", "3", "--z", "1,2:pi/3, 2,3:-1",
                             "--out", str(out / "w_gen_robertson_k3.json")],
        "spa_reduction_n3": ["spa", str(out / "w_reduction_n3.json")],
        "optimality_k3": ["optimality", str(out / "w_gen_robertson_k3.json")],
        "state_k3": ["state-ppt", "--k", "3", "--z", "1,2:pi/3, 2,3:-1", "--out", str(out / "rho_k3.json")],
        "separable_n3": ["certify-spa-separable", "--n", "3", "--z", "all:-1", "--out", str(out / "sep_n3.json")],
        "phi6": ["phi6"],
    }
    for name, argv in runs.items():
        code = cli_main(["--report", str(out / f"report_{name}.json"), *argv])
        print(f"{name:<20} exit {code}")


if __name__ == "__main__":
    main()
