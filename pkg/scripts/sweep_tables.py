"""Write CSV tables of the cheap identity checks over parameter grids.

Usage: python3 scripts/sweep_tables.py [out_dir]   (default: ./tables)
"""
import pathlib
import sys

from intertwine.cli import main as cli

SWEEPS = {
    "cowboy.csv": ["--check", "cowboy", "--sweep", "s=0.1:0.9:0.1", "--sweep", "B=0.5:5:1.5",
                   "--mu", "1"],
    "h_deriv.csv": ["--check", "h_deriv", "--sweep", "s=0.1:0.9:0.2", "--sweep", "rho=0.5:4.5:1",
                    "--mu", "2"],
    "theorem_a_h1.csv": ["--check", "theorem_a", "--family", "heisenberg", "--n", "1",
                         "--sweep", "s=0.1:0.9:0.2", "--sweep", "y=0.5:2:0.5",
                         "--z", "0.5,0", "--sigma", "0.1"],
    "euclid.csv": ["--check", "euclid_intertwine", "--n", "3", "--sweep", "s=0.1:0.9:0.2",
                   "--sweep", "y=0.5:2:0.5", "--z", "1,0,0"],
}


def main(out_dir: str) -> int:
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    worst = 0
    for name, args in SWEEPS.items():
        code = cli(["table", *args, "--out", str(out / name), "--jobs", "4"])
        print(f"{name}: exit {code}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main(sys.argv[1] if len(sys.argv) > 1 else "tables"))
