"""Generate the small census-like fixture CSVs shipped with the package.

The rows are synthetic: a handful of numeric attributes plus a categorical
occupation code and region/birthplace codes (with several rare levels, as in census extracts), whose
distributions shift with two sensitive attributes (sex and race group), and an
income target that is linear in the attributes plus noise.  Two splits are written,
a reference split (normalisation statistics) and a sampling split (the
candidate population).  Running this script is deterministic.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

RACE_SIZES = {"R1": 9000, "R2": 6500, "R3": 6000, "R4": 5600, "R5": 5300, "R6": 5100, "R7": 1200, "R8": 400}
# per-group shifts of (education, hours, occupation score); minorities skew lower
RACE_SHIFT = {
    "R1": (0.8, 2.0, 0.08),
    "R2": (-1.2, -1.0, -0.10),
    "R3": (1.6, 1.0, 0.12),
    "R4": (-1.8, -2.0, -0.12),
    "R5": (-0.4, 0.0, 0.0),
    "R6": (-2.4, -3.0, -0.18),
    "R7": (0.0, 0.0, 0.0),
    "R8": (-1.0, -1.0, -0.05),
}
# occupation levels: probability and income effect
OCC_PROBS = np.array([0.24, 0.15, 0.12, 0.10, 0.08, 0.07, 0.06, 0.05, 0.04, 0.03, 0.025, 0.015, 0.01, 0.008, 0.006, 0.004])
OCC_EFFECT = np.array([0, 6000, -4000, 9000, -7000, 3000, 12000, -2000, 8000, -6000, 3000, 4000, -3000, 2000, 5000, -2000])
# region of residence: many levels, mostly rare, negligible income effect
REG_PROBS = np.array([0.30, 0.15, 0.10, 0.08, 0.06, 0.05, 0.04, 0.04, 0.03, 0.03, 0.025, 0.02, 0.02, 0.015, 0.01, 0.01, 0.008, 0.006, 0.005, 0.004])
REG_EFFECT = np.array([0, 500, -300, 800, -600, 200, 0, -400, 600, -200, 300, 0, -500, 400, -100, 700, -700, 100, 0, -300])
# place of birth: a long tail of rare levels with no income effect
POB_LEVELS = 60
POB_PROBS = np.concatenate([[0.6], np.full(POB_LEVELS - 1, 0.4 / (POB_LEVELS - 1))])

COLUMNS = ["AGEP", "SCHL", "WKHP", "OCCSCORE", "MAR", "COMMUTE", "OCCP", "REGION", "POBP", "SEX", "RACE", "PINCP"]


def make_split(rng: np.random.Generator, scale: float) -> list[list]:
    rows = []
    for race, size in RACE_SIZES.items():
        n = int(round(size * scale))
        de, dh, do = RACE_SHIFT[race]
        sex = rng.choice(["M", "F"], size=n)
        female = sex == "F"
        age = np.clip(rng.normal(42, 12, n), 18, 80)
        schl = np.clip(rng.normal(14 + de, 2.5, n), 6, 22)
        hours = np.clip(rng.normal(40 + dh - 4 * female, 9, n), 5, 80)
        occ = np.clip(rng.normal(0.5 + do - 0.05 * female + 0.02 * (schl - 14), 0.15, n), 0, 1)
        mar = (rng.random(n) < 0.5).astype(float)
        commute = np.clip(rng.gamma(2.0, 12.0, n), 0, 150)
        occp = rng.choice(len(OCC_PROBS), size=n, p=OCC_PROBS / OCC_PROBS.sum())
        reg = rng.choice(len(REG_PROBS), size=n, p=REG_PROBS / REG_PROBS.sum())
        pob = rng.choice(POB_LEVELS, size=n, p=POB_PROBS)
        income = (
            -60000
            + 600 * age
            + 3500 * schl
            + 700 * hours
            + 40000 * occ
            + 4000 * mar
            - 30 * commute
            + OCC_EFFECT[occp]
            + REG_EFFECT[reg]
            + rng.normal(0, 12000, n)
        )
        for i in range(n):
            rows.append([
                f"{age[i]:.1f}", f"{schl[i]:.1f}", f"{hours[i]:.1f}", f"{occ[i]:.4f}",
                f"{mar[i]:.0f}", f"{commute[i]:.1f}",
                f"O{occp[i]:02d}", f"G{reg[i]:02d}", f"P{pob[i]:02d}",
                sex[i], race, f"{income[i]:.0f}",
            ])
    order = rng.permutation(len(rows))
    return [rows[i] for i in order]


def write(path: Path, rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows(rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/fairbandits/data"))
    ap.add_argument("--seed", type=int, default=2017)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    write(out / "census_fixture_reference.csv", make_split(rng, 0.25))
    write(out / "census_fixture_sampling.csv", make_split(rng, 1.0))


if __name__ == "__main__":
    main()
