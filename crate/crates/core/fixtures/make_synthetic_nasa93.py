"""Writes a synthetic 93-project COCOMO-81 data set in the PROMISE nasa93
layout (ARFF and CSV). Effort follows the intermediate COCOMO equation with
multiplicative log-normal noise. Run from this directory; output is
deterministic."""

import csv
import math
import random

LEVELS = ["vl", "l", "n", "h", "vh", "xh"]

MULTIPLIERS = {
    "rely": {"vl": 0.75, "l": 0.88, "n": 1.00, "h": 1.15, "vh": 1.40},
    "data": {"l": 0.94, "n": 1.00, "h": 1.08, "vh": 1.16},
    "cplx": {"vl": 0.70, "l": 0.85, "n": 1.00, "h": 1.15, "vh": 1.30, "xh": 1.65},
    "time": {"n": 1.00, "h": 1.11, "vh": 1.30, "xh": 1.66},
    "stor": {"n": 1.00, "h": 1.06, "vh": 1.21, "xh": 1.56},
    "virt": {"l": 0.87, "n": 1.00, "h": 1.15, "vh": 1.30},
    "turn": {"l": 0.87, "n": 1.00, "h": 1.07, "vh": 1.15},
    "acap": {"vl": 1.46, "l": 1.19, "n": 1.00, "h": 0.86, "vh": 0.71},
    "aexp": {"vl": 1.29, "l": 1.13, "n": 1.00, "h": 0.91, "vh": 0.82},
    "pcap": {"vl": 1.42, "l": 1.17, "n": 1.00, "h": 0.86, "vh": 0.70},
    "vexp": {"vl": 1.21, "l": 1.10, "n": 1.00, "h": 0.90},
    "lexp": {"vl": 1.14, "l": 1.07, "n": 1.00, "h": 0.95},
    "modp": {"vl": 1.24, "l": 1.10, "n": 1.00, "h": 0.91, "vh": 0.82},
    "tool": {"vl": 1.24, "l": 1.10, "n": 1.00, "h": 0.91, "vh": 0.83},
    "sced": {"vl": 1.23, "l": 1.08, "n": 1.00, "h": 1.04, "vh": 1.10},
}
MODES = {"embedded": (2.8, 1.20), "semidetached": (3.0, 1.12), "organic": (3.2, 1.05)}
CATEGORIES = ["avionics", "missionplanning", "monitor_control", "simulation", "utility", "science"]
CENTERS = ["1", "2", "3", "4", "5", "6"]
PROJECTS = ["de", "erb", "gal", "X", "hst", "slp", "spl", "Y", "sts", "gro"]

COLUMNS = (
    ["recordnumber", "projectname", "cat2", "forg", "center", "year", "mode"]
    + list(MULTIPLIERS)
    + ["equivphyskloc", "act_effort"]
)


def pick(rng, table):
    keys = list(table)
    centre = keys.index("n")
    weights = [1.0 / (1 + abs(i - centre)) ** 1.5 for i in range(len(keys))]
    return rng.choices(keys, weights)[0]


def rows():
    rng = random.Random(93)
    out = []
    for rec in range(1, 94):
        mode = rng.choice(list(MODES))
        ratings = {name: pick(rng, table) for name, table in MULTIPLIERS.items()}
        kloc = round(math.exp(rng.uniform(math.log(1.0), math.log(900.0))), 1)
        a, b = MODES[mode]
        eaf = math.prod(MULTIPLIERS[n][r] for n, r in ratings.items())
        effort = a * kloc**b * eaf * math.exp(rng.gauss(0.0, 0.25))
        out.append(
            [
                str(rec),
                rng.choice(PROJECTS),
                rng.choice(CATEGORIES),
                rng.choice(["f", "g"]),
                rng.choice(CENTERS),
                str(rng.randint(1971, 1987)),
                mode,
            ]
            + [ratings[n] for n in MULTIPLIERS]
            + [f"{kloc:.1f}", f"{effort:.1f}"]
        )
    return out


def write_arff(path, data):
    with open(path, "w", newline="\n") as f:
        f.write("% Synthetic stand-in with the PROMISE nasa93 schema.\n")
        f.write("% Generated by make_synthetic_nasa93.py; not the original measurements.\n")
        f.write("@relation nasa93_synthetic\n\n")
        f.write("@attribute recordnumber numeric\n")
        f.write("@attribute projectname {" + ",".join(PROJECTS) + "}\n")
        f.write("@attribute cat2 {" + ",".join(CATEGORIES) + "}\n")
        f.write("@attribute forg {f,g}\n")
        f.write("@attribute center {" + ",".join(CENTERS) + "}\n")
        f.write("@attribute year numeric\n")
        f.write("@attribute mode {" + ",".join(MODES) + "}\n")
        for name in MULTIPLIERS:
            f.write(f"@attribute {name} {{{','.join(LEVELS)}}}\n")
        f.write("@attribute equivphyskloc numeric\n")
        f.write("@attribute act_effort numeric\n\n@data\n")
        for row in data:
            f.write(",".join(row) + "\n")


def write_csv(path, data):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows(data)


if __name__ == "__main__":
    data = rows()
    write_arff("nasa93.arff", data)
    write_csv("nasa93.csv", data)
