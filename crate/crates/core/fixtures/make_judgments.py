"""Writes a synthetic five-respondent DEMATEL judgment file over the thirteen
default criteria. Entries mix scale levels (0-4) and term labels."""

import json
import random

CRITERIA = ["SCED", "RELY", "DATA", "SIZE", "CPLX", "TIME", "STOR",
            "ACAP", "AEXP", "LTEX", "PCAP", "VEXP", "TOOL"]
LABELS = ["No influence", "Very low", "Low", "High", "Very high"]

rng = random.Random(13)
n = len(CRITERIA)
base = [[0 if i == j else rng.choice([0, 1, 1, 2, 2, 3, 4]) for j in range(n)] for i in range(n)]
respondents = []
for r in range(5):
    m = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == j:
                row.append(0)
                continue
            level = min(4, max(0, base[i][j] + rng.choice([-1, 0, 0, 1])))
            row.append(LABELS[level] if r % 2 else level)
        m.append(row)
    respondents.append(m)

with open("judgments.json", "w") as f:
    f.write('{\n  "criteria": ' + json.dumps(CRITERIA) + ',\n  "respondents": [\n')
    blocks = []
    for m in respondents:
        rows = ",\n".join("      " + json.dumps(row) for row in m)
        blocks.append("    [\n" + rows + "\n    ]")
    f.write(",\n".join(blocks) + "\n  ]\n}\n")
