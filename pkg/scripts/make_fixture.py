"""Regenerate the bundled 1000-rating fixture (src/cruc/data/fixture_1k.tsv).

50 users x 80 items, 20 ratings per user on the integer 1..5 scale, drawn from
a rank-3 latent factor model plus noise. User u always rates items 2u mod 80
and 2u+1 mod 80, so every item has at least one rating.
"""

from pathlib import Path

import numpy as np

N_USERS, N_ITEMS, PER_USER, SEED = 50, 80, 20, 20111209

rng = np.random.default_rng(SEED)
P = rng.normal(size=(N_USERS, 3))
Q = rng.normal(size=(N_ITEMS, 3))
bias_u = rng.normal(0, 0.5, N_USERS)
bias_i = rng.normal(0, 0.5, N_ITEMS)

lines = []
ts = 880000000
for u in range(N_USERS):
    forced = {(2 * u) % N_ITEMS, (2 * u + 1) % N_ITEMS}
    rest = [i for i in rng.permutation(N_ITEMS) if i not in forced][: PER_USER - len(forced)]
    for i in sorted(forced | set(int(x) for x in rest)):
        score = 3.4 + bias_u[u] + bias_i[i] + 0.6 * P[u] @ Q[i] + rng.normal(0, 0.4)
        r = int(np.clip(np.rint(score), 1, 5))
        ts += int(rng.integers(1, 5000))
        lines.append(f"{u + 1}\t{i + 1}\t{r}\t{ts}")

order = rng.permutation(len(lines))
out = Path(__file__).resolve().parents[1] / "src" / "cruc" / "data" / "fixture_1k.tsv"
out.write_text("".join(lines[k] + "\n" for k in order), encoding="utf-8")
print(f"wrote {len(lines)} ratings to {out}")
