"""Privatizing categorical data.

Four mechanisms turn a category into a randomized view. This script privatizes
the same small sample with each one and shows what the views look like.
"""

import numpy as np

from ldp_twosample import PrivacyConfig, StreamKey, derive_stream, privatize

# %% A handful of owners, each holding one of k = 5 categories.
k = 5
x = np.array([0, 1, 1, 4, 2, 0])

# %% Each mechanism gets its own substream, so reruns are identical.
np.set_printoptions(precision=2, suppress=True)
for i, name in enumerate(["lapu", "disclapu", "rappor", "genrr"]):
    cfg = PrivacyConfig(name, alpha=1.0, k=k)
    views = privatize(x, cfg, derive_stream(StreamKey(2024, i)))
    print(f"--- {name}")
    print(views)

# %% The noise level follows from the budget alone.
p = PrivacyConfig("rappor", alpha=1.0, k=k).params
print(f"RAPPOR flip probability at alpha=1: {p.lambda_bf:.4f}")
