"""A small power sweep written as CSV.

The same configuration and seed always yield byte-identical output. The CLI
equivalent is ``ldp-twosample sweep --config sweep.json``.
"""

import sys

from ldp_twosample.simulation import run_sweep

config = {
    "scenarios": [{"kind": "perturbed_uniform", "k": 4, "eta": 0.04}],
    "mechanisms": ["lapu", "rappor", "genrr"],
    "alphas": [2.0, 0.5],
    "n": [1000],
    "reps": 40,
    "B": 99,
}
run_sweep(config, seed=1, out=sys.stdout)
