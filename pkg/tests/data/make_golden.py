"""Regenerate the 9-item fixture and its golden result files.

Run from the repository root:  python3 tests/data/make_golden.py
The golden JSON is produced by the CLI with --omit-timing and is checked
against brute-force enumeration before it is written.
"""

import json
import sys
from pathlib import Path

import numpy as np

from cluster_posterior.cli import main
from cluster_posterior.io import load_csv, write_csv
from cluster_posterior.likelihood import CONTINUOUS, GammaNormal
from cluster_posterior.oracle import brute_posteriors
from cluster_posterior.priors import PriorSpec
from cluster_posterior.synthetic import generate

HERE = Path(__file__).parent
FIXTURE = HERE / "fixture9.csv"
GOLDEN = HERE / "fixture9_golden.json"


def main_():
    sample = generate("custom", 2024, n=9, k=3, D=2, kind=CONTINUOUS)
    write_csv(sample.data, FIXTURE)
    code = main(["run", "--data", str(FIXTURE), "--model", "normal", "--out", str(GOLDEN), "--omit-timing"])
    if code:
        sys.exit(code)
    doc = json.loads(GOLDEN.read_text())
    ref = brute_posteriors(load_csv(FIXTURE), GammaNormal(), PriorSpec())
    assert np.max(np.abs(np.array(doc["posterior_k"]) - ref.summary.posterior_k)) < 1e-10
    assert np.max(np.abs(np.array(doc["cooccurrence"]) - ref.cooccurrence.entries)) < 1e-10
    print(f"wrote {FIXTURE.name} and {GOLDEN.name}")


if __name__ == "__main__":
    main_()
