"""Regenerate the golden experiment-report fixtures.

Run from the repository root:

    python3 tests/data/make_golden_report.py

Writes golden_report/{grid.csv,summary.txt,ttests.csv} next to this file.
The test suite rebuilds the same dataset and sweep in a temp directory and
compares the three report files byte for byte.
"""

import os
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[2] / "src"))

from mvbeta import cli

SEED = 17

# deliberately hard separation so the grid spreads over ~0.6-0.8 and the
# fixture can actually catch accuracy regressions
SPEC = cli.GeneratorSpec(
    n_channels=3,
    dim=5,
    train_per_class=100,
    test_per_class=50,
    pos_alphas=((2, 5, 6, 3, 7), (4, 4, 4, 4, 4), (5, 4, 3, 4, 5)),
    neg_alphas=((3, 4, 6, 3, 7), (4, 4, 4, 4, 4), (4, 5, 3, 4, 5)),
)

CONFIG = cli.ExperimentConfig(
    classifier="mvbeta",
    ranking="fisher_ratio",
    criterion="variance",
    m_values=(1, 2, 3),
    R_values=(2, 3, 4),
    seed=SEED,
)

REPORT_FILES = ("grid.csv", "summary.txt", "ttests.csv")


def build(out_dir):
    """Synthesize the dataset and run the sweep into out_dir."""
    out_dir = str(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    features_path, manifest_path, _ = cli.synth(SPEC, SEED, out_dir)
    manifest = cli.read_manifest(manifest_path)
    records, n_channels, dim = cli.load_features(features_path, manifest)
    report = cli.run_experiment(CONFIG, records, n_channels, dim, out_dir)
    return report


if __name__ == "__main__":
    here = pathlib.Path(__file__).resolve().parent
    target = here / "golden_report"
    build(target)
    for name in REPORT_FILES:
        print(f"wrote {target / name}")
