"""Regenerate the golden wavelet fixtures.

Run from the repository root:

    python3 tests/data/make_golden.py

Values come from the dense-matrix reference implementation in
tests/_reference.py, frozen here so the production code is checked against
numbers it did not produce.
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1]))
from _reference import bandpass_ref, dwt_ref, mdwt_ref  # noqa: E402

OUT = pathlib.Path(__file__).resolve().parent / "golden_dwt.npz"


def main():
    store = {}

    # plain level-4 decomposition of a random length-64 signal
    rng = np.random.default_rng(2718)
    sig = rng.standard_normal(64)
    details, approx = dwt_ref(sig, 4)
    store["signal64"] = sig
    for k, d in enumerate(details, start=1):
        store[f"detail{k}"] = d
    store["approx4"] = approx
    store["mdwt64"] = mdwt_ref(sig, 4)

    # full extraction chain on a 3-channel trial: tones inside and outside
    # the 7-30 Hz band plus noise, 256 samples at 1 kHz
    rng = np.random.default_rng(31415)
    t = np.arange(256) / 1000.0
    chans = np.vstack(
        [
            np.sin(2 * np.pi * 12.0 * t) + 0.5 * np.sin(2 * np.pi * 55.0 * t),
            np.cos(2 * np.pi * 21.0 * t) + 0.3 * rng.standard_normal(256),
            rng.standard_normal(256),
        ]
    )
    feats = []
    for row in chans:
        filtered = bandpass_ref(row, 1000.0, 7.0, 30.0)
        feats.append(mdwt_ref(filtered, 4))
    store["chain_signals"] = chans
    store["chain_features"] = np.vstack(feats)

    np.savez(OUT, **store)
    print(f"wrote {OUT} ({len(store)} arrays)")


if __name__ == "__main__":
    main()
