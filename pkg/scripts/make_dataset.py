"""Export the Breast Cancer Wisconsin (Diagnostic) data to data/breast_cancer.csv.

The committed CSV is the canonical input for the CLI walkthrough and the test
suite; this script only needs to be re-run if that file is deleted. Labels are
written as "M" (malignant) / "B" (benign) so the loader's label-mapping path
gets exercised on real data.
"""

import csv
import pathlib
import sys


def main() -> int:
    try:
        from sklearn.datasets import load_breast_cancer
    except ImportError:
        print("scikit-learn is required to regenerate the CSV", file=sys.stderr)
        return 1

    bunch = load_breast_cancer()
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "breast_cancer.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(bunch.feature_names) + ["diagnosis"])
        for row, target in zip(bunch.data, bunch.target):
            # sklearn target 0 is malignant, 1 is benign
            label = "M" if target == 0 else "B"
            writer.writerow([repr(float(v)) for v in row] + [label])
    print(f"wrote {out} ({len(bunch.data)} rows)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
