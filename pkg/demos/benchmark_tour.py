"""Compare the manifold learner with flat baselines on a few handwriting classes.

Generates the UQ and SPD versions of the dataset into a temporary
directory, keeps a handful of classes and runs the benchmark on them. The
full 26-class run is ``riemannian-ds bench``.

    python demos/benchmark_tour.py
"""

import os
import shutil
import tempfile

from riemannian_ds import lasa
from riemannian_ds.benchmark import BenchmarkConfig, run_benchmark

CLASSES = ("Angle", "GShape", "Sshape", "Worm")


def main():
    src = lasa.lasa_data_dir()
    if src is None:
        raise SystemExit("install pyLasaDataset to run this demo")
    work = tempfile.mkdtemp()
    try:
        raw = os.path.join(work, "raw")
        os.makedirs(raw)
        for name in CLASSES:
            shutil.copy(os.path.join(src, f"{name}.mat"), raw)
        out = os.path.join(work, "riemannian")
        for man in ("uq", "spd"):
            lasa.generate_dataset(raw, man, out)
        report = run_benchmark(BenchmarkConfig(out))
        for key, agg in report.aggregates.items():
            print(f"{key:<16} RMSE {agg['rmse_mean']:.4f} +- {agg['rmse_std']:.4f}   "
                  f"training {agg['time_mean']:.3f} s")
    finally:
        shutil.rmtree(work)


if __name__ == "__main__":
    main()
