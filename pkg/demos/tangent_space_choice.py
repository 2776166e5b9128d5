"""Why the tangent space follows the base point.

An "N"-shaped path on S^2 runs from the northern to the southern hemisphere.
Learning it in the single tangent space at the north pole distorts the far
end of the path, while the manifold learner expresses every pair in the
tangent space of the current base point. Both are scored by the mean RMSE
(geodesic distance) against the demonstration.

    python demos/tangent_space_choice.py
"""

import warnings

import numpy as np

from riemannian_ds import lasa, learning
from riemannian_ds.benchmark import evaluate_rmse, fixed_chart_baseline
from riemannian_ds.manifolds import Sphere


def main():
    demos = lasa.n_shape_on_s2()
    north = np.array([0.0, 0.0, 1.0])
    # with few components the flat fit stops short of the goal; its RMSE still counts
    warnings.filterwarnings("ignore", "psi", RuntimeWarning)
    print(" K   moving TS   fixed TS   ratio")
    for k in (4, 6, 8, 10, 12):
        cur = np.mean([evaluate_rmse(learning.train(demos, k, seed=s), demos) for s in range(5)])
        fixed = np.mean([evaluate_rmse(fixed_chart_baseline(Sphere(2), north).fit(demos, k, seed=s), demos)
                         for s in range(5)])
        print(f"{k:2d}   {cur:.4f}      {fixed:.4f}     {cur / fixed:.2f}")


if __name__ == "__main__":
    main()
