"""Learn an orientation motion on the unit quaternion sphere and replay it.

The script trains on one handwriting class projected onto S^3 (or on the
bundled synthetic class when the handwriting data is not installed), rolls
the model out from every demonstrated start, then moves the goal halfway
through a rollout. Trajectories are written as CSV next to this file.

    python demos/orientation_skill.py
"""

import os

import numpy as np

from riemannian_ds import lasa, learning

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "out")


def load_demos():
    src = lasa.lasa_data_dir()
    if src is None:
        print("handwriting data not installed, using the synthetic class")
        return lasa.synthetic_class("uq").demos
    cls = lasa.make_riemannian_class(lasa.load_lasa_mat(os.path.join(src, "Sshape.mat")), "uq")
    return cls.demos


def main():
    os.makedirs(OUT, exist_ok=True)
    full = load_demos()
    demos = lasa.downsample(full, 100)
    m = demos.manifold
    model = learning.train(demos, 10)
    print(f"trained {model.diffeo.n_components} Gaussians (10 learned, goal anchor, background) "
          f"on {demos.n_demos} demos of {demos.length} samples")

    # reproduction from the demonstrated starts
    for i, demo in enumerate(demos.demos):
        # run three demo lengths so the tail shows convergence
        traj = model.rollout(demo[0], 3 * demos.length)
        err = np.sqrt(np.mean([m.dist(p, q) ** 2 for p, q in zip(traj, demo)]))
        print(f"demo {i}: RMSE {err:.4f} rad, final distance to goal {m.dist(traj[-1], model.goal):.1e}")
        learning.export_trajectory_csv(os.path.join(OUT, f"uq_demo{i}.csv"), traj, model.dt, model.goal, m)

    # the same model sampled ten times finer, no retraining
    fine = model.rollout(demos.starts[0], 1000, model.dt / 10)
    err = np.sqrt(np.mean([m.dist(p, q) ** 2 for p, q in zip(fine, full.demos[0])]))
    print(f"1000-step rollout at dt/10 against the original demo: RMSE {err:.4f}")

    # move the goal by 0.5 rad at step 50; the goal itself follows a geodesic system
    new_goal = m.exp(model.goal, 0.5 * np.array([0.0, 1.0, 1.0, 0.0]) / np.sqrt(2))
    traj = model.rollout_with_goal_switch(demos.starts[0], 350, 50, new_goal, k_goal=5.0)
    steps = [m.dist(p, q) for p, q in zip(traj[:-1], traj[1:])]
    print(f"goal switch: largest step before {max(steps[:49]):.4f}, after {max(steps[49:]):.4f}, "
          f"final distance to the new goal {m.dist(traj[-1], new_goal):.1e}")
    learning.export_trajectory_csv(os.path.join(OUT, "uq_goal_switch.csv"), traj, model.dt, new_goal, m)


if __name__ == "__main__":
    main()
