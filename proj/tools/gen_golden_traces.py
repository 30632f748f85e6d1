#!/usr/bin/env python3
"""Record CartPole-v1 golden traces from the gymnasium reference implementation.

Writes one CSV per seed with columns
step,action,x,x_dot,theta,theta_dot,reward,terminated,truncated.
Row 0 is the reset state (action -1). States are read from env.unwrapped.state
so the fixtures hold the full float64 values rather than the float32 observation.

Seeds 0-16 use uniformly random actions; seeds 17-19 use a PD balancing
controller with a little action noise so the trace runs into the 500-step cap.
"""
import argparse
import pathlib

import gymnasium as gym
import numpy as np


def controller(state, rng):
    x, x_dot, theta, theta_dot = state
    u = 10.0 * theta + 1.5 * theta_dot + 0.05 * x + 0.1 * x_dot
    if rng.random() < 0.1:
        return int(rng.integers(0, 2))
    return 1 if u > 0 else 0


def record(seed, balanced):
    env = gym.make("CartPole-v1")
    env.reset(seed=seed)
    rng = np.random.default_rng(1000 + seed)
    rows = []
    s = env.unwrapped.state
    rows.append((0, -1, *map(float, s), 0.0, 0, 0))
    step = 0
    while True:
        s = env.unwrapped.state
        action = controller(s, rng) if balanced else int(rng.integers(0, 2))
        _, reward, terminated, truncated, _ = env.step(action)
        step += 1
        s = env.unwrapped.state
        rows.append((step, action, *map(float, s), float(reward), int(terminated), int(truncated)))
        if terminated or truncated:
            break
    env.close()
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="tests/fixtures/cartpole_golden")
    ap.add_argument("--count", type=int, default=20)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for seed in range(args.count):
        rows = record(seed, balanced=seed >= args.count - 3)
        with open(out / f"seed_{seed:02d}.csv", "w") as fh:
            fh.write("step,action,x,x_dot,theta,theta_dot,reward,terminated,truncated\n")
            for r in rows:
                fh.write("%d,%d,%s,%s,%s,%s,%s,%d,%d\n" % (r[0], r[1], *(repr(v) for v in r[2:7]), r[7], r[8]))
        print(f"seed {seed}: {len(rows) - 1} steps, terminated={rows[-1][7]} truncated={rows[-1][8]}")


if __name__ == "__main__":
    main()
