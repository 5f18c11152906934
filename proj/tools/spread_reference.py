#!/usr/bin/env python3
"""Independent NumPy reference model of the Spread environment.

Used to cross-check the C++ implementation at the statistical level and to
produce the golden fixture CSVs consumed by the acceptance suite. Kept
deliberately separate from the C++ code path: any agreement between the two
is evidence of correctness, not shared bugs.
"""
import argparse
import csv
import numpy as np

DT = 0.1
DAMPING = 0.25
SENSITIVITY = 5.0
CONTACT_FORCE = 100.0
CONTACT_MARGIN = 1e-3
AGENT_SIZE = 0.15


def run_episode(rng, n_agents, max_steps, local_ratio):
    apos = rng.uniform(-1.0, 1.0, (n_agents, 2))
    avel = np.zeros((n_agents, 2))
    lpos = rng.uniform(-1.0, 1.0, (n_agents, 2))
    dmin = 2.0 * AGENT_SIZE
    returns = np.zeros(n_agents)
    for _ in range(max_steps):
        acts = rng.integers(0, 5, n_agents)
        force = np.zeros((n_agents, 2))
        force[acts == 1, 0] -= 1.0
        force[acts == 2, 0] += 1.0
        force[acts == 3, 1] -= 1.0
        force[acts == 4, 1] += 1.0
        force *= SENSITIVITY
        for i in range(n_agents):
            for j in range(i + 1, n_agents):
                delta = apos[i] - apos[j]
                dist = float(np.sqrt((delta ** 2).sum()))
                pen = np.logaddexp(0.0, -(dist - dmin) / CONTACT_MARGIN) * CONTACT_MARGIN
                dirv = delta / dist if dist > 1e-12 else np.array([1.0, 0.0])
                f = CONTACT_FORCE * dirv * pen
                force[i] += f
                force[j] -= f
        avel = avel * (1.0 - DAMPING) + force * DT
        apos = apos + avel * DT

        g = 0.0
        for l in range(n_agents):
            d = np.sqrt(((apos - lpos[l]) ** 2).sum(axis=1))
            g -= d.min()
        pd = np.sqrt(((apos[:, None, :] - apos[None, :, :]) ** 2).sum(axis=2))
        coll = (pd < dmin).sum(axis=1) - 1  # exclude self
        local = -coll.astype(float)
        returns += (1.0 - local_ratio) * g + local_ratio * local
    return float(returns.mean())


def baseline(n_agents, seed, repetitions=30, episodes=50, max_steps=25, local_ratio=0.5):
    rng = np.random.default_rng(seed)
    rets = []
    for _ in range(repetitions * episodes):
        rets.append(run_episode(rng, n_agents, max_steps, local_ratio))
    rets = np.array(rets)
    rs = np.random.default_rng(seed + 1)
    means = np.array([rets[rs.integers(0, len(rets), len(rets))].mean() for _ in range(2000)])
    lo, hi = np.percentile(means, [2.5, 97.5])
    return rets, float(rets.mean()), float(lo), float(hi)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=None, help="write golden fixture CSV here")
    ap.add_argument("--agents", type=int, nargs="+", default=[3])
    ap.add_argument("--episodes", type=int, default=50)
    ap.add_argument("--repetitions", type=int, default=30)
    ap.add_argument("--seed", type=int, default=12345)
    args = ap.parse_args()

    rows = []
    for n in args.agents:
        rets, mean, lo, hi = baseline(n, args.seed, args.repetitions, args.episodes)
        print(f"spread n_agents={n}: mean={mean:.3f} ci=({lo:.3f},{hi:.3f}) "
              f"adjusted(mean/n)={mean / n:.3f}")
        for ep, r in enumerate(rets):
            rows.append(["spread", f"n{n}", args.seed, ep, f"{r:.10g}"])
    if args.out:
        with open(args.out, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["env", "config_hash", "seed", "episode", "mean_agent_return"])
            w.writerows(rows)
        print(f"wrote {args.out} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
