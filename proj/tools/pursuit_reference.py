#!/usr/bin/env python3
"""Independent reference model of the Pursuit environment.

Mirrors the documented step semantics (simultaneous pursuer moves with
index-priority conflict resolution, sequential random evader moves,
surround capture) so the C++ implementation can be cross-checked
statistically. Also probes capture rates under a scripted chase policy.
"""
import argparse
import csv
import numpy as np

ACTIONS = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]  # stay,+x,-x,+y,-y


class Pursuit:
    def __init__(self, grid_w=16, grid_h=16, n_pursuers=8, n_evaders=30,
                 obs_range=7, max_cycles=500, catch_reward=5.0,
                 tag_reward=0.01, urgency_reward=-0.1, seed=0):
        self.gw, self.gh = grid_w, grid_h
        self.np_, self.ne = n_pursuers, n_evaders
        self.obs_range = obs_range
        self.max_cycles = max_cycles
        self.catch_reward = catch_reward
        self.tag_reward = tag_reward
        self.urgency_reward = urgency_reward
        self.rng = np.random.default_rng(seed)
        ox0, oy0 = grid_w // 2 - 1, grid_h // 2 - 1
        self.obstacle = {(ox0 + dx, oy0 + dy) for dx in range(2) for dy in range(2)}

    def traversable(self, x, y):
        return 0 <= x < self.gw and 0 <= y < self.gh and (x, y) not in self.obstacle

    def reset(self):
        cells = [(x, y) for x in range(self.gw) for y in range(self.gh)
                 if (x, y) not in self.obstacle]
        idx = self.rng.permutation(len(cells))[: self.np_ + self.ne]
        picked = [cells[i] for i in idx]
        self.pur = picked[: self.np_]
        self.ev = picked[self.np_:]
        self.alive = [True] * self.ne
        self.step_n = 0
        self.last_move = [(0, 0)] * self.np_
        self.done = False

    def step(self, actions):
        assert not self.done
        rewards = np.zeros(self.np_)
        # simultaneous pursuer moves
        pre = set(self.pur)
        desired = []
        for i, a in enumerate(actions):
            dx, dy = ACTIONS[a]
            tx, ty = self.pur[i][0] + dx, self.pur[i][1] + dy
            if not self.traversable(tx, ty):
                tx, ty = self.pur[i]
            elif (tx, ty) in pre and (tx, ty) != self.pur[i]:
                tx, ty = self.pur[i]
            desired.append((tx, ty))
        claimed = {}
        newpos = list(self.pur)
        for i in range(self.np_):
            t = desired[i]
            if t == self.pur[i]:
                newpos[i] = t
                continue
            if t in claimed:
                newpos[i] = self.pur[i]
            else:
                claimed[t] = i
                newpos[i] = t
        for i in range(self.np_):
            self.last_move[i] = (newpos[i][0] - self.pur[i][0], newpos[i][1] - self.pur[i][1])
        self.pur = newpos
        pset = set(self.pur)

        # evaders move sequentially, uniform over free options
        eset = {self.ev[e] for e in range(self.ne) if self.alive[e]}
        for e in range(self.ne):
            if not self.alive[e]:
                continue
            ex, ey = self.ev[e]
            opts = [(ex, ey)]
            for dx, dy in ACTIONS[1:]:
                c = (ex + dx, ey + dy)
                if self.traversable(*c) and c not in pset and c not in eset:
                    opts.append(c)
            c = opts[self.rng.integers(0, len(opts))]
            eset.discard((ex, ey))
            eset.add(c)
            self.ev[e] = c

        # surround capture, checked once per step after all movement
        caught = []
        for e in range(self.ne):
            if not self.alive[e]:
                continue
            ex, ey = self.ev[e]
            neigh = [(ex + dx, ey + dy) for dx, dy in ACTIONS[1:]
                     if self.traversable(ex + dx, ey + dy)]
            if neigh and all(c in pset for c in neigh):
                caught.append((e, neigh))
        for e, neigh in caught:
            self.alive[e] = False
            for i in range(self.np_):
                if self.pur[i] in neigh:
                    rewards[i] += self.catch_reward
        eset = {self.ev[e] for e in range(self.ne) if self.alive[e]}

        # tag + urgency
        for i in range(self.np_):
            px, py = self.pur[i]
            if any((px + dx, py + dy) in eset for dx, dy in ACTIONS[1:]):
                rewards[i] += self.tag_reward
            rewards[i] += self.urgency_reward

        self.step_n += 1
        self.done = self.step_n >= self.max_cycles or not any(self.alive)
        return rewards, len(caught)


def chase_action(env, i, pack=False):
    """Scripted chase: converter-style chebyshev scoring toward nearest visible evader.

    pack=True preferentially targets the visible evader closest to the pursuer
    swarm centroid, approximating coordinated convergence.
    """
    r = env.obs_range // 2
    px, py = env.pur[i]
    vis = [(ex - px, ey - py) for e, (ex, ey) in enumerate(env.ev)
           if env.alive[e] and abs(ex - px) <= r and abs(ey - py) <= r]
    if not vis:
        return int(env.rng.integers(0, 5))
    if pack:
        cx = sum(q[0] for q in env.pur) / len(env.pur)
        cy = sum(q[1] for q in env.pur) / len(env.pur)
        tgt = min(vis, key=lambda d: (max(abs(d[0] + px - cx), abs(d[1] + py - cy)), d[0], d[1]))
    else:
        tgt = min(vis, key=lambda d: (max(abs(d[0]), abs(d[1])), d[0], d[1]))
    allies = [(qx - px, qy - py) for j, (qx, qy) in enumerate(env.pur)
              if j != i and max(abs(qx - px), abs(qy - py)) <= 2]
    best, besta = None, 0
    for a, (dx, dy) in enumerate(ACTIONS):
        tx, ty = px + dx, py + dy
        if not env.traversable(tx, ty):
            tx, ty = px, py
        score = max(abs(tgt[0] + px - tx), abs(tgt[1] + py - ty))
        for ax, ay in allies:
            if abs(ax + px - tx) + abs(ay + py - ty) == 1:
                score += 0.5
        if best is None or score < best:
            best, besta = score, a
    return besta


def run(env, policy, episodes, seed):
    rets, catches = [], []
    for ep in range(episodes):
        env.rng = np.random.default_rng(seed + ep)
        env.reset()
        tot = np.zeros(env.np_)
        ncat = 0
        while not env.done:
            if policy == "random":
                acts = env.rng.integers(0, 5, env.np_)
            else:
                acts = [chase_action(env, i) for i in range(env.np_)]
            r, c = env.step(acts)
            tot += r
            ncat += c
        rets.append(tot.mean())
        catches.append(ncat)
    return np.array(rets), np.array(catches)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", choices=["default", "desk"], default="desk")
    ap.add_argument("--policy", choices=["random", "chase"], default="random")
    ap.add_argument("--episodes", type=int, default=50)
    ap.add_argument("--seed", type=int, default=777)
    ap.add_argument("--obs-range", type=int, default=7)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    kw = dict(obs_range=args.obs_range)
    if args.config == "desk":
        kw.update(n_evaders=10, max_cycles=200)
    env = Pursuit(**kw)
    rets, catches = run(env, args.policy, args.episodes, args.seed)
    print(f"pursuit[{args.config}] policy={args.policy} obs={args.obs_range}: "
          f"mean_return={rets.mean():.3f} sd={rets.std():.3f} "
          f"catches/ep={catches.mean():.2f} (max {catches.max()})")
    if args.out:
        with open(args.out, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["env", "config_hash", "seed", "episode", "mean_agent_return"])
            for ep, r in enumerate(rets):
                w.writerow(["pursuit", args.config, args.seed, ep, f"{r:.10g}"])
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
