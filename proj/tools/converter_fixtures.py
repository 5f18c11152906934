#!/usr/bin/env python3
"""Brute-force oracle for the task-to-action converters.

Generates a fixture CSV of (scenario id, expected action) pairs. Scenarios
are synthesized from a SplitMix64 stream that the C++ test suite replays
bit-for-bit, so the expected actions can be compared exactly. The converter
rules here are an independent implementation kept deliberately separate from
the C++ code.

Scenario contract (shared with tests/test_tasklayer.cpp):
  state   = (0xC0FFEE ^ (sid * 0x9E3779B97F4A7C15)) mod 2^64
  u64()   = splitmix64(state)
  unif()  = (u64() >> 11) * 2^-53
  rint(n) = u64() % n
  kind    = sid % 5: 0 go_landmark, 1 avoid_collision, 2 explore,
                     3 pursue_evader, 4 follow_ally
Draw orders are documented inline below.
"""
import csv
import math

MASK = (1 << 64) - 1
DELTAS = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]  # stay,+x,-x,+y,-y
KINDS = ["go_landmark", "avoid_collision", "explore", "pursue_evader", "follow_ally"]


class Stream:
    def __init__(self, sid):
        self.state = (0xC0FFEE ^ (sid * 0x9E3779B97F4A7C15)) & MASK

    def u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def unif(self):
        return (self.u64() >> 11) * (2.0 ** -53)

    def rint(self, n):
        return self.u64() % n


def best_axis(fx, fy):
    dots = [-fx, fx, -fy, fy]
    best, bd = 1, dots[0]
    for a in range(1, 4):
        if dots[a] > bd + 1e-12:
            bd, best = dots[a], a + 1
    return best


def spread_scenario(s, kind):
    # draws: vel.x, vel.y, 3 landmarks (x,y), 2 allies (x,y), target
    vel = (s.unif() * 2.0 - 1.0, s.unif() * 2.0 - 1.0)
    landmarks = [(s.unif() * 4.0 - 2.0, s.unif() * 4.0 - 2.0) for _ in range(3)]
    allies = [(s.unif() * 4.0 - 2.0, s.unif() * 4.0 - 2.0) for _ in range(2)]
    if kind == 0:
        tgt = s.rint(3)
        err = landmarks[tgt]
        fx = 1.0 * err[0] - 0.8 * vel[0]
        fy = 1.0 * err[1] - 0.8 * vel[1]
        if math.sqrt(fx * fx + fy * fy) < 0.05:
            return 0
        return best_axis(fx, fy)
    tgt = s.rint(2)
    rel = allies[tgt]
    return best_axis(-rel[1], rel[0])


def pursuit_scenario(s, kind):
    # draws: last_move, 48 wall cells, ne, evader placements, na, ally
    # placements, target
    r = 3
    s.rint(5)  # last move (features only; conversion ignores it)
    walls = {}
    for dx in range(-r, r + 1):
        for dy in range(-r, r + 1):
            if (dx, dy) == (0, 0):
                continue
            walls[(dx, dy)] = s.unif() < 0.12
    occupied = set()

    def place():
        for _ in range(100):
            dx = int(s.rint(7)) - 3
            dy = int(s.rint(7)) - 3
            if (dx, dy) == (0, 0) or walls[(dx, dy)] or (dx, dy) in occupied:
                continue
            occupied.add((dx, dy))
            return (dx, dy)
        raise RuntimeError("placement failed")

    ne = 1 + s.rint(3)
    evaders = [place() for _ in range(ne)]
    na = (1 + s.rint(3)) if kind == 4 else s.rint(4)
    allies = [place() for _ in range(na)]

    def resulting(a):
        d = DELTAS[a]
        if a != 0 and walls[d]:
            return (0, 0)
        return d

    if kind == 2:
        return [1, 3, 2, 4][s.rint(4)]  # E,N,W,S onto +x,+y,-x,-y

    if kind == 3:
        ev = evaders[s.rint(ne)]
        near = [al for al in allies if max(abs(al[0]), abs(al[1])) <= 2]
        best, bs = 0, None
        for a in range(5):
            c = resulting(a)
            sc = max(abs(ev[0] - c[0]), abs(ev[1] - c[1]))
            for al in near:
                if abs(al[0] - c[0]) + abs(al[1] - c[1]) == 1:
                    sc += 0.5
            if bs is None or sc < bs:
                bs, best = sc, a
        return best

    al = allies[s.rint(na)]
    best, bs = 0, None
    for a in range(5):
        c = resulting(a)
        if c == al:
            continue
        sc = max(abs(al[0] - c[0]), abs(al[1] - c[1]))
        if bs is None or sc < bs:
            bs, best = sc, a
    return best


def main():
    rows = []
    for sid in range(200):
        kind = sid % 5
        s = Stream(sid)
        if kind in (0, 1):
            action = spread_scenario(s, kind)
            env = "spread"
        else:
            action = pursuit_scenario(s, kind)
            env = "pursuit"
        rows.append([env, KINDS[kind], sid, action])
    with open("fixtures/converter_oracle.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["env", "kind", "scenario_id", "expected_action"])
        w.writerows(rows)
    print(f"wrote fixtures/converter_oracle.csv ({len(rows)} rows)")


if __name__ == "__main__":
    main()
