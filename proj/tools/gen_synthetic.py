#!/usr/bin/env python3
"""Writes the synthetic surveillance benchmark under data/synthetic/.

Three tracks far apart from each other play scripted episodes in parallel.
Every episode uses fresh entity ids, enters with appear events and leaves
with disappear events. The ground truth is written from the script itself:
an activity holds from the frame after its first initiation up to and
including the frame it is terminated.
"""

import os
import sys

OUT = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
    os.path.dirname(__file__), "..", "data", "synthetic")

TRACK_SPACING = 2000
GAP = 5
WALK_AWAY = 20
APPROACH = 10


class Script:
    def __init__(self):
        self.facts = {}  # frame -> list of lines
        self.truth = []  # (fluent, args, frame)
        self.next_person = 0
        self.next_bag = 0

    def person(self):
        self.next_person += 1
        return f"p{self.next_person}"

    def bag(self):
        self.next_bag += 1
        return f"bag{self.next_bag}"

    def emit(self, t, line):
        self.facts.setdefault(t, []).append(line)

    def sta(self, t, what, who):
        self.emit(t, f"happensAt({what}({who}), {t}).")

    def event(self, t, what, who):
        self.emit(t, f"happensAt({what}({who}), {t}).")

    def at(self, t, who, x, y, o):
        self.emit(t, f"holdsAt(coord({who}) = ({x}, {y}), {t}).")
        self.emit(t, f"holdsAt(orientation({who}) = {o}, {t}).")

    def holds(self, fluent, args, first, last):
        for t in range(first, last + 1):
            self.truth.append((fluent, args, t))

    # Two people walk side by side, then drift apart until they are no
    # longer close.
    def moving(self, s, x0, y0, length):
        a, b = self.person(), self.person()
        self.event(s, "appear", a)
        self.event(s, "appear", b)
        for k in range(length):
            t = s + k
            for who, dy, o in ((a, 0, 90), (b, 10, 95)):
                self.sta(t, "walking", who)
                self.at(t, who, x0 + k, y0 + dy, o)
        for k in range(WALK_AWAY):
            t = s + length + k
            self.sta(t, "walking", a)
            self.at(t, a, x0 + length + k, y0, 90)
            self.sta(t, "walking", b)
            self.at(t, b, x0 + length + k, y0 + 20 + 10 * k, 95)
        end = s + length + WALK_AWAY
        self.event(end, "disappear", a)
        self.event(end, "disappear", b)
        # Still close at separation frames 0 and 1; terminated at frame 2.
        self.holds("moving", sorted([a, b]), s + 1, s + length + 2)
        return end

    # a walks up to b; a is active next to an inactive b; a walks off.
    def meeting(self, s, x0, y0, length):
        a, b = self.person(), self.person()
        self.event(s, "appear", a)
        self.event(s, "appear", b)
        bx = x0 + 300
        for k in range(APPROACH):
            t = s + k
            self.sta(t, "walking", a)
            self.at(t, a, bx - 20 - 10 * (APPROACH - 1 - k), y0, 0)
            self.sta(t, "walking", b)
            self.at(t, b, bx, y0, 180)
        m = s + APPROACH
        for k in range(length):
            t = m + k
            self.sta(t, "active", a)
            self.at(t, a, bx - 20, y0, 0)
            self.sta(t, "inactive", b)
            self.at(t, b, bx, y0, 180)
        for k in range(WALK_AWAY):
            t = m + length + k
            self.sta(t, "walking", a)
            self.at(t, a, bx - 30 - 10 * k, y0, 180)
            self.sta(t, "inactive", b)
            self.at(t, b, bx, y0, 180)
        end = m + length + WALK_AWAY
        self.event(end, "disappear", a)
        self.event(end, "disappear", b)
        self.holds("meeting", sorted([a, b]), m + 1, m + length)
        return end

    # Two people approach, move abruptly while close, then walk apart.
    def fighting(self, s, x0, y0, length):
        a, b = self.person(), self.person()
        self.event(s, "appear", a)
        self.event(s, "appear", b)
        bx = x0 + 300
        for k in range(APPROACH):
            t = s + k
            self.sta(t, "walking", a)
            self.at(t, a, bx - 30 - 10 * (APPROACH - 1 - k), y0, 0)
            self.sta(t, "walking", b)
            self.at(t, b, bx, y0, 180)
        f = s + APPROACH
        for k in range(length):
            t = f + k
            self.sta(t, "abrupt", a)
            self.at(t, a, bx - 30, y0, 0)
            self.sta(t, "abrupt", b)
            self.at(t, b, bx, y0, 180)
        for k in range(WALK_AWAY):
            t = f + length + k
            self.sta(t, "walking", a)
            self.at(t, a, bx - 50 - 20 * k, y0, 180)
            self.sta(t, "walking", b)
            self.at(t, b, bx + 20 * k, y0, 0)
        end = f + length + WALK_AWAY
        self.event(end, "disappear", a)
        self.event(end, "disappear", b)
        self.holds("fighting", sorted([a, b]), f + 1, f + length)
        return end

    # A person walks past and leaves a bag behind; the bag is removed later.
    def leaving_object(self, s, x0, y0, length):
        p, obj = self.person(), self.bag()
        self.event(s, "appear", p)
        d = s + APPROACH
        r = d + length
        end = r + WALK_AWAY
        for k in range(end - s):
            t = s + k
            self.sta(t, "walking", p)
            self.at(t, p, x0 + 3 * k, y0, 90)
        bag_x, bag_y = x0 + 3 * APPROACH + 5, y0 + 5
        self.event(d, "appear", obj)
        for t in range(d, r):
            self.sta(t, "inactive", obj)
            self.emit(t, f"holdsAt(coord({obj}) = ({bag_x}, {bag_y}), {t}).")
        self.event(r, "disappear", obj)
        self.event(end, "disappear", p)
        self.holds("leaving_object", [p, obj], d + 1, r)
        return end


PLAN = [
    # (episode, length) in the order each track plays them.
    [("moving", 500), ("meeting", 250), ("fighting", 200), ("leaving_object", 150)],
    [("meeting", 300), ("fighting", 160), ("leaving_object", 120), ("moving", 450)],
    [("fighting", 240), ("leaving_object", 180), ("moving", 520), ("meeting", 200)],
]
CYCLES = 2


def main():
    sc = Script()
    for track, episodes in enumerate(PLAN):
        x0, y0 = 100 + TRACK_SPACING * track, 200
        t = 1
        for _ in range(CYCLES):
            for name, length in episodes:
                t = getattr(sc, name)(t, x0, y0, length) + GAP
    os.makedirs(OUT, exist_ok=True)
    horizon = max(sc.facts)
    with open(os.path.join(OUT, "benchmark.facts"), "w") as out:
        out.write("% Synthetic surveillance benchmark: three tracks of scripted episodes.\n")
        for t in range(1, horizon + 1):
            for line in sc.facts.get(t, []):
                out.write(line + "\n")
    with open(os.path.join(OUT, "benchmark.truth"), "w") as out:
        out.write("% Ground truth for benchmark.facts.\n")
        for fluent, args, t in sorted(sc.truth, key=lambda r: (r[2], r[0], r[1])):
            out.write(f"holdsAt({fluent}({', '.join(args)}) = true, {t}).\n")


if __name__ == "__main__":
    main()
