#!/usr/bin/env python3
"""Writes the hand-built narratives under data/fixtures/."""

import math
import os
import sys

OUT = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
    os.path.dirname(__file__), "..", "data", "fixtures")


def prob(p):
    return repr(float(p))


def mike_sarah():
    lines = ["% Two people walking together, pausing, rejoining, then parting."]
    horizon = 50
    first = 0.70 * 0.46
    second = 0.69 * 0.58
    after_22 = 1 - (1 - first) * (1 - second)
    # Nineteen equal initiations on frames 22..40 take the holding
    # probability at frame 41 to 0.8.
    keep = (0.2 / (1 - after_22)) ** (1 / 19)
    sarah_join = 1 - keep
    for t in range(1, horizon + 1):
        mike_x, mike_y = 100 + t, 100
        sarah_x, sarah_y = 100 + t, 110
        if t == 1:
            lines.append(f"0.7::happensAt(walking(mike), {t}).")
            lines.append(f"0.46::happensAt(walking(sarah), {t}).")
        elif t <= 20:
            lines.append(f"{0.73 if t == 2 else 0.6 + 0.01 * (t % 10):.2f}"
                         f"::happensAt(walking(mike), {t}).")
            lines.append(f"{0.55 if t == 2 else 0.5 + 0.02 * (t % 7):.2f}"
                         f"::happensAt(active(sarah), {t}).")
        elif t == 21:
            lines.append(f"0.69::happensAt(walking(mike), {t}).")
            lines.append(f"0.58::happensAt(walking(sarah), {t}).")
        elif t <= 40:
            lines.append(f"happensAt(walking(mike), {t}).")
            lines.append(f"{sarah_join!r}::happensAt(walking(sarah), {t}).")
        else:
            mike_x = 141
            sarah_x = 180 + 5 * (t - 41)
            lines.append(f"{'0.18' if t == 41 else '0.9'}::happensAt(inactive(mike), {t}).")
            lines.append(f"{'0.32' if t == 41 else '0.4'}::happensAt(walking(sarah), {t}).")
        lines.append(f"holdsAt(coord(mike) = ({mike_x}, {mike_y}), {t}).")
        lines.append(f"holdsAt(coord(sarah) = ({sarah_x}, {sarah_y}), {t}).")
        lines.append(f"holdsAt(orientation(mike) = 90, {t}).")
        lines.append(f"holdsAt(orientation(sarah) = 95, {t}).")
    return "\n".join(lines) + "\n"


def suitcase():
    lines = ["% A suitcase left on the floor at frame 11 and picked up at frame 20."]
    for t in range(1, 26):
        sarah_x = 100 + 3 * t
        lines.append(f"happensAt(walking(sarah), {t}).")
        lines.append(f"holdsAt(coord(sarah) = ({sarah_x}, 100), {t}).")
        lines.append(f"holdsAt(orientation(sarah) = 0, {t}).")
        if 11 <= t <= 20:
            if t == 11:
                lines.append(f"0.6::happensAt(appear(suitcase), {t}).")
            lines.append(f"happensAt(inactive(suitcase), {t}).")
            lines.append(f"holdsAt(coord(suitcase) = (140, 110), {t}).")
            if t == 20:
                lines.append(f"0.6::happensAt(disappear(suitcase), {t}).")
    return "\n".join(lines) + "\n"


def main():
    os.makedirs(OUT, exist_ok=True)
    with open(os.path.join(OUT, "mike_sarah.facts"), "w") as f:
        f.write(mike_sarah())
    with open(os.path.join(OUT, "suitcase.facts"), "w") as f:
        f.write(suitcase())


if __name__ == "__main__":
    main()
