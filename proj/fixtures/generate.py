#!/usr/bin/env python3
"""Regenerates the bundled fixture CSVs. Output is deterministic."""

import csv
import datetime as dt
import math
import pathlib
import random

HERE = pathlib.Path(__file__).resolve().parent

# name, mean temp, amplitude, day of peak, hemisphere sign, second bump
CITIES = [
    ("Anchorage", 2.0, 14.0, 200, 1, 0.0),
    ("Boston", 11.0, 13.0, 202, 1, 0.0),
    ("Chicago", 10.0, 15.0, 200, 1, 0.0),
    ("Denver", 10.5, 12.0, 198, 1, 3.0),
    ("Miami", 25.0, 4.0, 215, 1, 0.0),
    ("Phoenix", 24.0, 11.0, 195, 1, -4.0),
    ("Seattle", 11.5, 8.0, 210, 1, 0.0),
    ("Honolulu", 25.5, 2.5, 240, 1, 1.5),
    ("Sydney", 18.0, 5.0, 20, -1, 0.0),
    ("Santiago", 14.0, 7.0, 15, -1, 0.0),
    ("CapeTown", 17.0, 5.0, 30, -1, 2.0),
    ("Mumbai", 27.5, 3.0, 130, 1, -3.5),
]


def weather(rng):
    start = dt.date(2023, 1, 1)
    rows = []
    for name, mean, amp, peak, _, bump in CITIES:
        for d in range(365):
            day = start + dt.timedelta(days=d)
            t = mean + amp * math.cos(2 * math.pi * (d - peak) / 365.0)
            # monsoon or second-season bump around day 250
            t += bump * math.exp(-((d - 250) / 30.0) ** 2)
            t += rng.gauss(0.0, 1.2)
            humidity = 60 + 20 * math.sin(2 * math.pi * (d - peak + 60) / 365.0) + rng.gauss(0.0, 4.0)
            rows.append((name, day.isoformat(), round(t, 2), round(humidity, 1)))
    with open(HERE / "weather.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["city", "day", "temp", "humidity"])
        w.writerows(rows)


def planted(rng, count=40, length=120):
    shapes = {"up": 1.0, "down": -1.0, "flat": 0.0}
    rows = []
    for i in range(count):
        runs = [rng.choice(list(shapes)) for _ in range(3)]
        level = 0.0
        run_len = length // len(runs)
        for x in range(length):
            run = runs[min(len(runs) - 1, x // run_len)]
            if x > 0:
                level += shapes[run] / run_len
            rows.append((f"s{i:02d}-{'-'.join(runs)}", x, round(level + rng.gauss(0.0, 0.08), 4)))
    with open(HERE / "planted.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["series", "t", "value"])
        w.writerows(rows)


if __name__ == "__main__":
    weather(random.Random(7))
    planted(random.Random(11))
