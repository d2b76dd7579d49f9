#!/usr/bin/env python3
"""Generates the bundled reference dataset under fixtures/reference/.

The files are constructed so the estimators land on the reference rates:
  - six centers with mean daily arrivals 536 -> lambda1 = 536/480 per min
  - stage-one durations: 409 observations summing to 1000 minutes,
    so 1/mean = 0.409 per min
  - stage-two durations: 244 observations summing to 1000 minutes,
    so 1/mean = 0.244 per min
  - mean server counts 5 (stage one) and 4 (stage two)
  - eight clusters totalling 961,939 with the two largest at
    339,408 and 215,914
"""
import os

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "fixtures", "reference")

# (center_id, daily_arrivals, servers_stage1, servers_stage2)
# Arrivals sum to 3216 (mean 536); server counts sum to 30 and 24
# (means 5 and 4). "roum" carries the largest load and staffing,
# "rizk" the smallest load.
CENTERS = [
    ("aubmc", 560, 5, 4),
    ("hdf", 512, 5, 4),
    ("roum", 722, 7, 6),
    ("rizk", 306, 4, 3),
    ("geitaoui", 480, 4, 3),
    ("rhuh", 636, 5, 4),
]

# Stage-one durations: 409 observations, total exactly 1000.0 minutes.
STAGE1 = [(1.8, 100), (2.2, 108), (2.7, 100), (3.1, 100), (2.4, 1)]
# Stage-two durations: 244 observations, total exactly 1000.0 minutes.
STAGE2 = [(3.2, 60), (4.0, 60), (4.6, 60), (4.8, 60), (1.0, 4)]

CLUSTERS = [
    ("beirut", 339408),
    ("mount_lebanon", 215914),
    ("north", 110000),
    ("south", 90000),
    ("bekaa", 80000),
    ("nabatieh", 60000),
    ("akkar", 40000),
    ("baalbek_hermel", 26617),
]


def check():
    arrivals = [c[1] for c in CENTERS]
    assert sum(arrivals) == 536 * len(CENTERS), sum(arrivals)
    assert sum(c[2] for c in CENTERS) == 5 * len(CENTERS)
    assert sum(c[3] for c in CENTERS) == 4 * len(CENTERS)
    for durations, total_obs, total_min in ((STAGE1, 409, 1000), (STAGE2, 244, 1000)):
        n = sum(k for _, k in durations)
        s = sum(round(d * k, 6) for d, k in durations)
        assert n == total_obs, (n, total_obs)
        assert abs(s - total_min) < 1e-9, s
    assert sum(n for _, n in CLUSTERS) == 961939


def spread(items, centers):
    """Round-robin observations across centers so every center has data."""
    rows = []
    i = 0
    for duration, count in items:
        for _ in range(count):
            rows.append((centers[i % len(centers)][0], duration))
            i += 1
    return rows


def main():
    check()
    os.makedirs(OUT, exist_ok=True)

    with open(os.path.join(OUT, "centers.csv"), "w", newline="\n") as f:
        f.write("center_id,daily_arrivals,servers_stage1,servers_stage2\n")
        for cid, arr, s1, s2 in CENTERS:
            f.write(f"{cid},{arr},{s1},{s2}\n")

    with open(os.path.join(OUT, "observations.csv"), "w", newline="\n") as f:
        f.write("center_id,stage,duration_minutes\n")
        for cid, duration in spread(STAGE1, CENTERS):
            f.write(f"{cid},1,{duration}\n")
        for cid, duration in spread(STAGE2, CENTERS):
            f.write(f"{cid},2,{duration}\n")

    with open(os.path.join(OUT, "clusters.csv"), "w", newline="\n") as f:
        f.write("cluster,vaccinated_count\n")
        for name, count in CLUSTERS:
            f.write(f"{name},{count}\n")

    print(f"wrote fixtures to {os.path.normpath(OUT)}")


if __name__ == "__main__":
    main()
