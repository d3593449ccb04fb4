#!/usr/bin/env python3
"""Regenerates the committed files under fixtures/.

Usage: tools/make_fixtures.py <path-to-cci-binary>

Everything is seeded; rerunning produces identical files.
"""

import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "fixtures"


def months(start_year, start_month, count):
    out = []
    y, m = start_year, start_month
    for _ in range(count):
        out.append(f"{y:04d}-{m:02d}")
        m += 1
        if m == 13:
            y, m = y + 1, 1
    return out


def write_wide(path, dates, columns):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["date"] + list(columns.keys()))
        for i, d in enumerate(dates):
            w.writerow([d] + [fmt(col[i]) for col in columns.values()])


def fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def read_vocab():
    with open(FIX / "vocabulary.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    for r in rows:
        r["category"] = int(r["category"])
        r["is_benchmark"] = r["is_benchmark"] == "true"
    return rows


def partition(vocab, max_size=5):
    bench = next(r for r in vocab if r["is_benchmark"])
    rest = sorted((r for r in vocab if not r["is_benchmark"]), key=lambda r: r["category"])
    groups = []
    for cat in sorted({r["category"] for r in rest}):
        terms = [r for r in rest if r["category"] == cat]
        for i in range(0, len(terms), max_size - 1):
            groups.append([bench] + terms[i:i + max_size - 1])
    return groups


def make_groups(rng):
    """Benchmark-anchored search-volume exports, 2004-01..2023-12."""
    T = 240
    dates = months(2004, 1, T)
    t = np.arange(T)
    season = np.cos(2 * np.pi * (t % 12) / 12.0)
    # benchmark: stable, winter heating peak
    bench_true = 55 + 12 * season + rng.normal(0, 2.0, T)
    concern = np.clip(0.2 + 0.8 * t / T + 0.15 * np.sin(2 * np.pi * t / 90.0), 0.05, None)
    vocab = read_vocab()
    groups = partition(vocab)
    out_dir = FIX / "groups"
    out_dir.mkdir(parents=True, exist_ok=True)
    for old in out_dir.glob("*.csv"):
        old.unlink()
    for gi, members in enumerate(groups, start=1):
        cols = {}
        raw = {members[0]["term"]: bench_true * rng.uniform(0.9, 1.1)}
        for m in members[1:]:
            level = rng.uniform(3, 80)
            phase = rng.uniform(0, 2 * np.pi)
            s = level * concern * (1 + 0.2 * np.cos(2 * np.pi * t / 12 + phase))
            s = s + rng.normal(0, 0.05 * level, T)
            spikes = rng.choice(T, size=2, replace=False)
            s[spikes] *= rng.uniform(1.5, 3.0, size=2)
            raw[m["term"]] = np.clip(s, 0, None)
        peak = max(v.max() for v in raw.values())
        for name, v in raw.items():
            cols[name] = np.rint(100 * v / peak).astype(int)
        write_wide(out_dir / f"group_{gi:02d}.csv", dates, cols)
    return len(groups)


def make_compare(rng):
    """Three indices where the first leads the other two, plus a correlated pair."""
    T = 240
    burn = 100
    dates = months(2004, 1, T)
    x = np.zeros((T + burn, 3))
    e = rng.normal(size=(T + burn, 3))
    for t in range(2, T + burn):
        x[t, 0] = 0.6 * x[t - 1, 0] + e[t, 0]
        x[t, 1] = 0.4 * x[t - 1, 1] + 0.5 * x[t - 1, 0] + e[t, 1]
        x[t, 2] = 0.5 * x[t - 1, 2] + 0.35 * x[t - 2, 0] + e[t, 2]
    x = x[burn:]
    levels = 50 + 8 * x
    write_wide(FIX / "compare" / "indices.csv", dates,
               {"cci": levels[:, 0], "news": levels[:, 1], "social": levels[:, 2]})

    rho = 0.71
    a = rng.normal(size=T)
    b = rng.normal(size=T)
    a = (a - a.mean()) / a.std()
    b = b - b.mean()
    b = b - (b @ a) / (a @ a) * a
    b = b / b.std()
    c = rho * a + math.sqrt(1 - rho * rho) * b
    write_wide(FIX / "compare" / "pair_r071.csv", dates, {"cci": a, "media": c})


def make_grids(rng):
    """Monthly mean temperatures on four grids, 1951-01..2023-12."""
    T = (2023 - 1951 + 1) * 12
    dates = months(1951, 1, T)
    t = np.arange(T)
    year = 1951 + t // 12
    warming = np.where(year > 1990, 0.03 * (year - 1990), 0.0)
    grid_dir = FIX / "grids"
    grid_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for g, (base, amp, weight) in enumerate([(12.0, 10.0, 1.5), (4.0, 14.0, 1.0), (18.0, 6.0, 0.5), (9.0, 11.0, 1.0)]):
        clim = base - amp * np.cos(2 * np.pi * (t % 12) / 12.0)
        sd = 1.0 + 0.5 * np.cos(2 * np.pi * (t % 12) / 12.0) ** 2
        temp = clim + warming + sd * rng.normal(size=T)
        gid = f"g{g + 1:02d}"
        with open(grid_dir / f"{gid}.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["date", "temp_c"])
            for d, v in zip(dates, temp):
                w.writerow([d, repr(round(float(v), 3))])
        rows.append((gid, f"{gid}.csv", weight))
    with open(grid_dir / "manifest.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["grid_id", "path", "weight"])
        for r in rows:
            w.writerow(r)
    (grid_dir / "empty_manifest.csv").write_text("grid_id,path,weight\n")


def run(cci, *args):
    subprocess.run([str(cci), *map(str, args)], check=True, stdout=subprocess.DEVNULL)


def make_macro(cci):
    dgp_dir = FIX / "dgp"
    dgp_dir.mkdir(parents=True, exist_ok=True)
    run(cci, "simulate", "--preset", "reference", "--reps", "0", "--dump-dgp", dgp_dir / "reference_5x6.json")
    run(cci, "simulate", "--preset", "bivariate", "--reps", "0", "--dump-dgp", dgp_dir / "bivariate.json")
    run(cci, "simulate", "--dgp", dgp_dir / "reference_5x6.json", "--T", 240, "--reps", "0",
        "--write-data", FIX / "macro")
    run(cci, "simulate", "--dgp", dgp_dir / "reference_5x6.json", "--T", 240, "--reps", "0",
        "--instrument-strength", 0, "--seed", 99, "--write-data", FIX / "macro_weak")

    # Per-variable files for the run configuration. Two series are stored as
    # price levels so the configuration exercises the growth transform.
    with open(FIX / "macro" / "panel.csv", newline="") as f:
        rows = list(csv.reader(f))
    header, body = rows[0], rows[1:]
    src_dir = FIX / "macro" / "sources"
    src_dir.mkdir(parents=True, exist_ok=True)
    lines = [
        "# Five-variable system assembled from local files",
        "window: 2000-02 2019-12",
        "lags: 6",
        "horizon: 12",
        "level: 0.68",
        "reps: 200",
        "block_len: auto",
        "seed: 20240101",
        "order: adjust_then_transform",
        "instrument: instrument.csv",
    ]
    for j, name in enumerate(header[1:], start=1):
        vals = [float(r[j]) for r in body]
        dates = [r[0] for r in body]
        if name in ("cons", "infl"):
            level = [100.0]
            for v in vals[1:]:
                level.append(level[-1] * (1 + v / 100.0))
            vals = level
            opt = " transform=pct_change"
        else:
            opt = ""
        with open(src_dir / f"{name}.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["date", "value", "name"])
            for d, v in zip(dates, vals):
                w.writerow([d, repr(v), name])
        lines.append(f"source: {name} local_csv sources/{name}.csv{opt}")
    (FIX / "macro" / "run_config.txt").write_text("\n".join(lines) + "\n")


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    cci = Path(sys.argv[1]).resolve()
    rng = np.random.default_rng(20240517)
    n = make_groups(rng)
    make_compare(rng)
    make_grids(rng)
    make_macro(cci)
    print(f"fixtures regenerated ({n} groups)")


if __name__ == "__main__":
    main()
