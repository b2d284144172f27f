"""Benchmark the compiled matching kernels against the pure-Python twins.

Micro-benchmarks time the two hot kernels (pairwise IoU matrix and the
assignment solver) on both backends in-process; the end-to-end section
re-launches the interpreter with LOGOGROUND_PURE toggled so the full
scoring pipeline runs once per backend.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
"""

import os
import random
import subprocess
import sys
import time

import numpy as np

SIZES = (4, 8, 16, 64)
REPEATS = {4: 3000, 8: 2000, 16: 600, 64: 40}


def random_boxes(rng, n):
    out = np.empty((n, 4))
    for i in range(n):
        x1, y1 = rng.uniform(0, 800), rng.uniform(0, 800)
        out[i] = (x1, y1, x1 + rng.uniform(5, 200), y1 + rng.uniform(5, 200))
    return out


def bench_kernels(mod, rng):
    rows = []
    for n in SIZES:
        reps = REPEATS[n]
        preds, gts = random_boxes(rng, n), random_boxes(rng, n)
        t0 = time.perf_counter()
        for _ in range(reps):
            ious = mod.iou_matrix(preds, gts)
        iou_us = (time.perf_counter() - t0) / reps * 1e6

        cost = 1.0 - ious
        t0 = time.perf_counter()
        for _ in range(reps):
            mod.solve_assignment(cost)
        solve_us = (time.perf_counter() - t0) / reps * 1e6
        rows.append((n, iou_us, solve_us))
    return rows


def bench_end_to_end():
    """1,024 synthetic rollouts through the full scoring path (judge off)."""
    from logoground import KERNEL_BACKEND
    from logoground.rewards import GroundTruth, RewardConfig
    from logoground.scoring import GroupSpec, score_batch

    rng = random.Random(7)
    specs = []
    for g in range(128):
        gt_boxes = []
        for _ in range(8):
            x1, y1 = rng.randint(0, 700), rng.randint(0, 700)
            from logoground.geometry import make_box

            gt_boxes.append(make_box(x1, y1, x1 + rng.randint(5, 200), y1 + rng.randint(5, 200)))
        rollouts = []
        for _ in range(8):
            body = " ".join(
                f"[{int(b.x1)},{int(b.y1)},{int(b.x2)},{int(b.y2)}]"
                for b in gt_boxes[: rng.randint(0, 8)]
            )
            rollouts.append(f"<think>evidence {body}</think><answer>{rng.choice('ABCD')}</answer>")
        specs.append(GroupSpec(f"g{g}", GroundTruth(rng.choice("ABCD"), gt_boxes), rollouts))

    score_batch(specs, RewardConfig(), judge_mode="off")  # warm-up
    t0 = time.perf_counter()
    score_batch(specs, RewardConfig(), judge_mode="off")
    elapsed = time.perf_counter() - t0
    print(f"  [{KERNEL_BACKEND:8s}] 1024 rollouts scored in {elapsed * 1e3:7.1f} ms "
          f"({1024 / elapsed:8.0f} rollouts/s)")


def main():
    if os.environ.get("_BENCH_E2E"):
        bench_end_to_end()
        return

    from logoground import _kernels_py

    backends = [("pure", _kernels_py)]
    try:
        from logoground import _kernels

        backends.insert(0, ("compiled", _kernels))
    except ImportError:
        print("compiled kernels not built; benchmarking the pure backend only")

    print(f"{'n':>4s}  " + "  ".join(f"{name + ' iou(us)':>18s}{name + ' solve(us)':>20s}"
                                     for name, _ in backends))
    results = {name: bench_kernels(mod, random.Random(42)) for name, mod in backends}
    for idx, n in enumerate(SIZES):
        cells = ""
        for name, _ in backends:
            _, iou_us, solve_us = results[name][idx]
            cells += f"{iou_us:18.1f}{solve_us:20.1f}  "
        print(f"{n:>4d}  {cells}")

    if len(backends) == 2:
        print("\nspeedup (pure / compiled):")
        for idx, n in enumerate(SIZES):
            _, iou_c, solve_c = results["compiled"][idx]
            _, iou_p, solve_p = results["pure"][idx]
            print(f"  n={n:<3d} iou x{iou_p / iou_c:5.1f}   solve x{solve_p / solve_c:5.1f}")

    print("\nend-to-end scoring (judge off):")
    sys.stdout.flush()
    for env_extra in ({}, {"LOGOGROUND_PURE": "1"}):
        env = {**os.environ, "_BENCH_E2E": "1"}
        env.pop("LOGOGROUND_PURE", None)
        env.update(env_extra)
        subprocess.run([sys.executable, __file__], env=env, check=True)


if __name__ == "__main__":
    main()
