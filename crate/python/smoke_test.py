#!/usr/bin/env python3
"""Smoke test for the sigleak extension module.

Builds nothing itself: it locates the compiled cdylib under target/
(release preferred), copies it next to a build directory as sigleak.so,
and exercises the main types and operations end to end.

Usage:
    cargo build --workspace            # or --release
    python3 python/smoke_test.py
"""

import json
import math
import pathlib
import shutil
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "libsigleak.so",
        ROOT / "target" / "debug" / "libsigleak.so",
    ]
    src = next((p for p in candidates if p.exists()), None)
    if src is None:
        sys.exit("libsigleak.so not found; run `cargo build --workspace` first")
    build_dir = ROOT / "python" / "_build"
    build_dir.mkdir(exist_ok=True)
    dst = build_dir / "sigleak.so"
    if not dst.exists() or src.stat().st_mtime > dst.stat().st_mtime:
        shutil.copy2(src, dst)
    sys.path.insert(0, str(build_dir))
    import sigleak

    return sigleak


def check(name, ok, detail=""):
    status = "ok" if ok else "FAIL"
    print(f"  {name}: {status} {detail}")
    if not ok:
        sys.exit(1)


def main():
    sl = load_module()
    print("sigleak smoke test")

    # Schedule anchor values.
    schedule = sl.Schedule.scaled_linear(1000)
    sq_ab, sq_1mab = schedule.marginal_coeffs(1000)
    check(
        "schedule anchor",
        abs(sq_ab - 0.068265) < 1e-4 and abs(sq_1mab - 0.997667) < 1e-4,
        f"sqrt(ab_T)={sq_ab:.6f}",
    )
    truncated = schedule.truncate(981)
    check("truncation", truncated.t_max() == 981 and truncated.alpha_bars()[-1] > schedule.alpha_bars()[-1])

    # DCT round trip and Parseval.
    rng = sl.Rng(7)
    x = rng.normal_tensor((2, 8, 8))
    coeffs = x.dct2()
    back = coeffs.idct2()
    err = max(abs(a - b) for a, b in zip(x.data(), back.data()))
    energy_x = sum(v * v for v in x.data())
    energy_c = sum(v * v for v in coeffs.data())
    check("dct round trip", err < 1e-9, f"max err={err:.2e}")
    check("parseval", abs(energy_x - energy_c) / energy_x < 1e-9)

    # Leak statistics and initial-latent moments.
    data_rng = sl.Rng(1)
    dataset = [data_rng.normal_tensor((1, 4, 4)) for _ in range(200)]
    pixel = sl.estimate_pixel_stats(dataset)
    check("pixel stats shape", pixel.mu().shape == (1, 4, 4))

    hybrid = sl.estimate_hybrid_stats(dataset, n_lowest=3, ridge=1e-4)
    check("hybrid stats", hybrid.n_lowest() == 3 and len(hybrid.mu_lf()) == 3)

    model = sl.LeakModel.pixel(pixel)
    lat_rng = sl.Rng(2)
    n = 20000
    values = []
    for _ in range(n):
        values.append(sl.sample_initial_latent(schedule, model, (1, 4, 4), lat_rng).get(0, 0, 0))
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    ab = schedule.alpha_bars()[-1]
    want_mean = math.sqrt(ab) * pixel.mu().get(0, 0, 0)
    want_var = ab * pixel.sigma().get(0, 0, 0) ** 2 + (1 - ab)
    check(
        "initial-latent moments",
        abs(mean - want_mean) < 4 * math.sqrt(want_var / n)
        and abs(var - want_var) < 4 * want_var * math.sqrt(2 / n),
        f"mean={mean:.4f} var={var:.4f}",
    )

    # Determinism of the variate stream.
    a = sl.Rng(42).normal_tensor((1, 2, 2)).data()
    b = sl.Rng(42).normal_tensor((1, 2, 2)).data()
    check("rng determinism", a == b)

    # Desk-scale bias experiment: white-noise init drifts, oracle stays close.
    beta = 1 - 0.25 ** (1 / 100)
    accentuated = sl.Schedule.linear(100, beta_start=beta, beta_end=beta)
    q = sl.Gmm.scalar([(0.5, 4.0, 0.25), (0.5, 8.0, 0.25)])
    report = json.loads(
        sl.run_bias_experiment(accentuated, q, [("white", sl.LeakModel.white())], 2000, sl.Rng(15))
    )
    w1 = {m["mode"]: m["wasserstein1"] for m in report["modes"]}
    check(
        "bias experiment",
        w1["white"] > 2 * w1["oracle"],
        f"white={w1['white']:.3f} oracle={w1['oracle']:.3f}",
    )

    # Explicit DC control shifts generated brightness monotonically.
    hf = sl.estimate_pixel_stats([sl.Tensor.zeros((1, 1, 1))])
    sweep = []
    for k, control in enumerate([-2.0, 0.0, 2.0]):
        manual = sl.LeakModel.manual_dc([control], hf)
        wide = sl.Gmm.scalar([(1.0, 0.0, 4.0)])
        samples = sl.generate(accentuated, wide, manual, 300, sl.Rng(0).substream(k))
        sweep.append(sum(s.mean() for s in samples) / len(samples))
    check("manual DC control", sweep[0] < sweep[1] < sweep[2], f"means={['%.3f' % m for m in sweep]}")

    # Wasserstein distance basics.
    check("wasserstein identity", sl.wasserstein1([1.0, 2.0], [1.0, 2.0]) == 0.0)
    check("wasserstein shift", abs(sl.wasserstein1([0.0], [3.0]) - 3.0) < 1e-12)

    mom = sl.brightness_summary(dataset)
    check("brightness summary", len(mom) == 3)

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
