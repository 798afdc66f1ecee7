#!/usr/bin/env python3
"""Writes the shipped synthetic profile tables under data/profiles/."""
import json
import pathlib

SLICES = ["7g", "4g", "3g", "2g", "1g"]
IDLE_W = {"7g": 20.0, "4g": 12.0, "3g": 9.0, "2g": 6.0, "1g": 3.0}

# accuracy, memory GB, per-slice (mean ms, busy W); None where the weights don't fit
VARIANTS = [
    (0.791, 2.0, [(8, 200), (9, 120), (10, 95), (12, 65), (16, 31)]),
    (0.816, 3.5, [(12, 220), (16, 130), (20, 100), (28, 70), (45, 32)]),
    (0.836, 7.0, [(24, 240), (40, 140), (52, 110), (80, 75), None]),
    (0.843, 14.0, [(40, 250), (70, 150), (93, 115), None, None]),
]
SIGMA = 0.2


def table(indices):
    doc = {"variants": [], "latency": [], "energy": [], "idle": []}
    for new_id, idx in enumerate(indices, start=1):
        acc, mem, cells = VARIANTS[idx]
        doc["variants"].append({"id": new_id, "accuracy": acc, "memory_gb": mem})
        for slice_name, cell in zip(SLICES, cells):
            if cell is None:
                continue
            ms, watts = cell
            doc["latency"].append({"variant": new_id, "slice": slice_name, "mean_service_ms": ms,
                                   "dist": "lognormal", "sigma": SIGMA})
            doc["energy"].append({"variant": new_id, "slice": slice_name,
                                  "wh_per_request": round(watts * ms / 3.6e6, 9)})
    doc["idle"] = [{"slice": s, "watts": w} for s, w in IDLE_W.items()]
    return doc


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "profiles"
    out.mkdir(parents=True, exist_ok=True)
    (out / "default.json").write_text(json.dumps(table([0, 1, 2, 3]), indent=2) + "\n")
    (out / "small3.json").write_text(json.dumps(table([0, 1, 3]), indent=2) + "\n")


if __name__ == "__main__":
    main()
