"""Regenerates toy_empirical.csv: 8 institutions x 3 terms of synthetic
course outcomes with a drifting label model. Deterministic."""
import csv
import math
import random

rng = random.Random(20240501)
rows = []
for inst in range(1, 9):
    school = f"college_{inst:02d}"
    base = rng.uniform(-0.3, 0.3)
    for term in (1, 2, 3):
        drift = 0.35 * (term - 1) * (1 if inst % 2 else -1)
        for _ in range(220):
            female = int(rng.random() < 0.5)
            first_gen = int(rng.random() < 0.4)
            full_time = int(rng.random() < 0.7 - 0.05 * term)
            gpa = min(4.0, max(0.0, rng.gauss(2.9 + 0.1 * term, 0.6)))
            credits = max(0.0, rng.gauss(12 + 2 * full_time, 3))
            eta = base - 4.0 + 1.3 * gpa + 0.05 * credits + 0.3 * full_time - 0.2 * first_gen
            eta += drift * (gpa - 2.9) + 0.4 * drift * female
            passed = int(rng.random() < 1 / (1 + math.exp(-eta)))
            row = [school, term, passed, f"{gpa:.3f}", f"{credits:.1f}", full_time, female, first_gen]
            if rng.random() < 0.004:
                row[rng.choice([3, 4, 5])] = "NA"
            rows.append(row)

with open("toy_empirical.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["school", "term", "passed", "gpa", "credits", "full_time", "female", "first_gen"])
    w.writerows(rows)
