"""Expand four lives into the yearly pseudo table used by discrete models."""

import tempfile
from pathlib import Path

from survml import exposure_expansion, load_survival_table

CSV = """id,age,gender,Y,delta
S1,40,Female,7.1,1
S2,30,Male,4.9,0
S3,52,Male,3.4,0
S4,60,Female,3,1
"""

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "four.csv"
    path.write_text(CSV, encoding="utf-8")
    table = load_survival_table(path, "Y", "delta", id_column="id", categorical=["gender"])
pseudo = exposure_expansion(table, time_varying=["age"])
print(f"{'id':>3} {'int':>3} {'age':>5} {'ei':>5} {'ec':>5} {'d':>2}")
for r in range(len(pseudo)):
    print(f"{pseudo.ids[r]:>3} {pseudo.interval[r]:>3} {pseudo.covariates['age'][r]:>5.1f} "
          f"{pseudo.ei[r]:>5.2f} {pseudo.ec[r]:>5.2f} {int(pseudo.delta[r]):>2}")
print(f"rows={len(pseudo)}  crude q = {pseudo.delta.sum() / pseudo.ei.sum():.4f}")
