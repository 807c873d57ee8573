"""Fit discrete and continuous models on simulated lives, check calibration, price a term contract."""

import numpy as np

from survml.data import CATEGORICAL, NUMERIC, SurvivalTable
from survml.metrics import smr_discrete, weighted_roc
from survml.pipeline import fit_model
from survml.pricing import ContractSpec, pure_premium, survival_from_q
from survml import exposure_expansion

rng = np.random.default_rng(2024)
n = 2000
age = rng.integers(35, 66, n).astype(float)
sex = rng.choice(np.array(["F", "M"], dtype=object), n)
hazard = 0.004 * np.exp(0.08 * (age - 35) + 0.4 * (sex == "M"))
T = rng.exponential(1 / hazard)
C = rng.uniform(2, 10, n)
table = SurvivalTable(ids=np.arange(n), durations=np.minimum(T, C), events=(T <= C).astype(int),
                      covariates={"age": age, "sex": sex}, schema={"age": NUMERIC, "sex": CATEGORICAL})

pseudo = exposure_expansion(table, time_varying=["age"])
keep = ~pseudo.degenerate
spec = ContractSpec(sum_insured=100_000, horizon=10, interest=0.02)

for kind, cfg in [("logistic", {}), ("xgb", {"n_rounds": 150, "max_depth": 3})]:
    bundle = fit_model(kind, table, dict(cfg, time_varying=["age"]))
    q = bundle.mortality(bundle.encode_pseudo(pseudo)[keep])
    ratio = smr_discrete(pseudo.delta[keep], pseudo.ei[keep], q)
    auc = weighted_roc(pseudo.delta[keep], pseudo.ei[keep], q).auc
    print(f"{kind:>9}: train SMR {ratio:.3f}  weighted AUC {auc:.3f}")
    for a in (40, 50, 60):
        row = [pure_premium(survival_from_q(bundle.individual_mortality({"age": float(a), "sex": s}, 10)), spec)
               for s in ("F", "M")]
        print(f"           age {a}: premium F {row[0]:8.0f}   M {row[1]:8.0f}")

cox = fit_model("cox", table)
print("cox coefficients:", {k: round(float(b), 3) for k, b in zip(cox.column_names, cox.model.beta)})
