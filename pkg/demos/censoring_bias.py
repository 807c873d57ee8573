"""Why censored durations cannot simply be averaged.

Four lives are followed; two leave the study before dying. Averaging the
observed durations, or only the complete ones, both miss the true mean.
The Kaplan-Meier curve uses the censored lives correctly.
"""

import numpy as np

from survml import kaplan_meier, nelson_aalen

real = np.array([7.1, 6.0, 7.0, 3.0])
observed = np.array([7.1, 4.9, 3.4, 3.0])
events = np.array([1, 0, 0, 1])

print(f"true mean duration      {real.mean():.3f}")
print(f"observed mean           {observed.mean():.3f}")
print(f"complete cases only     {observed[events == 1].mean():.3f}")

km = kaplan_meier(observed, events)
na = nelson_aalen(observed, events)
for t in (2.0, 3.0, 5.0, 7.1):
    print(f"t={t:>4}  KM S(t)={float(km(t)):.4f}  NA exp(-H(t))={np.exp(-float(na(t))):.4f}")
