"""One-dimensional closed forms: three classical singular functions arise from
random affine dynamics on the line.

- The doubling system x -> 2x / 2x-1 with weights (a, 1-a): the probability of
  escaping to +infinity is Lebesgue's singular function L_a.
- Its weight-derivative at a = 1/2 is (twice) the Takagi function.
- The ternary push-out system gives the devil's staircase.
"""

from pathlib import Path

import numpy as np

from coopdyn.io import write_csv
from coopdyn.oracle1d import (devils_staircase, doubling_system,
                              lebesgue_singular, real_parameter_derivative,
                              real_random_T, takagi_classic, ternary_system)

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

xs = np.linspace(0.0, 1.0, 4097)

# closed form vs the generic T evaluator
for a in (0.3, 0.5, 0.8):
    gap = np.max(np.abs(real_random_T(doubling_system(a), xs)
                        - lebesgue_singular(a, xs)))
    print(f"L_{a}: recursion vs closed form, sup gap {gap:.2e}")

gap = np.max(np.abs(real_random_T(ternary_system(), xs) - devils_staircase(xs)))
print(f"devil's staircase: sup gap {gap:.2e}")

psi = real_parameter_derivative(xs, depth=40)
takagi = takagi_classic(xs, 40)
print(f"(1/2) dL_a/da vs Takagi series: sup gap "
      f"{np.max(np.abs(0.5 * psi - takagi)):.2e}")

write_csv(OUT / "lebesgue_03.csv", ["x", "L"],
          zip(xs, lebesgue_singular(0.3, xs)))
write_csv(OUT / "takagi.csv", ["x", "T"], zip(xs, takagi))
write_csv(OUT / "devils_staircase.csv", ["x", "C"],
          zip(xs, devils_staircase(xs)))
print("wrote three CSVs to", OUT)
