"""
Scoring crowd counts
====================

Mean absolute error and RMSE of predicted against annotated counts, here on
two reference image counts (258 annotated vs 267 predicted, 662 vs 453).
"""

from domectl.density import evaluate_counts

predicted = [267, 453]
truth = [258, 662]
mae, rmse = evaluate_counts(predicted, truth)
print(f"MAE {mae:.2f}  RMSE {rmse:.2f}")

###############################################################################
# Per-image errors: the second, denser scene is badly undercounted

for p, t in zip(predicted, truth):
    print(f"annotated {t:4d}  predicted {p:4d}  error {p - t:+5d} ({100 * (p - t) / t:+.1f} %)")
