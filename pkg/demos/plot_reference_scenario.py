"""
Dome opening time for a busy, warm hour
=======================================

A 72 % full prayer hall at 30 degrees C. We follow the controller through
fuzzification, rule firing, the clipped output curve and its centroid.
"""

import numpy as np

from domectl import default_engine

engine = default_engine()
inputs = {"crowd": 72.0, "weather": 30.0}

###############################################################################
# Fuzzify both inputs

for name, degrees in engine.fuzzify(inputs).items():
    print(name, {k: round(v, 4) for k, v in degrees.items()})

###############################################################################
# Rule strengths: AND is the minimum of the clause degrees

for i, (rule, strength) in enumerate(engine.evaluate_rules(inputs), start=1):
    print(f"rule {i}: {strength:.4f}  {rule}")

###############################################################################
# Aggregate and defuzzify

outcome = engine.infer(inputs)
print(f"open for {outcome.crisp:.2f} s = {outcome.crisp / 60:.2f} min")

###############################################################################
# Plot the aggregate against the four output terms (needs matplotlib)

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    grid = outcome.grid
    fig, ax = plt.subplots(figsize=(7, 3))
    for label, mf in engine.output.terms:
        ax.plot(grid, mf.sample(grid), lw=0.8, label=label)
    ax.fill_between(grid, outcome.aggregate, alpha=0.4, color="k", label="aggregate")
    ax.axvline(outcome.crisp, color="r", ls="--")
    ax.set_xlabel("open time (s)")
    ax.legend(loc="upper left", fontsize=7)
    fig.tight_layout()
    fig.savefig("reference_scenario.png", dpi=120)
    print("wrote reference_scenario.png")

###############################################################################
# Whole response surface at a glance

crowds = np.arange(0, 101, 10)
for temp in (5, 15, 25, 30, 40, 50):
    row = [engine.infer({"crowd": c, "weather": temp}).crisp for c in crowds]
    print(f"{temp:>3} C  " + " ".join(f"{v:6.1f}" for v in row))
