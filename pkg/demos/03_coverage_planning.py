"""Boustrophedon coverage plans with bounded-curvature turns.

Plans a single-boat survey of a 100 m square and a three-boat split of the
same area, and draws both.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from asvsim import LocalPoint, SurveyArea, plan

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

area = SurveyArea(
    (LocalPoint(0, 0), LocalPoint(100, 0), LocalPoint(100, 100), LocalPoint(0, 100)),
    swath=10.0,
)

fig, axes = plt.subplots(1, 2, figsize=(11, 5.5))
for ax, k in zip(axes, (1, 3)):
    entries = [LocalPoint(-12, -12 + 40 * i) for i in range(k)]
    result = plan(area, k=k, r_min=5.0, entries=entries)
    print(f"== {k} vehicle(s) ==")
    print(result.description())
    print()
    xs = [p.east for p in area.boundary] + [area.boundary[0].east]
    ys = [p.north for p in area.boundary] + [area.boundary[0].north]
    ax.plot(xs, ys, "k--", lw=1)
    for vi in range(k):
        pts = [p for p, _ in result.waypoints(vi)]
        ax.plot([p.east for p in pts], [p.north for p in pts], "-", lw=1,
                label=f"boat {vi + 1}")
        ax.plot(entries[vi].east, entries[vi].north, "o")
    ax.set_aspect("equal")
    ax.set_title(f"k={k}, coverage {result.coverage_ratio:.3f}")
    ax.legend(loc="upper right", fontsize=8)

fig.tight_layout()
fig.savefig(OUT / "coverage_plans.png", dpi=120)
print(f"saved {OUT / 'coverage_plans.png'}")
