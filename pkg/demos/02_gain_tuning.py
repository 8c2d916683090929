"""Steering-gain tuning on the scripted right-angle line test.

Shows what the tuner sees for good gains, a sluggish proportional gain,
and an over-derivative controller that chatters — then lets auto_tune
repair the bad ones.
"""

from asvsim import PidGains, auto_tune, line_test

for label, gains in (
    ("factory defaults", PidGains()),
    ("p too low", PidGains(p=0.2)),
    ("d too high", PidGains(d=1.5)),
):
    m = line_test(gains)
    print(f"{label:18s}: settle {m.settle_time:6.2f} s, {m.oscillations} oscillation(s), "
          f"chatter {m.chatter_rate:5.2f}/s, bias {m.bias:+.3f} m, "
          f"corner overshoot {m.corner_overshoot:5.2f} m -> "
          f"{'clean' if m.passes() else 'needs work'}")

print("\nauto-tuning from p=0.2 ...")
result = auto_tune(PidGains(p=0.2))
for action, gains in result.history:
    print(f"  {action:32s} -> p={gains.p:.3f} i={gains.i:.3f} d={gains.d:.4f}")
print(f"converged={result.converged} after {result.iterations} run(s): "
      f"p={result.gains.p:.3f} i={result.gains.i:.3f} d={result.gains.d:.4f} "
      f"wp_radius={result.gains.wp_radius:.1f}")

print("\nauto-tuning from d=1.5 ...")
result = auto_tune(PidGains(d=1.5))
for action, gains in result.history:
    print(f"  {action:32s} -> d={gains.d:.4f}")
print(f"converged={result.converged}: d={result.gains.d:.4f}")
