"""The long-range radio: hard range cliff, random loss, and the reliable
mission transfer riding on top of it.
"""

import random

from asvsim import LinkModel, MissionReceiver, MissionSender, transmit
from asvsim.link import MissionData

print("== range cliff ==")
model = LinkModel()
rng = random.Random(0)
for d in (100, 1000, 2500, 2790, 2805, 3000):
    fate = transmit(model, b"frame", d, rng)
    print(f"  {d:5d} m: {'delivered after %.0f ms' % (fate * 1000) if fate is not None else 'dropped'}")

print("\n== mission upload through 25% loss ==")
mission = MissionData(7, tuple((34.0 + i * 1e-4, -81.0, 3.0) for i in range(16)))
lossy = random.Random(42)
t = 0.0
in_flight_down, in_flight_up = [], []


def send_down(msg):
    if lossy.random() > 0.25:
        in_flight_down.append((t + 0.05, msg))
    else:
        print(f"  t={t:5.2f}  XX {type(msg).__name__} dropped")


def send_up(msg):
    if lossy.random() > 0.25:
        in_flight_up.append((t + 0.05, msg))


sender = MissionSender(mission, send_down, now=t)
receiver = MissionReceiver()
while not sender.done and t < 30.0:
    for at, msg in [x for x in in_flight_down if x[0] <= t]:
        in_flight_down.remove((at, msg))
        receiver.on_message(msg, t, send_up)
    receiver.tick(t, send_up)
    for at, msg in [x for x in in_flight_up if x[0] <= t]:
        in_flight_up.remove((at, msg))
        sender.on_message(msg, t)
    sender.tick(t)
    t += 0.05

print(f"  result: {sender.result.name} after {t:.2f} s, {sender.frames_sent} frames sent "
      f"for {len(mission.items)} items")
print(f"  onboard mission identical: {receiver.loaded == mission}")
