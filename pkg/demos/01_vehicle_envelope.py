"""Drive the bare hull model through its performance envelope.

Holds full throttle in calm water to find top speed, locks the nozzle over
to trace the minimum-radius circle, and burns two simulated tanks to the
last drop to check endurance. Saves a picture of the turn track.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from asvsim import EngineStatus, UniformField, VehicleParams, VehicleState, fuel_endurance
from asvsim.vehicle import step

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

params = VehicleParams()
calm = UniformField()
dt = 0.05

print("== top speed ==")
state = VehicleState(fuel=params.fuel_capacity)
for _ in range(int(60 / dt)):
    state = step(params, state, steering=0.0, throttle=1.0, env=calm, dt=dt)
print(f"steady water speed: {state.v_water:.3f} m/s = {state.v_water * 3.6:.2f} km/h")

print("\n== minimum turn radius ==")
track = []
for _ in range(int(40 / dt)):
    state = step(params, state, steering=1.0, throttle=1.0, env=calm, dt=dt)
    track.append((state.pos.east, state.pos.north))
track = np.array(track)
loop = track[len(track) // 2 :]
center = loop.mean(axis=0)
radii = np.hypot(loop[:, 0] - center[0], loop[:, 1] - center[1])
print(f"track radius: {radii.mean():.3f} m (min {radii.min():.3f}, max {radii.max():.3f})")

plt.figure(figsize=(5, 5))
plt.plot(track[:, 0], track[:, 1], lw=0.8)
plt.axis("equal")
plt.xlabel("east [m]")
plt.ylabel("north [m]")
plt.title("full-throttle, full-deflection track")
plt.savefig(OUT / "turn_circle.png", dpi=120)
print(f"saved {OUT / 'turn_circle.png'}")

print("\n== endurance ==")
for label, u in (("full throttle", 1.0), ("idle", 0.0), ("half", 0.5)):
    print(f"closed-form endurance at {label}: {fuel_endurance(params, u):.2f} h")

for label, u in (("full throttle", 1.0), ("idle", 0.0)):
    s = VehicleState(fuel=params.fuel_capacity)
    while s.engine is EngineStatus.RUNNING:
        s = step(params, s, 0.0, u, calm, 0.1)
    print(f"simulated tank at {label}: dry after {s.t / 3600:.3f} h")
