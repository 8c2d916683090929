"""Four boats under one ground station, driven through the HTTP API.

Starts the GCS server on a four-vehicle sim at 20x real time, lists the
fleet, uploads a fresh mission to boat 2, watches the binary stream for a
moment, runs the preflight checklist on boat 3, and kills boat 4.
"""

import json
import socket
import struct
import time
import urllib.request

from asvsim import FrameDecoder, SimWorld
from asvsim.scenario import scenario_from_dict
from asvsim.server import serve

scenario = scenario_from_dict(
    {
        "name": "fleet",
        "seed": 3,
        "origin": {"lat": 34.0, "lon": -81.0},
        "duration": 3600,
        "vehicles": [
            # Boat 3 stays benched in manual; the others fly their survey slabs.
            {"sys_id": i, "start": {"east": -20.0 * i, "north": -15.0},
             "mode": "MANUAL_RC" if i == 3 else "AUTO_WP_ONBOARD"}
            for i in (1, 2, 3, 4)
        ],
        "survey": {
            "polygon": [[34.0, -81.0], [34.0018, -81.0], [34.0018, -81.0022], [34.0, -81.0022]],
            "swath": 10.0, "speed": 4.0,
        },
    }
)
world = SimWorld(scenario)
http, runner = serve(world, port=0, time_scale=20.0)
base = f"http://127.0.0.1:{http.port}"
print(f"GCS API on {base}")


def get(path):
    with urllib.request.urlopen(base + path, timeout=10) as r:
        return json.loads(r.read())


def post(path, payload=None):
    req = urllib.request.Request(base + path, data=json.dumps(payload or {}).encode(),
                                 headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req, timeout=30) as r:
        return json.loads(r.read())


time.sleep(2.0)
print("\n== fleet ==")
for v in get("/fleet")["vehicles"]:
    print(f"  boat {v['sys_id']}: {v['link_state']}, mode {v.get('mode')}, "
          f"engine {v.get('engine')}")

print("\n== upload a short mission to boat 2 ==")
result = post("/vehicle/2/mission", {
    "waypoints": [
        {"lat": 34.0004, "lon": -81.0004, "speed": 3.5},
        {"lat": 34.0008, "lon": -81.0004, "speed": 3.5},
    ],
})
print(f"  {result}")

print("\n== sip the binary stream ==")
sock = socket.create_connection(("127.0.0.1", http.port), timeout=5)
sock.sendall(b"GET /stream HTTP/1.1\r\nHost: demo\r\n\r\n")
buf = b""
while b"\r\n\r\n" not in buf:
    buf += sock.recv(4096)
body = buf.split(b"\r\n\r\n", 1)[1]
decoder = FrameDecoder()
seen = 0
deadline = time.monotonic() + 3
while seen < 12 and time.monotonic() < deadline:
    while len(body) >= 4:
        (n,) = struct.unpack("<I", body[:4])
        if len(body) < 4 + n:
            break
        for frame in decoder.feed(body[4 : 4 + n]):
            print(f"  sys {frame.sys_id}: {type(frame.message).__name__}")
            seen += 1
        body = body[4 + n :]
    try:
        body += sock.recv(4096)
    except socket.timeout:
        break
sock.close()

print("\n== preflight the benched boat 3 ==")
report = post("/vehicle/3/preflight")
print(f"  passed: {report['passed']}")
for item in report["items"][:6]:
    print(f"  [{item['stage']:10s}] {item['name']:16s} {'ok' if item['passed'] else 'FAIL'}")

print("\n== kill boat 4 ==")
print(f"  {post('/vehicle/4/kill')}")
time.sleep(1.0)
print(f"  boat 4 engine now: {get('/vehicle/4').get('engine')}")

runner.stop()
http.stop()
print("\ndone")
