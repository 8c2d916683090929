"""Long-range radio link simulator and the reliable mission transfer that
runs over it.

The link has a hard line-of-sight cliff: frames inside ``max_range`` are
delivered after a fixed latency (minus optional random loss), frames
beyond it are always dropped. The demonstrated envelope of the real radio
was 2.8 km from a mast-mounted antenna, so that is the default cliff.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Callable

from .protocol import AckStatus, Message, MissionAck, MissionCount, MissionItem, MissionRequest


@dataclass
class LinkModel:
    max_range: float = 2800.0   # m, hard delivery cliff
    base_loss: float = 0.0      # drop probability inside range
    latency: float = 0.05       # s, one-way
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.base_loss <= 1.0:
            raise ValueError("base_loss must be a probability")
        if self.max_range < 0 or self.latency < 0:
            raise ValueError("max_range and latency must be non-negative")


def transmit(model: LinkModel, frame: bytes, distance: float, rng: random.Random) -> float | None:
    """Fate of one frame: one-way latency in seconds, or None when dropped.

    Dropping is deterministic given the rng state, so a seeded run is
    reproducible bit for bit.
    """
    if distance < 0:
        raise ValueError("distance must be non-negative")
    if distance > model.max_range:
        return None
    if model.base_loss > 0.0 and rng.random() < model.base_loss:
        return None
    return model.latency


@dataclass
class LinkStats:
    sent: int = 0
    dropped: int = 0
    delivered: int = 0


class RadioLink:
    """Bidirectional queue pair between one vehicle and the ground station.

    Frames are delivered in FIFO order per direction once the simulation
    clock passes their delivery time.
    """

    def __init__(self, model: LinkModel | None = None, rng: random.Random | None = None):
        self.model = model or LinkModel()
        self.rng = rng or random.Random(self.model.seed)
        self._to_vehicle: deque[tuple[float, bytes]] = deque()
        self._to_gcs: deque[tuple[float, bytes]] = deque()
        self.stats = LinkStats()

    def _send(self, queue: deque, data: bytes, t: float, distance: float) -> bool:
        self.stats.sent += 1
        latency = transmit(self.model, data, distance, self.rng)
        if latency is None:
            self.stats.dropped += 1
            return False
        queue.append((t + latency, data))
        return True

    def send_to_vehicle(self, data: bytes, t: float, distance: float) -> bool:
        return self._send(self._to_vehicle, data, t, distance)

    def send_to_gcs(self, data: bytes, t: float, distance: float) -> bool:
        return self._send(self._to_gcs, data, t, distance)

    @staticmethod
    def _drain(queue: deque, t: float) -> list[bytes]:
        out = []
        while queue and queue[0][0] <= t:
            out.append(queue.popleft()[1])
        return out

    def poll_vehicle(self, t: float) -> list[bytes]:
        frames = self._drain(self._to_vehicle, t)
        self.stats.delivered += len(frames)
        return frames

    def poll_gcs(self, t: float) -> list[bytes]:
        frames = self._drain(self._to_gcs, t)
        self.stats.delivered += len(frames)
        return frames


@dataclass(frozen=True)
class MissionData:
    """Transfer-level mission image: (lat, lon, speed) per item."""

    mission_id: int
    items: tuple[tuple[float, float, float], ...]


class MissionSender:
    """Ground-side half of the reliable mission transfer.

    Sends the item count and every item up front, then answers gap
    requests. An item re-requested more than ``max_retries`` times, or
    silence past the overall deadline, fails the transfer; the vehicle
    then simply keeps whatever mission it had.
    """

    def __init__(
        self,
        mission: MissionData,
        send: Callable[[Message], None],
        now: float,
        max_retries: int = 5,
        keepalive: float = 1.0,
    ):
        self.mission = mission
        self._send = send
        self.max_retries = max_retries
        self.keepalive = keepalive
        self.deadline = now + 10.0 + 0.2 * len(mission.items)
        self._retries: dict[int, int] = {}
        self._last_activity = now
        self.result: AckStatus | None = None
        self.frames_sent = 0
        send(MissionCount(len(mission.items), mission.mission_id))
        self.frames_sent += 1
        for i, (lat, lon, speed) in enumerate(mission.items):
            send(MissionItem(i, lat, lon, speed))
            self.frames_sent += 1

    @property
    def done(self) -> bool:
        return self.result is not None

    def on_message(self, msg: Message, now: float) -> None:
        if self.done:
            return
        if isinstance(msg, MissionAck) and msg.mission_id == self.mission.mission_id:
            self.result = msg.status
        elif isinstance(msg, MissionRequest):
            self._last_activity = now
            n = self._retries.get(msg.index, 0) + 1
            self._retries[msg.index] = n
            if n > self.max_retries:
                self.result = AckStatus.FAILED
                return
            if msg.index < len(self.mission.items):
                lat, lon, speed = self.mission.items[msg.index]
                self._send(MissionItem(msg.index, lat, lon, speed))
                self.frames_sent += 1

    def tick(self, now: float) -> None:
        if self.done:
            return
        if now >= self.deadline:
            self.result = AckStatus.FAILED
            return
        # Keepalive: re-announce the count so a receiver whose ack was lost
        # (or who missed the original announce) can re-ack or re-request.
        if now - self._last_activity >= self.keepalive:
            self._last_activity = now
            self._send(MissionCount(len(self.mission.items), self.mission.mission_id))
            self.frames_sent += 1


class MissionReceiver:
    """Vehicle-side half of the transfer. A staged mission becomes the
    loaded mission only when every item is held; partial uploads never
    activate anything."""

    def __init__(self, request_interval: float = 1.0, stale_after: float = 15.0):
        self.request_interval = request_interval
        self.stale_after = stale_after
        self._staging: dict | None = None
        self.loaded: MissionData | None = None
        self._last_progress = 0.0
        self._last_request = 0.0

    def on_message(self, msg: Message, now: float, send: Callable[[Message], None]) -> None:
        if isinstance(msg, MissionCount):
            if self.loaded is not None and msg.mission_id == self.loaded.mission_id:
                # Our ack was probably lost; repeat it.
                send(MissionAck(msg.mission_id, AckStatus.ACCEPTED))
                return
            if self._staging is None or self._staging["id"] != msg.mission_id:
                self._staging = {"id": msg.mission_id, "n": msg.n, "items": {}}
            self._last_progress = now
            self._maybe_complete(now, send)
        elif isinstance(msg, MissionItem):
            if self._staging is None:
                return
            self._staging["items"][msg.index] = (msg.lat, msg.lon, msg.speed)
            self._last_progress = now
            self._maybe_complete(now, send)

    def _maybe_complete(self, now: float, send) -> None:
        st = self._staging
        if st is None or len(st["items"]) < st["n"]:
            return
        items = tuple(st["items"][i] for i in range(st["n"]))
        self.loaded = MissionData(st["id"], items)
        self._staging = None
        send(MissionAck(self.loaded.mission_id, AckStatus.ACCEPTED))

    def tick(self, now: float, send: Callable[[Message], None]) -> None:
        st = self._staging
        if st is None:
            return
        if now - self._last_progress > self.stale_after:
            self._staging = None
            return
        if now - self._last_request >= self.request_interval:
            self._last_request = now
            missing = [i for i in range(st["n"]) if i not in st["items"]]
            for index in missing[:8]:
                send(MissionRequest(index))
