"""File-backed catalog store: JSON snapshot plus append-only event log.

Every mutation is one event appended to events.ndjson and then applied in
memory; startup loads snapshot.json and replays the log. Folding any
prefix of the log over the snapshot is a valid state, which is what makes
crash recovery testable. compact() folds the log into a fresh snapshot.
"""

from __future__ import annotations

import json
import os
from typing import IO, Any, Callable, Mapping

from .chat import ChatSession
from .errors import LogCorrupt
from .model import Catalog, Dish, Geofence, Restaurant, UserProfile

SCHEMA_VERSION = 1
SNAPSHOT_FILE = "snapshot.json"
EVENTS_FILE = "events.ndjson"


class Store:
    """Keyed collections with a single serialized writer.

    The caller (gateway) is responsible for validation and locking; the
    store only guarantees that whatever is committed is durable and that
    replaying the log reproduces it.
    """

    def __init__(self, data_dir: str | None = None):
        self.restaurants: dict[str, Restaurant] = {}
        self.dishes: dict[str, Dish] = {}
        self.fences: dict[str, Geofence] = {}
        self.profiles: dict[str, UserProfile] = {}
        self.sessions: dict[str, ChatSession] = {}
        self.avatars: dict[str, Any] = {}
        self.last_seq = 0
        self.events_replayed = 0
        self._data_dir = data_dir
        self._events_fh: IO[str] | None = None

    # -- startup ----------------------------------------------------------

    @classmethod
    def open(cls, data_dir: str | None) -> "Store":
        """Load snapshot + replay event log. Raises LogCorrupt with the
        byte offset of the first malformed record."""
        store = cls(data_dir)
        if data_dir is None:
            return store
        os.makedirs(data_dir, exist_ok=True)
        snapshot_path = os.path.join(data_dir, SNAPSHOT_FILE)
        if os.path.exists(snapshot_path):
            try:
                with open(snapshot_path, encoding="utf-8") as fh:
                    store._load_snapshot(json.load(fh))
            except (ValueError, KeyError, TypeError) as exc:
                pos = getattr(exc, "pos", 0)
                raise LogCorrupt(snapshot_path, pos, f"corrupt snapshot ({exc})") from None
        store._replay_events(os.path.join(data_dir, EVENTS_FILE))
        store._events_fh = open(os.path.join(data_dir, EVENTS_FILE), "a", encoding="utf-8")
        return store

    def _load_snapshot(self, data: Mapping) -> None:
        version = int(data.get("schema_version", -1))
        if version != SCHEMA_VERSION:
            raise ValueError(f"snapshot schema_version {version}, expected {SCHEMA_VERSION}")
        self.restaurants = {k: Restaurant.from_wire(v) for k, v in data.get("restaurants", {}).items()}
        self.dishes = {k: Dish.from_wire(v) for k, v in data.get("dishes", {}).items()}
        self.fences = {k: Geofence.from_wire(v) for k, v in data.get("geofences", {}).items()}
        self.profiles = {k: UserProfile.from_wire(v) for k, v in data.get("profiles", {}).items()}
        self.sessions = {k: ChatSession.from_wire(v) for k, v in data.get("sessions", {}).items()}
        self.avatars = dict(data.get("avatars", {}))
        self.last_seq = int(data.get("last_seq", 0))

    def _replay_events(self, path: str) -> None:
        if not os.path.exists(path):
            return
        with open(path, "rb") as fh:
            raw = fh.read()
        offset = 0
        for line in raw.split(b"\n"):
            if line.strip():
                try:
                    event = json.loads(line)
                    seq = int(event["seq"])
                    if seq != self.last_seq + 1:
                        raise ValueError(f"event seq {seq} after {self.last_seq}")
                    self._apply(event["op"], event["data"])
                    self.last_seq = seq
                    self.events_replayed += 1
                except (ValueError, KeyError, TypeError) as exc:
                    raise LogCorrupt(path, offset, f"bad event ({exc})") from None
            offset += len(line) + 1

    # -- mutation ---------------------------------------------------------

    def commit(self, op: str, data: dict) -> None:
        """Append one event, then apply it. Callers validate first."""
        seq = self.last_seq + 1
        if self._events_fh is not None:
            line = json.dumps({"seq": seq, "op": op, "data": data}, separators=(",", ":"))
            self._events_fh.write(line + "\n")
            self._events_fh.flush()
            os.fsync(self._events_fh.fileno())
        self._apply(op, data)
        self.last_seq = seq

    def _apply(self, op: str, data: Mapping) -> None:
        handler = _APPLIERS.get(op)
        if handler is None:
            raise ValueError(f"unknown event op {op!r}")
        handler(self, data)

    def compact(self) -> None:
        """Fold the log into the snapshot and truncate the log."""
        if self._data_dir is None:
            return
        snapshot_path = os.path.join(self._data_dir, SNAPSHOT_FILE)
        tmp_path = snapshot_path + ".tmp"
        with open(tmp_path, "w", encoding="utf-8") as fh:
            json.dump(self.snapshot_state(), fh)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp_path, snapshot_path)
        if self._events_fh is not None:
            self._events_fh.close()
        events_path = os.path.join(self._data_dir, EVENTS_FILE)
        self._events_fh = open(events_path, "w", encoding="utf-8")
        self._events_fh.flush()

    def close(self) -> None:
        if self._events_fh is not None:
            self._events_fh.close()
            self._events_fh = None

    # -- views ------------------------------------------------------------

    def catalog(self) -> Catalog:
        return Catalog(restaurants=self.restaurants, dishes=self.dishes, fences=self.fences)

    def snapshot_state(self) -> dict:
        """Canonical serialized state; used for snapshots and state hashes."""
        return {
            "schema_version": SCHEMA_VERSION,
            "last_seq": self.last_seq,
            "restaurants": {k: v.to_wire() for k, v in sorted(self.restaurants.items())},
            "dishes": {k: v.to_wire() for k, v in sorted(self.dishes.items())},
            "geofences": {k: v.to_wire() for k, v in sorted(self.fences.items())},
            "profiles": {k: v.to_wire() for k, v in sorted(self.profiles.items())},
            "sessions": {k: v.to_wire() for k, v in sorted(self.sessions.items())},
            "avatars": dict(sorted(self.avatars.items())),
        }


# --------------------------------------------------------------------------
# event appliers: pure state transitions, shared by replay and commit

def _put_restaurant(store: Store, data: Mapping) -> None:
    restaurant = Restaurant.from_wire(data)
    store.restaurants[restaurant.id] = restaurant


def _put_dish(store: Store, data: Mapping) -> None:
    dish = Dish.from_wire(data)
    store.dishes[dish.id] = dish


def _put_fence(store: Store, data: Mapping) -> None:
    fence = Geofence.from_wire(data)
    store.fences[fence.id] = fence


def _put_profile(store: Store, data: Mapping) -> None:
    profile = UserProfile.from_wire(data)
    store.profiles[profile.id] = profile


def _put_session(store: Store, data: Mapping) -> None:
    session = ChatSession.from_wire(data)
    store.sessions[session.id] = session


def _put_avatar(store: Store, data: Mapping) -> None:
    store.avatars[str(data["dish_id"])] = data["blob"]


def _delete_restaurant(store: Store, data: Mapping) -> None:
    rid = str(data["id"])
    restaurant = store.restaurants.pop(rid, None)
    if restaurant is None:
        return
    # cascades are a single event so every log prefix stays coherent
    doomed_dishes = [d for d in store.dishes.values() if d.restaurant_id == rid]
    for dish in doomed_dishes:
        store.dishes.pop(dish.id, None)
        store.avatars.pop(dish.id, None)
        if dish.dedicated_fence_id:
            store.fences.pop(dish.dedicated_fence_id, None)
    store.fences.pop(restaurant.default_fence_id, None)


def _delete_dish(store: Store, data: Mapping) -> None:
    dish = store.dishes.pop(str(data["id"]), None)
    if dish is None:
        return
    store.avatars.pop(dish.id, None)
    if dish.dedicated_fence_id:
        store.fences.pop(dish.dedicated_fence_id, None)


def _delete_fence(store: Store, data: Mapping) -> None:
    fid = str(data["id"])
    store.fences.pop(fid, None)
    for dish in list(store.dishes.values()):
        if dish.dedicated_fence_id == fid:
            # dish falls back to the restaurant default fence
            store.dishes[dish.id] = Dish.from_wire({**dish.to_wire(), "dedicated_fence_id": None})


def _delete_profile(store: Store, data: Mapping) -> None:
    store.profiles.pop(str(data["id"]), None)


_APPLIERS: dict[str, Callable[[Store, Mapping], None]] = {
    "put_restaurant": _put_restaurant,
    "put_dish": _put_dish,
    "put_fence": _put_fence,
    "put_profile": _put_profile,
    "put_session": _put_session,
    "put_avatar": _put_avatar,
    "delete_restaurant": _delete_restaurant,
    "delete_dish": _delete_dish,
    "delete_fence": _delete_fence,
    "delete_profile": _delete_profile,
}
