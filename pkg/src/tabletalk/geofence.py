"""Proactive notifications: which dishes call out when a user moves.

A notification fires on the outside-to-inside edge of a fence, and only
when every profile gate passes and the per-(user, fence) cooldown has
elapsed. Exit needs the user to clear the radius by 10% so GPS jitter at
the rim cannot re-trigger.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import NonMonotonicTrace
from .geo import haversine_m
from .model import Catalog, Dish, GeoPoint, Geofence, Restaurant, UserProfile, rfc3339_to_ts, ts_to_rfc3339
from .recommend import eligible_except_radius

DEFAULT_COOLDOWN_S = 6 * 3600
EXIT_HYSTERESIS = 1.1  # counts as exited only beyond radius * 1.1


@dataclass(frozen=True)
class LocationUpdate:
    user_id: str
    point: GeoPoint
    at: float


@dataclass(frozen=True)
class NotificationRecord:
    user_id: str
    dish_id: str
    fence_id: str
    at: float
    message: str

    def to_wire(self) -> dict:
        return {
            "user_id": self.user_id,
            "dish_id": self.dish_id,
            "fence_id": self.fence_id,
            "at": ts_to_rfc3339(self.at),
            "message": self.message,
        }


@dataclass(frozen=True)
class FenceEntry:
    inside: bool
    last_fired_at: float | None = None


@dataclass(frozen=True)
class FenceState:
    """Per (user_id, fence_id) containment and cooldown bookkeeping."""

    entries: Mapping[tuple[str, str], FenceEntry] = field(
        default_factory=lambda: MappingProxyType({})
    )

    @classmethod
    def empty(cls) -> "FenceState":
        return cls()

    def entry(self, user_id: str, fence_id: str) -> FenceEntry | None:
        return self.entries.get((user_id, fence_id))


def point_in_fence(point: GeoPoint, fence: Geofence) -> bool:
    """Closed containment: on the rim counts as inside. Disabled fences
    contain nothing."""
    return fence.enabled and haversine_m(point, fence.center) <= fence.radius_m


def effective_fence(dish: Dish, restaurant: Restaurant, fences: Mapping[str, Geofence]) -> Geofence:
    """The dish's own fence when it has one, else the restaurant default."""
    if dish.dedicated_fence_id is not None:
        return fences[dish.dedicated_fence_id]
    return fences[restaurant.default_fence_id]


def _notification_message(dish: Dish, restaurant: Restaurant) -> str:
    return f"{dish.name} from {restaurant.name} is nearby. Come say hi!"


def process_location_update(
    update: LocationUpdate,
    catalog: Catalog,
    profile: UserProfile,
    state: FenceState,
    cooldown_s: float = DEFAULT_COOLDOWN_S,
) -> tuple[list[NotificationRecord], FenceState]:
    """Evaluate one location update against every dish fence.

    Returns the notifications that fired plus the updated state. Dishes are
    visited in id order; when several dishes share a fence, the first one
    that fires stamps the fence cooldown and silences its siblings for the
    rest of the window. Containment transitions are judged against the
    state as it was before this update, so siblings agree on "entered".
    """
    started = state.entries
    entries = dict(started)
    fired: list[NotificationRecord] = []
    for dish_id in sorted(catalog.dishes):
        dish = catalog.dishes[dish_id]
        restaurant = catalog.restaurant_for(dish)
        fence = effective_fence(dish, restaurant, catalog.fences)
        key = (update.user_id, fence.id)
        before = started.get(key)
        was_inside = before.inside if before else False
        if not fence.enabled:
            inside = False
        else:
            distance = haversine_m(update.point, fence.center)
            limit = fence.radius_m * (EXIT_HYSTERESIS if was_inside else 1.0)
            inside = distance <= limit
        current = entries.get(key)
        last_fired = current.last_fired_at if current else None
        entered = inside and not was_inside
        fires = (
            entered
            and eligible_except_radius(dish, restaurant, profile, update.at)
            and (profile.muted_until is None or profile.muted_until < update.at)
            and (last_fired is None or update.at - last_fired >= cooldown_s)
        )
        if fires:
            fired.append(
                NotificationRecord(
                    user_id=update.user_id,
                    dish_id=dish.id,
                    fence_id=fence.id,
                    at=update.at,
                    message=_notification_message(dish, restaurant),
                )
            )
            last_fired = update.at
        entries[key] = FenceEntry(inside=inside, last_fired_at=last_fired)
    return fired, FenceState(entries=MappingProxyType(entries))


def replay_walk(
    trace: Sequence[LocationUpdate],
    catalog: Catalog,
    profile: UserProfile,
    cooldown_s: float = DEFAULT_COOLDOWN_S,
) -> list[NotificationRecord]:
    """Fold a timestamp-ordered trace through the notifier from empty state."""
    previous_at: float | None = None
    state = FenceState.empty()
    out: list[NotificationRecord] = []
    for update in trace:
        if previous_at is not None and update.at < previous_at:
            raise NonMonotonicTrace("non-monotonic trace")
        previous_at = update.at
        fired, state = process_location_update(update, catalog, profile, state, cooldown_s=cooldown_s)
        out.extend(fired)
    return out


def parse_trace(items: Iterable[Mapping], default_user: str | None = None) -> list[LocationUpdate]:
    """Parse the JSON walk-trace format: [{user_id?, lat, lon, at}, ...].

    `at` may be RFC-3339 or epoch seconds. Entries without user_id use
    `default_user`.
    """
    trace = []
    for item in items:
        user_id = item.get("user_id", default_user)
        if not user_id:
            raise ValueError("trace entry without user_id")
        at = item["at"]
        if isinstance(at, str):
            at = rfc3339_to_ts(at)
        trace.append(
            LocationUpdate(
                user_id=str(user_id),
                point=GeoPoint(lat=float(item["lat"]), lon=float(item["lon"])),
                at=float(at),
            )
        )
    return trace
