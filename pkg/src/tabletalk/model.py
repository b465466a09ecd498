"""Core domain types: places, dishes, fences, profiles, opening hours.

Everything here is an immutable value. Records are replaced wholesale
through the gateway store; nothing mutates in place, so instances are safe
to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum, IntEnum
from typing import Iterable, Mapping, Optional

from .errors import CorruptCatalog

WEEKDAYS = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")
MINUTES_PER_DAY = 1440
MINUTES_PER_WEEK = 7 * MINUTES_PER_DAY


# --------------------------------------------------------------------------
# timestamps
#
# Internally every timestamp is UTC epoch seconds (float). RFC-3339 strings
# appear only on the wire and in serialized files.

def ts_to_rfc3339(ts: float) -> str:
    """Format epoch seconds as an RFC-3339 UTC string."""
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    if ts == int(ts):
        return dt.strftime("%Y-%m-%dT%H:%M:%SZ")
    return dt.isoformat().replace("+00:00", "Z")


def rfc3339_to_ts(text: str) -> float:
    """Parse an RFC-3339 string to epoch seconds. Raises ValueError."""
    dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def local_day_minute(ts: float, utc_offset_min: int = 0) -> tuple[int, int]:
    """Local (weekday, minute-of-day) for a UTC timestamp.

    Weekday 0 is Monday. The offset is a fixed per-restaurant value; there
    is no DST handling.
    """
    dt = datetime.fromtimestamp(ts + utc_offset_min * 60, tz=timezone.utc)
    return dt.weekday(), dt.hour * 60 + dt.minute


# --------------------------------------------------------------------------
# enumerations

class Diet(str, Enum):
    """What a user is willing to eat."""

    OMNIVORE = "omnivore"
    VEGETARIAN = "vegetarian"
    VEGAN = "vegan"


class DietClass(str, Enum):
    """How a dish is classified."""

    VEGAN = "vegan"
    VEGETARIAN = "vegetarian"
    MEAT = "meat"


class AvatarGender(str, Enum):
    MALE = "male"
    FEMALE = "female"
    UNSPECIFIED = "unspecified"


class SeasonalEffect(str, Enum):
    NONE = "none"
    SPRING = "spring"
    EASTER = "easter"
    SUMMER = "summer"
    FALL = "fall"
    WINTER = "winter"


class Phase(IntEnum):
    """The four phases of an eating-out visit, in visit order."""

    PREARRIVAL = 0
    POSTARRIVAL_PREPROCESS = 1
    WHILE_DINING = 2
    AFTER_DINING = 3

    @property
    def wire(self) -> str:
        return self.name.lower()

    @classmethod
    def from_wire(cls, text: str) -> "Phase":
        try:
            return cls[text.upper()]
        except KeyError:
            raise ValueError(f"unknown phase {text!r}") from None


# diet -> accepted dish classes; omnivore accepts everything, vegan only vegan
_DIET_ACCEPTS = {
    Diet.OMNIVORE: {DietClass.VEGAN, DietClass.VEGETARIAN, DietClass.MEAT},
    Diet.VEGETARIAN: {DietClass.VEGAN, DietClass.VEGETARIAN},
    Diet.VEGAN: {DietClass.VEGAN},
}


def diet_accepts(diet: Diet, dish_class: DietClass) -> bool:
    """True when a user with `diet` will eat a dish of `dish_class`."""
    return dish_class in _DIET_ACCEPTS[Diet(diet)]


# --------------------------------------------------------------------------
# geography

@dataclass(frozen=True)
class GeoPoint:
    """WGS84 coordinate in decimal degrees."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError("coordinates must be finite")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} out of [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} out of [-180, 180]")

    def to_wire(self) -> dict:
        return {"lat": self.lat, "lon": self.lon}

    @classmethod
    def from_wire(cls, data: Mapping) -> "GeoPoint":
        return cls(lat=float(data["lat"]), lon=float(data["lon"]))


# --------------------------------------------------------------------------
# opening hours

Interval = tuple[int, int]


@dataclass(frozen=True)
class OpeningHours:
    """Weekly opening intervals, minutes since local midnight.

    `days` holds one tuple of (open_minute, close_minute) intervals per
    weekday, Monday first. Intervals are half-open [open, close). An
    interval with close < open runs overnight: [open, 1440) on its weekday
    plus [0, close) on the next. An empty tuple means closed that day.
    """

    days: tuple[tuple[Interval, ...], ...] = ((),) * 7

    def __post_init__(self) -> None:
        if len(self.days) != 7:
            raise ValueError("opening hours need exactly 7 weekday entries")
        for intervals in self.days:
            for open_m, close_m in intervals:
                if not (0 <= open_m < MINUTES_PER_DAY and 0 <= close_m < MINUTES_PER_DAY):
                    raise ValueError(f"minute out of [0, 1440): ({open_m}, {close_m})")
                if open_m == close_m:
                    raise ValueError("interval with open == close")
        segments = sorted(self.week_segments())
        for (_, prev_end), (next_start, _) in zip(segments, segments[1:]):
            if next_start < prev_end:
                raise ValueError("overlapping opening intervals")

    def week_segments(self) -> list[tuple[int, int]]:
        """Normalize to half-open segments on the 10080-minute week."""
        segments: list[tuple[int, int]] = []
        for day, intervals in enumerate(self.days):
            base = day * MINUTES_PER_DAY
            for open_m, close_m in intervals:
                if open_m < close_m:
                    segments.append((base + open_m, base + close_m))
                else:
                    segments.append((base + open_m, base + MINUTES_PER_DAY))
                    next_base = ((day + 1) % 7) * MINUTES_PER_DAY
                    segments.append((next_base, next_base + close_m))
        return segments

    def to_wire(self) -> dict:
        return {
            name: [[o, c] for o, c in intervals]
            for name, intervals in zip(WEEKDAYS, self.days)
            if intervals
        }

    @classmethod
    def from_wire(cls, data: Mapping) -> "OpeningHours":
        unknown = set(data) - set(WEEKDAYS)
        if unknown:
            raise ValueError(f"unknown weekday keys: {sorted(unknown)}")
        days = tuple(
            tuple((int(o), int(c)) for o, c in data.get(name, []))
            for name in WEEKDAYS
        )
        return cls(days=days)


def is_open(hours: OpeningHours, weekday: int, minute: int) -> bool:
    """True when (weekday, minute) falls inside an opening interval.

    Overnight intervals cover [open, 1440) on their own weekday and
    [0, close) on the following one.
    """
    if not 0 <= minute < MINUTES_PER_DAY:
        raise ValueError(f"minute {minute} out of [0, 1440)")
    weekday %= 7
    for open_m, close_m in hours.days[weekday]:
        if open_m < close_m:
            if open_m <= minute < close_m:
                return True
        elif minute >= open_m:
            return True
    for open_m, close_m in hours.days[(weekday - 1) % 7]:
        if close_m < open_m and minute < close_m:
            return True
    return False


# --------------------------------------------------------------------------
# entities

@dataclass(frozen=True)
class Geofence:
    """Circular trigger region owned by one restaurant or one dish."""

    id: str
    owner_type: str  # "restaurant" | "dish"
    owner_id: str
    center: GeoPoint
    radius_m: float
    enabled: bool = True

    def __post_init__(self) -> None:
        if self.owner_type not in ("restaurant", "dish"):
            raise ValueError(f"bad fence owner type {self.owner_type!r}")
        if not (math.isfinite(self.radius_m) and self.radius_m > 0):
            raise ValueError("fence radius must be > 0")

    def to_wire(self) -> dict:
        return {
            "id": self.id,
            "owner_type": self.owner_type,
            "owner_id": self.owner_id,
            "center": self.center.to_wire(),
            "radius_m": self.radius_m,
            "enabled": self.enabled,
        }

    @classmethod
    def from_wire(cls, data: Mapping) -> "Geofence":
        return cls(
            id=str(data["id"]),
            owner_type=str(data["owner_type"]),
            owner_id=str(data["owner_id"]),
            center=GeoPoint.from_wire(data["center"]),
            radius_m=float(data["radius_m"]),
            enabled=bool(data.get("enabled", True)),
        )


@dataclass(frozen=True)
class Restaurant:
    id: str
    name: str
    location: GeoPoint
    hours: OpeningHours
    default_fence_id: str
    chain_id: Optional[str] = None
    enabled: bool = True
    utc_offset_min: int = 0  # fixed offset; local time = UTC + offset

    def to_wire(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "chain_id": self.chain_id,
            "location": self.location.to_wire(),
            "hours": self.hours.to_wire(),
            "default_fence_id": self.default_fence_id,
            "enabled": self.enabled,
            "utc_offset_min": self.utc_offset_min,
        }

    @classmethod
    def from_wire(cls, data: Mapping) -> "Restaurant":
        return cls(
            id=str(data["id"]),
            name=str(data["name"]),
            chain_id=None if data.get("chain_id") is None else str(data["chain_id"]),
            location=GeoPoint.from_wire(data["location"]),
            hours=OpeningHours.from_wire(data.get("hours", {})),
            default_fence_id=str(data["default_fence_id"]),
            enabled=bool(data.get("enabled", True)),
            utc_offset_min=int(data.get("utc_offset_min", 0)),
        )


@dataclass(frozen=True)
class Dish:
    """The content unit and chat persona."""

    id: str
    restaurant_id: str
    name: str
    ingredients: tuple[str, ...]
    price_minor: int
    nickname: Optional[str] = None
    image_ref: str = ""
    description: str = ""
    avatar_gender: AvatarGender = AvatarGender.UNSPECIFIED
    allergens: frozenset[str] = frozenset()
    cuisine: str = ""
    local: bool = False
    organic: bool = False
    diet_class: DietClass = DietClass.MEAT
    seasonal_effect: SeasonalEffect = SeasonalEffect.NONE
    dedicated_fence_id: Optional[str] = None
    active: bool = True
    created_at: float = 0.0

    def to_wire(self) -> dict:
        return {
            "id": self.id,
            "restaurant_id": self.restaurant_id,
            "name": self.name,
            "nickname": self.nickname,
            "image_ref": self.image_ref,
            "ingredients": list(self.ingredients),
            "description": self.description,
            "price_minor": self.price_minor,
            "avatar_gender": self.avatar_gender.value,
            "allergens": sorted(self.allergens),
            "cuisine": self.cuisine,
            "local": self.local,
            "organic": self.organic,
            "diet_class": self.diet_class.value,
            "seasonal_effect": self.seasonal_effect.value,
            "dedicated_fence_id": self.dedicated_fence_id,
            "active": self.active,
            "created_at": ts_to_rfc3339(self.created_at),
        }

    @classmethod
    def from_wire(cls, data: Mapping) -> "Dish":
        created = data.get("created_at", 0.0)
        if isinstance(created, str):
            created = rfc3339_to_ts(created)
        return cls(
            id=str(data["id"]),
            restaurant_id=str(data["restaurant_id"]),
            name=str(data["name"]),
            nickname=None if data.get("nickname") is None else str(data["nickname"]),
            image_ref=str(data.get("image_ref", "")),
            ingredients=tuple(str(i) for i in data.get("ingredients", [])),
            description=str(data.get("description", "")),
            price_minor=int(data["price_minor"]),
            avatar_gender=AvatarGender(data.get("avatar_gender", "unspecified")),
            allergens=frozenset(str(a) for a in data.get("allergens", [])),
            cuisine=str(data.get("cuisine", "")),
            local=bool(data.get("local", False)),
            organic=bool(data.get("organic", False)),
            diet_class=DietClass(data.get("diet_class", "meat")),
            seasonal_effect=SeasonalEffect(data.get("seasonal_effect", "none")),
            dedicated_fence_id=(
                None
                if data.get("dedicated_fence_id") is None
                else str(data["dedicated_fence_id"])
            ),
            active=bool(data.get("active", True)),
            created_at=float(created),
        )


@dataclass(frozen=True)
class UserProfile:
    """Guest or registered user: exclusions, diet, budget, blacklists, mute."""

    id: str
    registered: bool = False
    allergen_exclusions: frozenset[str] = frozenset()
    diet: Diet = Diet.OMNIVORE
    budget_limit_minor: Optional[int] = None
    blacklist_restaurants: frozenset[str] = frozenset()
    blacklist_chains: frozenset[str] = frozenset()
    muted_until: Optional[float] = None

    def __post_init__(self) -> None:
        if self.budget_limit_minor is not None and self.budget_limit_minor < 0:
            raise ValueError("budget limit must be >= 0")

    def to_wire(self) -> dict:
        return {
            "id": self.id,
            "registered": self.registered,
            "allergen_exclusions": sorted(self.allergen_exclusions),
            "diet": self.diet.value,
            "budget_limit_minor": self.budget_limit_minor,
            "blacklist_restaurants": sorted(self.blacklist_restaurants),
            "blacklist_chains": sorted(self.blacklist_chains),
            "muted_until": None if self.muted_until is None else ts_to_rfc3339(self.muted_until),
        }

    @classmethod
    def from_wire(cls, data: Mapping) -> "UserProfile":
        muted = data.get("muted_until")
        if isinstance(muted, str):
            muted = rfc3339_to_ts(muted)
        budget = data.get("budget_limit_minor")
        return cls(
            id=str(data["id"]),
            registered=bool(data.get("registered", False)),
            allergen_exclusions=frozenset(str(a) for a in data.get("allergen_exclusions", [])),
            diet=Diet(data.get("diet", "omnivore")),
            budget_limit_minor=None if budget is None else int(budget),
            blacklist_restaurants=frozenset(str(r) for r in data.get("blacklist_restaurants", [])),
            blacklist_chains=frozenset(str(c) for c in data.get("blacklist_chains", [])),
            muted_until=muted,
        )


# Profile used when a guest browses before configuring anything: an
# omnivore with no exclusions, budget, or blacklists.
GUEST_DEFAULT_PROFILE = UserProfile(id="")


# --------------------------------------------------------------------------
# catalog

@dataclass(frozen=True)
class Catalog:
    """Read-only snapshot of restaurants, dishes, and fences."""

    restaurants: Mapping[str, Restaurant] = field(default_factory=dict)
    dishes: Mapping[str, Dish] = field(default_factory=dict)
    fences: Mapping[str, Geofence] = field(default_factory=dict)

    def restaurant_for(self, dish: Dish) -> Restaurant:
        try:
            return self.restaurants[dish.restaurant_id]
        except KeyError:
            raise CorruptCatalog(f"dish {dish.id} references missing restaurant {dish.restaurant_id}") from None

    def fence(self, fence_id: str) -> Geofence:
        try:
            return self.fences[fence_id]
        except KeyError:
            raise CorruptCatalog(f"missing geofence {fence_id}") from None

    def check(self) -> None:
        """Raise CorruptCatalog on the first dangling reference."""
        for restaurant in self.restaurants.values():
            self.fence(restaurant.default_fence_id)
        for dish in self.dishes.values():
            self.restaurant_for(dish)
            if dish.dedicated_fence_id is not None:
                self.fence(dish.dedicated_fence_id)
        for fence in self.fences.values():
            owners = self.restaurants if fence.owner_type == "restaurant" else self.dishes
            if fence.owner_id not in owners:
                raise CorruptCatalog(f"fence {fence.id} references missing {fence.owner_type} {fence.owner_id}")


# --------------------------------------------------------------------------
# validation

def validate_dish(dish: Dish, known_restaurants: Iterable[str]) -> list[str]:
    """Check Dish invariants; returns violations, empty when the dish is ok.

    Never raises: authoring surfaces echo the violation list back to the
    caller as a 422.
    """
    violations = []
    if dish.price_minor < 0:
        violations.append("negative price")
    if dish.restaurant_id not in set(known_restaurants):
        violations.append("dangling restaurant")
    if dish.active and not dish.ingredients:
        violations.append("empty ingredients")
    return violations


__all__ = [
    "AvatarGender",
    "Catalog",
    "Diet",
    "DietClass",
    "Dish",
    "GeoPoint",
    "Geofence",
    "GUEST_DEFAULT_PROFILE",
    "Interval",
    "MINUTES_PER_DAY",
    "MINUTES_PER_WEEK",
    "OpeningHours",
    "Phase",
    "Restaurant",
    "SeasonalEffect",
    "UserProfile",
    "WEEKDAYS",
    "diet_accepts",
    "is_open",
    "local_day_minute",
    "rfc3339_to_ts",
    "ts_to_rfc3339",
    "validate_dish",
]
