"""Profile-aware dish discovery: the explore feed and the exploit top-3.

Both run off one eligibility predicate. The explore feed keeps ineligible
dishes visible but flagged, so browsing stays possible; exploit returns
only dishes the user can actually order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .geo import haversine_m
from .model import (
    GUEST_DEFAULT_PROFILE,
    Catalog,
    Dish,
    GeoPoint,
    Restaurant,
    SeasonalEffect,
    UserProfile,
    diet_accepts,
    is_open,
    local_day_minute,
)

DEFAULT_RADIUS_M = 2000.0  # walkable "nearby"


@dataclass(frozen=True)
class RankedDish:
    """One feed entry."""

    dish_id: str
    restaurant_id: str
    distance_m: float
    price_minor: int
    seasonal_effect: SeasonalEffect
    eligible: bool

    def to_wire(self) -> dict:
        return {
            "dish_id": self.dish_id,
            "restaurant_id": self.restaurant_id,
            "distance_m": self.distance_m,
            "price_minor": self.price_minor,
            "seasonal_effect": self.seasonal_effect.value,
            "eligible": self.eligible,
        }


def eligible_except_radius(dish: Dish, restaurant: Restaurant, profile: UserProfile, now: float) -> bool:
    """All eligibility gates except the distance one.

    The geofence pipeline reuses this: proximity is decided by fence
    containment there, not by the feed radius.
    """
    if not dish.active or not restaurant.enabled:
        return False
    weekday, minute = local_day_minute(now, restaurant.utc_offset_min)
    if not is_open(restaurant.hours, weekday, minute):
        return False
    if dish.allergens & profile.allergen_exclusions:
        return False
    if not diet_accepts(profile.diet, dish.diet_class):
        return False
    if profile.budget_limit_minor is not None and dish.price_minor > profile.budget_limit_minor:
        return False
    if restaurant.id in profile.blacklist_restaurants:
        return False
    if restaurant.chain_id is not None and restaurant.chain_id in profile.blacklist_chains:
        return False
    return True


def eligible(
    dish: Dish,
    restaurant: Restaurant,
    profile: UserProfile,
    user_location: GeoPoint,
    now: float,
    radius_m: float = DEFAULT_RADIUS_M,
) -> bool:
    """True when the dish may be recommended to this user right now."""
    return (
        eligible_except_radius(dish, restaurant, profile, now)
        and haversine_m(user_location, restaurant.location) <= radius_m
    )


def explore_feed(
    catalog: Catalog,
    profile: UserProfile | None,
    user_location: GeoPoint,
    now: float,
    radius_m: float = DEFAULT_RADIUS_M,
) -> list[RankedDish]:
    """Browsable feed: every active dish of an enabled, in-radius restaurant.

    Ordered by restaurant distance ascending, ties broken by newest dish
    first, then dish id. Entries the profile cannot eat are included but
    flagged ineligible; a missing profile browses as an unrestricted guest.
    Closed restaurants stay in the feed (flagged) so users can plan ahead.
    """
    if profile is None:
        profile = GUEST_DEFAULT_PROFILE
    entries: list[tuple[tuple, RankedDish]] = []
    for dish in catalog.dishes.values():
        if not dish.active:
            continue
        restaurant = catalog.restaurant_for(dish)
        if not restaurant.enabled:
            continue
        distance = haversine_m(user_location, restaurant.location)
        if distance > radius_m:
            continue
        ranked = RankedDish(
            dish_id=dish.id,
            restaurant_id=restaurant.id,
            distance_m=distance,
            price_minor=dish.price_minor,
            seasonal_effect=dish.seasonal_effect,
            eligible=eligible_except_radius(dish, restaurant, profile, now),
        )
        entries.append(((distance, -dish.created_at, dish.id), ranked))
    entries.sort(key=lambda pair: pair[0])
    return [ranked for _, ranked in entries]


def exploit_top3(
    catalog: Catalog,
    profile: UserProfile,
    user_location: GeoPoint,
    now: float,
    radius_m: float = DEFAULT_RADIUS_M,
) -> list[RankedDish]:
    """The quick pick: up to three eligible dishes, closest first.

    Ties by price ascending, then dish id. Returns fewer than three only
    when fewer are eligible.
    """
    candidates: list[tuple[tuple, RankedDish]] = []
    for dish in catalog.dishes.values():
        restaurant = catalog.restaurant_for(dish)
        distance = haversine_m(user_location, restaurant.location)
        if distance > radius_m:
            continue
        if not eligible_except_radius(dish, restaurant, profile, now):
            continue
        ranked = RankedDish(
            dish_id=dish.id,
            restaurant_id=restaurant.id,
            distance_m=distance,
            price_minor=dish.price_minor,
            seasonal_effect=dish.seasonal_effect,
            eligible=True,
        )
        candidates.append(((distance, dish.price_minor, dish.id), ranked))
    candidates.sort(key=lambda pair: pair[0])
    return [ranked for _, ranked in candidates[:3]]
