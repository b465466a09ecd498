"""Shared builders and independent oracles.

The oracles restate behavior from scratch (distance, week tables, feed
filtering) so tests never verify the implementation against itself.
"""

from __future__ import annotations

import math
from datetime import datetime, timezone
from random import Random

from tabletalk.model import (
    Catalog,
    Diet,
    DietClass,
    Dish,
    GeoPoint,
    Geofence,
    OpeningHours,
    Restaurant,
    UserProfile,
)

# every day 00:00-23:59; minute 1439 stays closed (close < 1440 by contract)
ALL_WEEK = OpeningHours(days=(((0, 1439),),) * 7)
CLOSED = OpeningHours()

# a timestamp safely inside ALL_WEEK for offset 0: 2021-10-02 12:00:00 UTC (Saturday)
NOON_SATURDAY = 1633176000.0


def fence(fid="f1", owner_type="restaurant", owner_id="r1", lat=52.0, lon=7.0, radius_m=250.0, enabled=True):
    return Geofence(
        id=fid, owner_type=owner_type, owner_id=owner_id,
        center=GeoPoint(lat=lat, lon=lon), radius_m=radius_m, enabled=enabled,
    )


def restaurant(rid="r1", lat=52.0, lon=7.0, fence_id="f1", hours=ALL_WEEK, chain_id=None,
               enabled=True, utc_offset_min=0, name=None):
    return Restaurant(
        id=rid, name=name or f"Restaurant {rid}", location=GeoPoint(lat=lat, lon=lon),
        hours=hours, default_fence_id=fence_id, chain_id=chain_id,
        enabled=enabled, utc_offset_min=utc_offset_min,
    )


def dish(did="d1", rid="r1", price_minor=900, diet_class=DietClass.VEGAN, allergens=(),
         active=True, created_at=0.0, dedicated_fence_id=None, name=None, **extra):
    return Dish(
        id=did, restaurant_id=rid, name=name or f"Dish {did}",
        ingredients=("salt", "love"), price_minor=price_minor,
        diet_class=diet_class, allergens=frozenset(allergens), active=active,
        created_at=created_at, dedicated_fence_id=dedicated_fence_id, **extra,
    )


def profile(uid="u1", diet=Diet.OMNIVORE, exclusions=(), budget=None,
            blacklist_restaurants=(), blacklist_chains=(), muted_until=None, registered=False):
    return UserProfile(
        id=uid, registered=registered, allergen_exclusions=frozenset(exclusions), diet=diet,
        budget_limit_minor=budget, blacklist_restaurants=frozenset(blacklist_restaurants),
        blacklist_chains=frozenset(blacklist_chains), muted_until=muted_until,
    )


def catalog(restaurants=(), dishes=(), fences=()):
    return Catalog(
        restaurants={r.id: r for r in restaurants},
        dishes={d.id: d for d in dishes},
        fences={f.id: f for f in fences},
    )


def one_restaurant_catalog(**dish_kwargs):
    """Catalog with a single always-open restaurant and one dish."""
    f = fence()
    r = restaurant()
    d = dish(**dish_kwargs)
    return catalog([r], [d], [f])


# ---------------------------------------------------------------------------
# independent distance oracle (haversine, written fresh)

def oracle_distance_m(lat1, lon1, lat2, lon2):
    r = 6371000.0
    p1, p2 = math.radians(lat1), math.radians(lat2)
    sdlat = math.sin(math.radians(lat2 - lat1) / 2)
    sdlon = math.sin(math.radians(lon2 - lon1) / 2)
    a = sdlat * sdlat + math.cos(p1) * math.cos(p2) * sdlon * sdlon
    return 2 * r * math.atan2(math.sqrt(a), math.sqrt(1 - a))


# Berlin -> Hamburg great-circle distance, computed before the build with
# the spherical law of cosines (R = 6371 km) and cross-checked with an
# atan2 formulation.
BERLIN = (52.5200, 13.4050)
HAMBURG = (53.5511, 9.9937)
BERLIN_HAMBURG_M = 255250.17


# ---------------------------------------------------------------------------
# opening-hours week-table oracle

def oracle_week_table(hours: OpeningHours) -> list[bool]:
    """Expand intervals into one boolean per minute of the week."""
    table = [False] * 10080
    for day in range(7):
        for open_m, close_m in hours.days[day]:
            if open_m < close_m:
                for m in range(open_m, close_m):
                    table[day * 1440 + m] = True
            else:
                for m in range(open_m, 1440):
                    table[day * 1440 + m] = True
                nxt = (day + 1) % 7
                for m in range(0, close_m):
                    table[nxt * 1440 + m] = True
    return table


def random_hours(rng: Random, max_per_day=2) -> OpeningHours:
    """Random valid weekly hours, overnight spans included."""
    for _ in range(1000):
        days = []
        for _ in range(7):
            intervals = []
            for _ in range(rng.randrange(max_per_day + 1)):
                a, b = rng.randrange(1440), rng.randrange(1440)
                if a != b:
                    intervals.append((a, b))
            days.append(tuple(intervals))
        try:
            return OpeningHours(days=tuple(days))
        except ValueError:
            continue
    raise RuntimeError("could not generate valid hours")


# ---------------------------------------------------------------------------
# recommender brute-force oracle: restates every gate and ranking rule

def _oracle_local_weekday_minute(now, utc_offset_min):
    dt = datetime.fromtimestamp(now + utc_offset_min * 60, tz=timezone.utc)
    return dt.weekday(), dt.hour * 60 + dt.minute


_table_cache: dict[tuple, list[bool]] = {}


def _oracle_open(hours: OpeningHours, weekday, minute):
    table = _table_cache.get(hours.days)
    if table is None:
        table = _table_cache[hours.days] = oracle_week_table(hours)
    return table[weekday * 1440 + minute]


def oracle_eligible(d: Dish, r: Restaurant, p: UserProfile, loc: GeoPoint, now, radius_m):
    if not d.active or not r.enabled:
        return False
    weekday, minute = _oracle_local_weekday_minute(now, r.utc_offset_min)
    if not _oracle_open(r.hours, weekday, minute):
        return False
    if set(d.allergens) & set(p.allergen_exclusions):
        return False
    accepted = {
        Diet.OMNIVORE: {DietClass.VEGAN, DietClass.VEGETARIAN, DietClass.MEAT},
        Diet.VEGETARIAN: {DietClass.VEGAN, DietClass.VEGETARIAN},
        Diet.VEGAN: {DietClass.VEGAN},
    }[p.diet]
    if d.diet_class not in accepted:
        return False
    if p.budget_limit_minor is not None and d.price_minor > p.budget_limit_minor:
        return False
    if r.id in p.blacklist_restaurants:
        return False
    if r.chain_id is not None and r.chain_id in p.blacklist_chains:
        return False
    return oracle_distance_m(loc.lat, loc.lon, r.location.lat, r.location.lon) <= radius_m


def oracle_top3(cat: Catalog, p: UserProfile, loc: GeoPoint, now, radius_m):
    rows = []
    for d in cat.dishes.values():
        r = cat.restaurants[d.restaurant_id]
        if oracle_eligible(d, r, p, loc, now, radius_m):
            dist = oracle_distance_m(loc.lat, loc.lon, r.location.lat, r.location.lon)
            rows.append((dist, d.price_minor, d.id))
    rows.sort()
    return [did for _, _, did in rows[:3]]


def oracle_feed(cat: Catalog, p: UserProfile | None, loc: GeoPoint, now, radius_m):
    rows = []
    for d in cat.dishes.values():
        r = cat.restaurants[d.restaurant_id]
        if not d.active or not r.enabled:
            continue
        dist = oracle_distance_m(loc.lat, loc.lon, r.location.lat, r.location.lon)
        if dist > radius_m:
            continue
        flag = oracle_eligible(d, r, p, loc, now,
                               radius_m=float("inf")) if p is not None else (
            oracle_eligible(d, r, UserProfile(id=""), loc, now, radius_m=float("inf")))
        rows.append(((dist, -d.created_at, d.id), d.id, flag))
    rows.sort(key=lambda row: row[0])
    return [(did, flag) for _, did, flag in rows]


def random_instance(rng: Random):
    """One randomized recommender instance: catalog, profile, location, time."""
    n_restaurants = rng.randint(1, 10)
    base_lat, base_lon = 52.0, 7.0
    allergen_pool = ["gluten", "milk", "nuts", "soy", "egg", "mustard", "sesame"]
    restaurants, fences, dishes = [], [], []
    for i in range(n_restaurants):
        rid, fid = f"r{i:02d}", f"f{i:02d}"
        lat = base_lat + rng.uniform(-0.03, 0.03)
        lon = base_lon + rng.uniform(-0.03, 0.03)
        hours = ALL_WEEK if rng.random() < 0.7 else random_hours(rng)
        fences.append(fence(fid, "restaurant", rid, lat, lon, rng.uniform(100, 600)))
        restaurants.append(
            restaurant(
                rid, lat, lon, fid, hours=hours,
                chain_id=rng.choice([None, "chain-a", "chain-b"]),
                enabled=rng.random() < 0.9,
                utc_offset_min=rng.choice([0, 60, 120, -300]),
            )
        )
    n_dishes = rng.randint(0, 50)
    for j in range(n_dishes):
        rid = f"r{rng.randrange(n_restaurants):02d}"
        dishes.append(
            dish(
                f"d{j:02d}", rid,
                price_minor=rng.randrange(100, 3000),
                diet_class=rng.choice(list(DietClass)),
                allergens=rng.sample(allergen_pool, rng.randrange(0, 3)),
                active=rng.random() < 0.9,
                created_at=rng.randrange(0, 10_000_000),
            )
        )
    p = profile(
        "user",
        diet=rng.choice(list(Diet)),
        exclusions=rng.sample(allergen_pool, rng.randrange(0, 2)),
        budget=rng.choice([None, rng.randrange(300, 2500)]),
        blacklist_restaurants=[f"r{rng.randrange(n_restaurants):02d}"] if rng.random() < 0.2 else [],
        blacklist_chains=["chain-a"] if rng.random() < 0.15 else [],
    )
    loc = GeoPoint(lat=base_lat + rng.uniform(-0.02, 0.02), lon=base_lon + rng.uniform(-0.02, 0.02))
    now = NOON_SATURDAY + rng.randrange(-3 * 86400, 3 * 86400)
    radius_m = rng.uniform(500, 5000)
    return catalog(restaurants, dishes, fences), p, loc, now, radius_m
