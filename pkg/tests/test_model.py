import math
from dataclasses import replace
from random import Random

import pytest
from hypothesis import given, strategies as st

from tabletalk.errors import CorruptCatalog
from tabletalk.model import (
    Diet,
    DietClass,
    GeoPoint,
    OpeningHours,
    Phase,
    diet_accepts,
    is_open,
    rfc3339_to_ts,
    ts_to_rfc3339,
    validate_dish,
)

from helpers import catalog, dish, fence, oracle_week_table, random_hours, restaurant


class TestGeoPoint:
    def test_valid(self):
        p = GeoPoint(lat=52.52, lon=13.405)
        assert p.lat == 52.52

    @pytest.mark.parametrize("lat,lon", [(91, 0), (-91, 0), (0, 181), (0, -181), (math.nan, 0), (0, math.inf)])
    def test_out_of_range(self, lat, lon):
        with pytest.raises(ValueError):
            GeoPoint(lat=lat, lon=lon)

    def test_wire_round_trip(self):
        p = GeoPoint(lat=-10.25, lon=170.5)
        assert GeoPoint.from_wire(p.to_wire()) == p


class TestOpeningHours:
    def test_open_equals_close_rejected(self):
        with pytest.raises(ValueError):
            OpeningHours(days=(((600, 600),), (), (), (), (), (), ()))

    def test_minute_range_rejected(self):
        with pytest.raises(ValueError):
            OpeningHours(days=(((0, 1440),), (), (), (), (), (), ()))

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            OpeningHours(days=(((540, 1020), (1000, 1100)), (), (), (), (), (), ()))

    def test_overnight_spill_overlap_rejected(self):
        # Mon 18:00-01:00 spills into Tue, colliding with Tue 00:30-02:00
        with pytest.raises(ValueError):
            OpeningHours(days=(((1080, 60),), ((30, 120),), (), (), (), (), ()))

    def test_overnight_valid(self):
        hours = OpeningHours(days=(((1080, 60),), ((120, 300),), (), (), (), (), ()))
        assert len(hours.week_segments()) == 3

    def test_wire_round_trip(self):
        hours = OpeningHours(days=(((540, 1020),), (), ((1080, 60),), (), (), (), ()))
        assert OpeningHours.from_wire(hours.to_wire()) == hours


class TestIsOpen:
    MON = OpeningHours(days=(((540, 1020),), (), (), (), (), (), ()))

    def test_interior_point(self):
        assert is_open(self.MON, 0, 600)

    def test_half_open_close(self):
        assert not is_open(self.MON, 0, 1020)

    def test_open_boundary(self):
        assert is_open(self.MON, 0, 540)
        assert not is_open(self.MON, 0, 539)

    def test_other_day_closed(self):
        assert not is_open(self.MON, 1, 600)

    def test_overnight_friday_into_saturday(self):
        # Fri 18:00-01:00: Sat 00:30 is open, verified against the
        # brute-force week table as well
        hours = OpeningHours(days=((), (), (), (), ((1080, 60),), (), ()))
        assert is_open(hours, 5, 30)
        assert is_open(hours, 4, 1080)
        assert not is_open(hours, 4, 1079)
        assert is_open(hours, 5, 59)
        assert not is_open(hours, 5, 60)
        table = oracle_week_table(hours)
        for minute in range(10080):
            assert is_open(hours, minute // 1440, minute % 1440) == table[minute]

    def test_minute_out_of_range(self):
        with pytest.raises(ValueError):
            is_open(self.MON, 0, 1440)

    def test_randomized_against_week_table(self):
        rng = Random(20211002)
        for _ in range(25):
            hours = random_hours(rng)
            table = oracle_week_table(hours)
            for minute in range(10080):
                assert is_open(hours, minute // 1440, minute % 1440) == table[minute]


class TestDietAccepts:
    @pytest.mark.parametrize(
        "diet,dish_class,expected",
        [
            (Diet.OMNIVORE, DietClass.VEGAN, True),
            (Diet.OMNIVORE, DietClass.VEGETARIAN, True),
            (Diet.OMNIVORE, DietClass.MEAT, True),
            (Diet.VEGETARIAN, DietClass.VEGAN, True),
            (Diet.VEGETARIAN, DietClass.VEGETARIAN, True),
            (Diet.VEGETARIAN, DietClass.MEAT, False),
            (Diet.VEGAN, DietClass.VEGAN, True),
            (Diet.VEGAN, DietClass.VEGETARIAN, False),
            (Diet.VEGAN, DietClass.MEAT, False),
        ],
    )
    def test_lattice(self, diet, dish_class, expected):
        assert diet_accepts(diet, dish_class) is expected

    @given(st.sampled_from(list(DietClass)))
    def test_monotone_along_strictness(self, dish_class):
        # anything a stricter diet accepts, every looser diet accepts too
        if diet_accepts(Diet.VEGAN, dish_class):
            assert diet_accepts(Diet.VEGETARIAN, dish_class)
        if diet_accepts(Diet.VEGETARIAN, dish_class):
            assert diet_accepts(Diet.OMNIVORE, dish_class)


class TestValidateDish:
    def test_negative_price(self):
        d = dish(price_minor=-1)
        assert "negative price" in validate_dish(d, {"r1"})

    def test_dangling_restaurant(self):
        d = dish(rid="ghost")
        assert "dangling restaurant" in validate_dish(d, {"r1"})

    def test_empty_ingredients_on_active_dish(self):
        d = replace(dish(), ingredients=())
        assert "empty ingredients" in validate_dish(d, {"r1"})
        assert validate_dish(replace(d, active=False), {"r1"}) == []

    def test_valid_dish_ok(self):
        assert validate_dish(dish(), {"r1"}) == []

    def test_ok_implies_each_invariant(self):
        d = dish()
        if validate_dish(d, {"r1"}) == []:
            assert d.price_minor >= 0
            assert d.restaurant_id in {"r1"}
            assert not d.active or d.ingredients


class TestCatalog:
    def test_check_passes_on_consistent_catalog(self):
        catalog([restaurant()], [dish()], [fence()]).check()

    def test_dangling_dish_restaurant(self):
        with pytest.raises(CorruptCatalog):
            catalog([restaurant()], [dish(rid="ghost")], [fence()]).check()

    def test_dangling_default_fence(self):
        with pytest.raises(CorruptCatalog):
            catalog([restaurant(fence_id="ghost")], [], [fence()]).check()


class TestPhase:
    def test_order(self):
        assert Phase.PREARRIVAL < Phase.POSTARRIVAL_PREPROCESS < Phase.WHILE_DINING < Phase.AFTER_DINING

    def test_wire_round_trip(self):
        for phase in Phase:
            assert Phase.from_wire(phase.wire) is phase

    def test_unknown_phase(self):
        with pytest.raises(ValueError):
            Phase.from_wire("brunch")


class TestTimestamps:
    def test_round_trip(self):
        assert rfc3339_to_ts(ts_to_rfc3339(1633176000.0)) == 1633176000.0

    def test_formats_z(self):
        assert ts_to_rfc3339(0) == "1970-01-01T00:00:00Z"
