"""HTTP/JSON gateway: the single mutation point of the platform.

All writes funnel through one lock and the store's event log; reads work
on the in-memory state. Route handlers stay thin and delegate to the
Gateway class, which is also what the in-process tests drive.
"""

from __future__ import annotations

import json
import os
import socket
import threading
import time
import uuid
from random import Random
from typing import Any, Mapping, Optional

import click
import uvicorn
from fastapi import Body, Depends, FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import analytics, chat, geofence, recommend
from .config import ServiceConfig, packaged_calendar_text, packaged_intents_text
from .errors import (
    BadRequest,
    Conflict,
    CorruptCatalog,
    NotFound,
    PlatformError,
    ValidationFailure,
)
from .geo import haversine_m
from .model import (
    Dish,
    GeoPoint,
    Geofence,
    OpeningHours,
    Phase,
    Restaurant,
    UserProfile,
    rfc3339_to_ts,
    validate_dish,
)
from .store import Store

CHATLOG_FILE = "chatlog.ndjson"
COMPACT_AFTER_EVENTS = 1000  # fold the event log into the snapshot at startup


def _new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:10]}"


def _parse_at(value, default: float | None = None) -> float:
    if value is None:
        return time.time() if default is None else default
    try:
        if isinstance(value, str):
            return rfc3339_to_ts(value)
        return float(value)
    except (ValueError, TypeError) as exc:
        raise BadRequest(f"bad timestamp {value!r}: {exc}") from None


class Gateway:
    """Domain operations behind the HTTP surface."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.store = Store.open(config.data_dir)
        if self.store.events_replayed >= COMPACT_AFTER_EVENTS:
            self.store.compact()
        if config.data_dir is not None:
            log_path = os.path.join(config.data_dir, CHATLOG_FILE)
            self.log = (
                analytics.InquiryLog.load(log_path)
                if os.path.exists(log_path)
                else analytics.InquiryLog(log_path)
            )
        else:
            self.log = analytics.InquiryLog(None)
        if config.intents_path:
            with open(config.intents_path, encoding="utf-8") as fh:
                intents = chat.load_intents(json.load(fh))
        else:
            intents = chat.load_intents(json.loads(packaged_intents_text()))
        if config.calendar_path:
            calendar = chat.FoodDayCalendar.load_file(config.calendar_path)
        else:
            calendar = chat.FoodDayCalendar.from_wire(json.loads(packaged_calendar_text()))
        self.engine = chat.ChatEngine(
            intents=intents, calendar=calendar, tau=config.tau, context_k=config.context_k
        )
        self.fence_states: dict[str, geofence.FenceState] = {}
        self.session_rngs: dict[str, Random] = {}
        self.lock = threading.RLock()

    def close(self) -> None:
        self.store.close()
        self.log.close()

    # -- authoring: restaurants -------------------------------------------

    def create_restaurant(self, payload: Mapping) -> dict:
        rid = str(payload.get("id") or _new_id("r"))
        if rid in self.store.restaurants:
            raise Conflict(f"restaurant {rid} already exists")
        fence_payload = payload.get("default_fence")
        if not isinstance(fence_payload, Mapping):
            raise ValidationFailure(["missing default_fence"])
        try:
            location = GeoPoint.from_wire(payload["location"])
            fence = Geofence(
                id=str(fence_payload.get("id") or _new_id("f")),
                owner_type="restaurant",
                owner_id=rid,
                center=(
                    GeoPoint.from_wire(fence_payload["center"])
                    if "center" in fence_payload
                    else location
                ),
                radius_m=float(fence_payload["radius_m"]),
                enabled=bool(fence_payload.get("enabled", True)),
            )
            restaurant = Restaurant(
                id=rid,
                name=str(payload["name"]),
                chain_id=None if payload.get("chain_id") is None else str(payload["chain_id"]),
                location=location,
                hours=OpeningHours.from_wire(payload.get("hours", {})),
                default_fence_id=fence.id,
                enabled=bool(payload.get("enabled", True)),
                utc_offset_min=int(payload.get("utc_offset_min", 0)),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationFailure([str(exc)]) from None
        if fence.id in self.store.fences:
            raise Conflict(f"geofence {fence.id} already exists")
        with self.lock:
            self.store.commit("put_fence", fence.to_wire())
            self.store.commit("put_restaurant", restaurant.to_wire())
        return self._restaurant_wire(restaurant)

    def _restaurant_wire(self, restaurant: Restaurant) -> dict:
        wire = restaurant.to_wire()
        fence = self.store.fences.get(restaurant.default_fence_id)
        wire["default_fence"] = fence.to_wire() if fence else None
        return wire

    def get_restaurant(self, rid: str) -> Restaurant:
        restaurant = self.store.restaurants.get(rid)
        if restaurant is None:
            raise NotFound(f"unknown restaurant {rid}")
        return restaurant

    def update_restaurant(self, rid: str, payload: Mapping) -> dict:
        current = self.get_restaurant(rid)
        merged = {**current.to_wire(), **payload, "id": rid, "default_fence_id": current.default_fence_id}
        fence_payload = merged.pop("default_fence", None)
        try:
            restaurant = Restaurant.from_wire(merged)
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationFailure([str(exc)]) from None
        with self.lock:
            if isinstance(fence_payload, Mapping):
                fence = self.store.fences[current.default_fence_id]
                fence_merged = {
                    **fence.to_wire(),
                    **fence_payload,
                    "id": fence.id,
                    "owner_type": "restaurant",
                    "owner_id": rid,
                }
                try:
                    new_fence = Geofence.from_wire(fence_merged)
                except (KeyError, ValueError, TypeError) as exc:
                    raise ValidationFailure([str(exc)]) from None
                self.store.commit("put_fence", new_fence.to_wire())
            self.store.commit("put_restaurant", restaurant.to_wire())
        return self._restaurant_wire(restaurant)

    def delete_restaurant(self, rid: str, cascade: bool) -> None:
        self.get_restaurant(rid)
        dependents = [d.id for d in self.store.dishes.values() if d.restaurant_id == rid]
        if dependents and not cascade:
            raise Conflict(f"restaurant {rid} has {len(dependents)} dishes; pass cascade=true")
        with self.lock:
            self.store.commit("delete_restaurant", {"id": rid, "cascade": cascade})

    # -- authoring: dishes --------------------------------------------------

    def create_dish(self, rid: str, payload: Mapping, now: float | None = None) -> dict:
        self.get_restaurant(rid)
        did = str(payload.get("id") or _new_id("d"))
        if did in self.store.dishes:
            raise Conflict(f"dish {did} already exists")
        fence_payload = payload.get("dedicated_fence")
        fence = None
        try:
            if isinstance(fence_payload, Mapping):
                fence = Geofence(
                    id=str(fence_payload.get("id") or _new_id("f")),
                    owner_type="dish",
                    owner_id=did,
                    center=GeoPoint.from_wire(fence_payload["center"]),
                    radius_m=float(fence_payload["radius_m"]),
                    enabled=bool(fence_payload.get("enabled", True)),
                )
            dish = Dish.from_wire(
                {
                    **payload,
                    "id": did,
                    "restaurant_id": rid,
                    "dedicated_fence_id": fence.id if fence else None,
                    "created_at": _parse_at(payload.get("created_at"), default=now),
                }
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationFailure([str(exc)]) from None
        violations = validate_dish(dish, self.store.restaurants)
        if violations:
            raise ValidationFailure(violations)
        if fence is not None and fence.id in self.store.fences:
            raise Conflict(f"geofence {fence.id} already exists")
        with self.lock:
            if fence is not None:
                self.store.commit("put_fence", fence.to_wire())
            self.store.commit("put_dish", dish.to_wire())
        return self._dish_wire(dish)

    def _dish_wire(self, dish: Dish) -> dict:
        wire = dish.to_wire()
        if dish.dedicated_fence_id:
            fence = self.store.fences.get(dish.dedicated_fence_id)
            wire["dedicated_fence"] = fence.to_wire() if fence else None
        else:
            wire["dedicated_fence"] = None
        return wire

    def get_dish(self, did: str) -> Dish:
        dish = self.store.dishes.get(did)
        if dish is None:
            raise NotFound(f"unknown dish {did}")
        return dish

    def update_dish(self, did: str, payload: Mapping) -> dict:
        current = self.get_dish(did)
        merged = {**current.to_wire(), **payload, "id": did}
        fence_payload = merged.pop("dedicated_fence", "__absent__")
        drop_fence = fence_payload is None and current.dedicated_fence_id is not None
        new_fence = None
        if isinstance(fence_payload, Mapping):
            base = (
                self.store.fences[current.dedicated_fence_id].to_wire()
                if current.dedicated_fence_id
                else {}
            )
            try:
                new_fence = Geofence.from_wire(
                    {
                        **base,
                        **fence_payload,
                        "id": base.get("id") or fence_payload.get("id") or _new_id("f"),
                        "owner_type": "dish",
                        "owner_id": did,
                    }
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ValidationFailure([str(exc)]) from None
            merged["dedicated_fence_id"] = new_fence.id
        if drop_fence:
            merged["dedicated_fence_id"] = None
        try:
            dish = Dish.from_wire(merged)
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationFailure([str(exc)]) from None
        if dish.restaurant_id not in self.store.restaurants:
            raise Conflict(f"dish references unknown restaurant {dish.restaurant_id}")
        violations = validate_dish(dish, self.store.restaurants)
        if violations:
            raise ValidationFailure(violations)
        with self.lock:
            if drop_fence and current.dedicated_fence_id:
                self.store.commit("delete_fence", {"id": current.dedicated_fence_id})
            if new_fence is not None:
                self.store.commit("put_fence", new_fence.to_wire())
            self.store.commit("put_dish", dish.to_wire())
        return self._dish_wire(dish)

    def delete_dish(self, did: str) -> None:
        self.get_dish(did)
        with self.lock:
            self.store.commit("delete_dish", {"id": did})

    def put_avatar(self, did: str, blob: Any) -> None:
        self.get_dish(did)
        with self.lock:
            self.store.commit("put_avatar", {"dish_id": did, "blob": blob})

    def get_avatar(self, did: str) -> Any:
        self.get_dish(did)
        if did not in self.store.avatars:
            raise NotFound(f"no avatar for dish {did}")
        return self.store.avatars[did]

    # -- authoring: geofences -----------------------------------------------

    def create_fence(self, payload: Mapping) -> dict:
        try:
            fence = Geofence.from_wire({**payload, "id": str(payload.get("id") or _new_id("f"))})
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationFailure([str(exc)]) from None
        if fence.id in self.store.fences:
            raise Conflict(f"geofence {fence.id} already exists")
        with self.lock:
            if fence.owner_type == "dish":
                dish = self.store.dishes.get(fence.owner_id)
                if dish is None:
                    raise Conflict(f"fence references unknown dish {fence.owner_id}")
                replaced = dish.dedicated_fence_id
                self.store.commit("put_fence", fence.to_wire())
                self.store.commit(
                    "put_dish", {**dish.to_wire(), "dedicated_fence_id": fence.id}
                )
                if replaced:
                    self.store.commit("delete_fence", {"id": replaced})
            else:
                restaurant = self.store.restaurants.get(fence.owner_id)
                if restaurant is None:
                    raise Conflict(f"fence references unknown restaurant {fence.owner_id}")
                old_fence_id = restaurant.default_fence_id
                self.store.commit("put_fence", fence.to_wire())
                self.store.commit(
                    "put_restaurant", {**restaurant.to_wire(), "default_fence_id": fence.id}
                )
                self.store.commit("delete_fence", {"id": old_fence_id})
        return fence.to_wire()

    def get_fence(self, fid: str) -> Geofence:
        fence = self.store.fences.get(fid)
        if fence is None:
            raise NotFound(f"unknown geofence {fid}")
        return fence

    def update_fence(self, fid: str, payload: Mapping) -> dict:
        current = self.get_fence(fid)
        merged = {
            **current.to_wire(),
            **payload,
            "id": fid,
            "owner_type": current.owner_type,
            "owner_id": current.owner_id,
        }
        try:
            fence = Geofence.from_wire(merged)
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationFailure([str(exc)]) from None
        with self.lock:
            self.store.commit("put_fence", fence.to_wire())
        return fence.to_wire()

    def delete_fence(self, fid: str) -> None:
        fence = self.get_fence(fid)
        if fence.owner_type == "restaurant":
            owner = self.store.restaurants.get(fence.owner_id)
            if owner is not None and owner.default_fence_id == fid:
                raise Conflict("cannot delete a restaurant's default fence")
        with self.lock:
            self.store.commit("delete_fence", {"id": fid})

    # -- guests ---------------------------------------------------------------

    def create_profile(self, payload: Mapping) -> dict:
        uid = str(payload.get("id") or _new_id("u"))
        if uid in self.store.profiles:
            raise Conflict(f"profile {uid} already exists")
        try:
            profile = UserProfile.from_wire({**payload, "id": uid})
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationFailure([str(exc)]) from None
        with self.lock:
            self.store.commit("put_profile", profile.to_wire())
        return profile.to_wire()

    def get_profile(self, uid: str) -> UserProfile:
        profile = self.store.profiles.get(uid)
        if profile is None:
            raise NotFound("unknown profile")
        return profile

    def update_profile(self, uid: str, payload: Mapping) -> dict:
        current = self.get_profile(uid)
        try:
            profile = UserProfile.from_wire({**current.to_wire(), **payload, "id": uid})
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationFailure([str(exc)]) from None
        with self.lock:
            self.store.commit("put_profile", profile.to_wire())
        return profile.to_wire()

    def post_location(self, payload: Mapping) -> list[dict]:
        try:
            user_id = str(payload["user_id"])
            update = geofence.LocationUpdate(
                user_id=user_id,
                point=GeoPoint(lat=float(payload["lat"]), lon=float(payload["lon"])),
                at=_parse_at(payload.get("at")),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise BadRequest(f"bad location update: {exc}") from None
        profile = self.get_profile(user_id)
        with self.lock:
            state = self.fence_states.get(user_id, geofence.FenceState.empty())
            fired, state = geofence.process_location_update(
                update, self.store.catalog(), profile, state, cooldown_s=self.config.cooldown_s
            )
            self.fence_states[user_id] = state
            self.log.record_location(user_id, update.at)
            for notification in fired:
                self.log.record_notification(notification)
        out = []
        for notification in fired:
            dish = self.store.dishes[notification.dish_id]
            restaurant = self.store.restaurants[dish.restaurant_id]
            out.append(
                {
                    **notification.to_wire(),
                    "dish_name": dish.name,
                    "distance_m": round(haversine_m(update.point, restaurant.location), 1),
                }
            )
        return out

    def _feed_profile(self, profile_id: Optional[str]) -> UserProfile | None:
        return self.get_profile(profile_id) if profile_id else None

    def explore(self, lat: float, lon: float, profile_id: Optional[str], radius_m: Optional[float], at) -> list[dict]:
        feed = recommend.explore_feed(
            self.store.catalog(),
            self._feed_profile(profile_id),
            GeoPoint(lat=lat, lon=lon),
            _parse_at(at),
            radius_m if radius_m is not None else self.config.radius_m,
        )
        return [self._ranked_wire(entry) for entry in feed]

    def exploit(self, lat: float, lon: float, profile_id: str, radius_m: Optional[float], at) -> list[dict]:
        profile = self.get_profile(profile_id)
        top = recommend.exploit_top3(
            self.store.catalog(),
            profile,
            GeoPoint(lat=lat, lon=lon),
            _parse_at(at),
            radius_m if radius_m is not None else self.config.radius_m,
        )
        return [self._ranked_wire(entry) for entry in top]

    def _ranked_wire(self, entry: recommend.RankedDish) -> dict:
        wire = entry.to_wire()
        dish = self.store.dishes.get(entry.dish_id)
        restaurant = self.store.restaurants.get(entry.restaurant_id)
        wire["dish"] = dish.to_wire() if dish else None
        wire["restaurant_name"] = restaurant.name if restaurant else None
        return wire

    # -- chat -------------------------------------------------------------------

    def create_session(self, payload: Mapping) -> dict:
        user_id = str(payload.get("user_id", ""))
        dish_id = str(payload.get("dish_id", ""))
        self.get_profile(user_id)
        self.get_dish(dish_id)
        session = chat.ChatSession(
            id=_new_id("s"),
            user_id=user_id,
            dish_id=dish_id,
            started_at=_parse_at(payload.get("at")),
        )
        with self.lock:
            self.store.commit("put_session", session.to_wire())
            seed = payload.get("seed")
            self.session_rngs[session.id] = Random(seed) if seed is not None else Random()
        return session.to_wire()

    def get_session(self, sid: str) -> chat.ChatSession:
        session = self.store.sessions.get(sid)
        if session is None:
            raise NotFound("unknown session")
        return session

    def post_message(self, sid: str, payload: Mapping) -> dict:
        session = self.get_session(sid)
        text = str(payload.get("text", ""))
        now = _parse_at(payload.get("at"))
        dish = self.store.dishes.get(session.dish_id)
        if dish is None:
            raise Conflict(f"dish {session.dish_id} no longer exists")
        restaurant = self.store.restaurants.get(dish.restaurant_id)
        if restaurant is None:
            raise CorruptCatalog(f"dish {dish.id} references missing restaurant")
        with self.lock:
            rng = self.session_rngs.setdefault(sid, Random())
            positions: list[int] = []
            result = self.engine.handle_turn(
                session,
                dish,
                restaurant,
                text,
                now,
                rng,
                record=lambda turn: positions.append(self.log.record_turn(turn)),
            )
            self.store.commit("put_session", result.session.to_wire())
        return {
            "position": positions[0],
            "turn": result.turn.to_wire(),
            "suggestions": result.suggestions,
        }

    def post_phase(self, sid: str, payload: Mapping) -> dict:
        session = self.get_session(sid)
        try:
            phase = Phase.from_wire(str(payload.get("phase", "")))
        except ValueError as exc:
            raise BadRequest(str(exc)) from None
        updated = chat.set_phase(session, phase)
        with self.lock:
            self.store.commit("put_session", updated.to_wire())
        return updated.to_wire()

    # -- analytics ----------------------------------------------------------------

    def _window(self, from_: Optional[str], to: Optional[str]) -> tuple[float, float]:
        extent = self.log.extent() or (0.0, 0.0)
        window_from = _parse_at(from_) if from_ else extent[0]
        window_to = _parse_at(to) if to else extent[1]
        return window_from, window_to

    def kpis(self, from_: Optional[str], to: Optional[str]) -> dict:
        report = analytics.kpi_report(
            self.log,
            self.engine.intents,
            self.store.dishes,
            self.store.profiles,
            self._window(from_, to),
        )
        return report.to_wire()

    def matrix(self, from_: Optional[str], to: Optional[str]) -> dict:
        cells = analytics.intent_matrix(self.log, self._window(from_, to))
        return {
            "cells": [
                {"annotated": a, "matched": m, "count": n}
                for (a, m), n in sorted(cells.items())
            ]
        }

    def phases(self, from_: Optional[str], to: Optional[str]) -> dict:
        return analytics.phase_histogram(self.log, self._window(from_, to), self.engine.intents)

    def annotate(self, payload: Mapping) -> dict:
        try:
            position = int(payload["position"])
            outcome = chat.Outcome(payload["outcome"])
        except (KeyError, ValueError, TypeError) as exc:
            raise BadRequest(f"bad annotation: {exc}") from None
        annotated_intent = payload.get("annotated_intent")
        if annotated_intent is not None:
            annotated_intent = str(annotated_intent)
            if annotated_intent not in self.engine.intents.by_name:
                raise BadRequest(f"unknown annotated intent {annotated_intent!r}")
        with self.lock:
            turn = self.log.annotate_turn(position, outcome, annotated_intent)
        return {"position": position, "turn": turn.to_wire()}

    def import_corpus(self, text: str) -> dict:
        with self.lock:
            count = analytics.import_corpus(text, self.log, self.engine.intents)
        return {"imported": count}


# --------------------------------------------------------------------------
# FastAPI wiring

def create_app(config: ServiceConfig, gateway: Gateway | None = None) -> FastAPI:
    gw = gateway if gateway is not None else Gateway(config)
    app = FastAPI(title="tabletalk", version="0.1.0")
    app.state.gateway = gw
    # the restaurateur console is served from its own origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def require_token(request: Request) -> None:
        header = request.headers.get("authorization", "")
        token = header.removeprefix("Bearer ").strip()
        if not token or token not in gw.config.auth_tokens:
            raise _AuthError()

    class _AuthError(Exception):
        pass

    @app.exception_handler(_AuthError)
    def _auth_handler(request: Request, exc: _AuthError):
        return JSONResponse(status_code=401, content={"error": "missing or invalid bearer token"})

    @app.exception_handler(PlatformError)
    def _platform_handler(request: Request, exc: PlatformError):
        if isinstance(exc, ValidationFailure):
            return JSONResponse(status_code=422, content={"error": str(exc), "violations": exc.violations})
        if isinstance(exc, NotFound):
            status = 404
        elif isinstance(exc, (Conflict, CorruptCatalog)):
            status = 409
        elif isinstance(exc, BadRequest):
            status = 400
        else:
            status = 500
        return JSONResponse(status_code=status, content={"error": str(exc)})

    authored = [Depends(require_token)]

    # restaurants
    @app.get("/restaurants")
    def list_restaurants():
        return [gw._restaurant_wire(r) for _, r in sorted(gw.store.restaurants.items())]

    @app.post("/restaurants", status_code=201, dependencies=authored)
    def post_restaurant(payload: dict = Body(...)):
        return gw.create_restaurant(payload)

    @app.get("/restaurants/{rid}")
    def get_restaurant(rid: str):
        return gw._restaurant_wire(gw.get_restaurant(rid))

    @app.put("/restaurants/{rid}", dependencies=authored)
    @app.patch("/restaurants/{rid}", dependencies=authored)
    def patch_restaurant(rid: str, payload: dict = Body(...)):
        return gw.update_restaurant(rid, payload)

    @app.delete("/restaurants/{rid}", status_code=204, dependencies=authored)
    def delete_restaurant(rid: str, cascade: bool = Query(False)):
        gw.delete_restaurant(rid, cascade)

    @app.get("/restaurants/{rid}/dishes")
    def list_dishes(rid: str):
        gw.get_restaurant(rid)
        dishes = [d for d in gw.store.dishes.values() if d.restaurant_id == rid]
        return [gw._dish_wire(d) for d in sorted(dishes, key=lambda d: d.id)]

    @app.post("/restaurants/{rid}/dishes", status_code=201, dependencies=authored)
    def post_dish(rid: str, payload: dict = Body(...)):
        return gw.create_dish(rid, payload)

    # dishes
    @app.get("/dishes/{did}")
    def get_dish(did: str):
        return gw._dish_wire(gw.get_dish(did))

    @app.put("/dishes/{did}", dependencies=authored)
    @app.patch("/dishes/{did}", dependencies=authored)
    def patch_dish(did: str, payload: dict = Body(...)):
        return gw.update_dish(did, payload)

    @app.delete("/dishes/{did}", status_code=204, dependencies=authored)
    def delete_dish(did: str):
        gw.delete_dish(did)

    @app.put("/dishes/{did}/avatar", dependencies=authored)
    def put_avatar(did: str, payload: dict = Body(...)):
        gw.put_avatar(did, payload.get("blob"))
        return {"dish_id": did, "blob": payload.get("blob")}

    @app.get("/dishes/{did}/avatar")
    def get_avatar(did: str):
        return {"dish_id": did, "blob": gw.get_avatar(did)}

    # geofences
    @app.get("/geofences")
    def list_fences():
        return [f.to_wire() for _, f in sorted(gw.store.fences.items())]

    @app.post("/geofences", status_code=201, dependencies=authored)
    def post_fence(payload: dict = Body(...)):
        return gw.create_fence(payload)

    @app.get("/geofences/{fid}")
    def get_fence(fid: str):
        return gw.get_fence(fid).to_wire()

    @app.put("/geofences/{fid}", dependencies=authored)
    @app.patch("/geofences/{fid}", dependencies=authored)
    def patch_fence(fid: str, payload: dict = Body(...)):
        return gw.update_fence(fid, payload)

    @app.delete("/geofences/{fid}", status_code=204, dependencies=authored)
    def delete_fence(fid: str):
        gw.delete_fence(fid)

    # profiles
    @app.post("/profiles", status_code=201)
    def post_profile(payload: dict = Body(...)):
        return gw.create_profile(payload)

    @app.get("/profiles/{uid}")
    def get_profile(uid: str):
        return gw.get_profile(uid).to_wire()

    @app.put("/profiles/{uid}")
    @app.patch("/profiles/{uid}")
    def patch_profile(uid: str, payload: dict = Body(...)):
        return gw.update_profile(uid, payload)

    # guest flows
    @app.post("/location")
    def post_location(payload: dict = Body(...)):
        return {"notifications": gw.post_location(payload)}

    @app.get("/explore")
    def get_explore(
        lat: float,
        lon: float,
        profile_id: Optional[str] = None,
        radius_m: Optional[float] = None,
        at: Optional[str] = None,
    ):
        return {"entries": gw.explore(lat, lon, profile_id, radius_m, at)}

    @app.get("/exploit")
    def get_exploit(
        lat: float,
        lon: float,
        profile_id: str,
        radius_m: Optional[float] = None,
        at: Optional[str] = None,
    ):
        return {"entries": gw.exploit(lat, lon, profile_id, radius_m, at)}

    @app.post("/sessions", status_code=201)
    def post_session(payload: dict = Body(...)):
        return gw.create_session(payload)

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        return gw.get_session(sid).to_wire()

    @app.post("/sessions/{sid}/messages")
    def post_message(sid: str, payload: dict = Body(...)):
        return gw.post_message(sid, payload)

    @app.post("/sessions/{sid}/phase")
    def post_phase(sid: str, payload: dict = Body(...)):
        return gw.post_phase(sid, payload)

    # analytics
    @app.get("/kpis", dependencies=authored)
    def get_kpis(from_: Optional[str] = Query(None, alias="from"), to: Optional[str] = Query(None)):
        return gw.kpis(from_, to)

    @app.get("/analytics/matrix", dependencies=authored)
    def get_matrix(from_: Optional[str] = Query(None, alias="from"), to: Optional[str] = Query(None)):
        return gw.matrix(from_, to)

    @app.get("/analytics/phases", dependencies=authored)
    def get_phases(from_: Optional[str] = Query(None, alias="from"), to: Optional[str] = Query(None)):
        return gw.phases(from_, to)

    @app.post("/analytics/annotations", dependencies=authored)
    def post_annotation(payload: dict = Body(...)):
        return gw.annotate(payload)

    @app.post("/analytics/corpus", dependencies=authored)
    async def post_corpus(request: Request):
        text = (await request.body()).decode("utf-8")
        return gw.import_corpus(text)

    @app.get("/health")
    def health():
        return {"status": "ok", "events": gw.store.last_seq, "log_records": len(gw.log)}

    return app


# --------------------------------------------------------------------------
# serving

class ServerHandle:
    """A running service; bind errors surface on start()."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.gateway = Gateway(config)
        self.app = create_app(config, gateway=self.gateway)
        self._uv = uvicorn.Server(
            uvicorn.Config(self.app, host=config.host, port=config.port, log_level="warning")
        )
        self._thread: threading.Thread | None = None
        self._socket: socket.socket | None = None

    @property
    def port(self) -> int:
        return self.config.port

    def start(self) -> "ServerHandle":
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((self.config.host, self.config.port))  # port in use -> OSError
        self._socket = sock
        self._thread = threading.Thread(
            target=self._uv.run, kwargs={"sockets": [sock]}, daemon=True
        )
        self._thread.start()
        deadline = time.time() + 10.0
        while time.time() < deadline:
            if self._uv.started:
                return self
            if not self._thread.is_alive():
                raise RuntimeError("server thread died during startup")
            time.sleep(0.02)
        raise RuntimeError("server did not start in time")

    def stop(self) -> None:
        self._uv.should_exit = True
        if self._thread is not None:
            self._thread.join(timeout=10.0)
        self.gateway.close()


def serve(config: ServiceConfig) -> ServerHandle:
    """Load state, bind, and return a running handle."""
    return ServerHandle(config).start()


@click.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None, help="JSON config file.")
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--data-dir", default=None)
def main(config_path, host, port, data_dir):
    """Run the tabletalk gateway until interrupted."""
    config = ServiceConfig.load(config_path)
    overrides = {}
    if host is not None:
        overrides["host"] = host
    if port is not None:
        overrides["port"] = port
    if data_dir is not None:
        overrides["data_dir"] = data_dir
    if overrides:
        from dataclasses import replace

        config = replace(config, **overrides)
    handle = serve(config)
    click.echo(f"listening on http://{config.host}:{config.port} (data: {config.data_dir})")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        handle.stop()


if __name__ == "__main__":
    main()
