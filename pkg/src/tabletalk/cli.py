"""Guest CLI: desk-scale stand-in for the mobile app.

Every command is a pure HTTP client of the gateway; nothing touches the
store directly. Exit codes: 0 success, 1 validation failure, 2 the service
could not be reached.
"""

from __future__ import annotations

import json

import click
import requests

from .model import rfc3339_to_ts, ts_to_rfc3339

EXIT_VALIDATION = 1
EXIT_CONNECTIVITY = 2


class CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class Client:
    """Thin requests wrapper with the contract exit codes."""

    def __init__(self, base_url: str, token: str):
        self.base_url = base_url.rstrip("/")
        self.session = requests.Session()
        self.token = token

    def call(self, method: str, path: str, ok=(200, 201, 204), **kwargs):
        headers = kwargs.pop("headers", {})
        headers.setdefault("Authorization", f"Bearer {self.token}")
        try:
            response = self.session.request(
                method, self.base_url + path, headers=headers, timeout=30, **kwargs
            )
        except (requests.ConnectionError, requests.Timeout) as exc:
            raise CliFailure(EXIT_CONNECTIVITY, f"cannot reach {self.base_url}: {exc}") from None
        if response.status_code not in ok:
            detail = ""
            try:
                body = response.json()
                detail = body.get("error", "")
                if body.get("violations"):
                    detail += ": " + ", ".join(body["violations"])
            except ValueError:
                detail = response.text[:200]
            raise CliFailure(EXIT_VALIDATION, f"{method} {path} -> {response.status_code} {detail}")
        if response.status_code == 204 or not response.content:
            return None
        return response.json()

    def ensure_profile(self, profile_id: str | None) -> str:
        if profile_id:
            self.call("GET", f"/profiles/{profile_id}")
            return profile_id
        created = self.call("POST", "/profiles", json={})
        click.echo(f"created guest profile {created['id']}")
        return created["id"]


@click.group()
@click.option("--server", default="http://127.0.0.1:8037", envvar="TABLETALK_SERVER", show_default=True)
@click.option("--token", default="dev-token", envvar="TABLETALK_TOKEN")
@click.pass_context
def main(ctx, server, token):
    """Talk to a running tabletalk gateway."""
    ctx.obj = Client(server, token)


def _run(ctx, fn):
    try:
        fn()
    except CliFailure as failure:
        click.echo(str(failure), err=True)
        ctx.exit(failure.code)


@main.command()
@click.argument("path", type=click.Path(exists=True))
@click.pass_context
def seed(ctx, path):
    """Populate the catalog from a seed JSON file via authoring endpoints."""
    client: Client = ctx.obj

    def go():
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        restaurants = data.get("restaurants", [])
        dishes = data.get("dishes", [])
        fences = 0
        for item in restaurants:
            client.call("POST", "/restaurants", json=item)
            fences += 1  # the default fence
        for item in dishes:
            rid = item.get("restaurant_id")
            if not rid:
                raise CliFailure(EXIT_VALIDATION, "seed dish without restaurant_id")
            payload = {k: v for k, v in item.items() if k != "restaurant_id"}
            client.call("POST", f"/restaurants/{rid}/dishes", json=payload)
            if item.get("dedicated_fence"):
                fences += 1
        click.echo(f"{len(restaurants)} restaurants, {len(dishes)} dishes, {fences} fences")

    _run(ctx, go)


def _load_walk_script(path: str) -> tuple[str | None, list[dict], list[dict]]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, list):
        return None, data, []
    return data.get("profile"), data.get("points", []), data.get("phases", [])


@main.command()
@click.argument("script", type=click.Path(exists=True))
@click.option("--profile", default=None, help="Profile id; a guest profile is created when omitted.")
@click.option("--mute", is_flag=True, help="Mute notifications for the duration of the walk first.")
@click.option("--session", "session_id", default=None, help="Chat session that phase events apply to.")
@click.pass_context
def walk(ctx, script, profile, mute, session_id):
    """Replay a GPS walk script and print every notification."""
    client: Client = ctx.obj

    def go():
        script_profile, points, phase_events = _load_walk_script(script)
        if not points and not phase_events:
            click.echo("0 updates, 0 notifications")
            return
        if phase_events and not session_id:
            raise CliFailure(EXIT_VALIDATION, "walk script has phase events; pass --session")

        def stamp(event) -> float:
            at = event["at"]
            return rfc3339_to_ts(at) if isinstance(at, str) else float(at)

        try:
            events = sorted(
                [("point", p) for p in points] + [("phase", p) for p in phase_events],
                key=lambda e: stamp(e[1]),
            )
            stamps = [stamp(e) for e in points] + [stamp(e) for e in phase_events]
        except (KeyError, ValueError, TypeError) as exc:
            raise CliFailure(EXIT_VALIDATION, f"bad walk script: {exc}") from None
        # each stream must already be ordered, and the merge must not tie
        merged = sorted(stamps)
        point_stamps = stamps[: len(points)]
        phase_stamps = stamps[len(points) :]
        streams_ordered = all(b > a for a, b in zip(point_stamps, point_stamps[1:])) and all(
            b > a for a, b in zip(phase_stamps, phase_stamps[1:])
        )
        if not streams_ordered or any(b <= a for a, b in zip(merged, merged[1:])):
            raise CliFailure(EXIT_VALIDATION, "walk script timestamps must strictly increase")
        user_id = client.ensure_profile(profile or script_profile)
        if mute:
            client.call(
                "PATCH",
                f"/profiles/{user_id}",
                json={"muted_until": ts_to_rfc3339(stamps[-1] + 1.0)},
            )
        total = 0
        for kind, event in events:
            if kind == "phase":
                client.call("POST", f"/sessions/{session_id}/phase", json={"phase": event["phase"]})
                click.echo(f"phase -> {event['phase']}")
                continue
            body = client.call(
                "POST",
                "/location",
                json={
                    "user_id": user_id,
                    "lat": event["lat"],
                    "lon": event["lon"],
                    "at": event["at"],
                },
            )
            for notification in body["notifications"]:
                total += 1
                click.echo(
                    f"[{notification['at']}] {notification['dish_name']} "
                    f"at {notification['distance_m']} m: {notification['message']}"
                )
        click.echo(f"{len(points)} updates, {total} notifications")

    _run(ctx, go)


@main.command()
@click.argument("dish_id")
@click.option("--profile", default=None)
@click.option("--seed", "seed_n", type=int, default=None, help="Seed the response RNG (reproducible chats).")
@click.pass_context
def chat(ctx, dish_id, profile, seed_n):
    """Interactive chat with a dish persona. /phase PHASE advances, /quit exits."""
    client: Client = ctx.obj

    def go():
        dish = client.call("GET", f"/dishes/{dish_id}")
        user_id = client.ensure_profile(profile)
        payload = {"user_id": user_id, "dish_id": dish_id}
        if seed_n is not None:
            payload["seed"] = seed_n
        session = client.call("POST", "/sessions", json=payload)
        click.echo(f"chatting with {dish['name']} (session {session['id']}); /phase PHASE, /quit")
        while True:
            try:
                line = input("> ").strip()
            except EOFError:
                break
            if not line:
                continue
            if line == "/quit":
                break
            if line.startswith("/phase"):
                parts = line.split(None, 1)
                if len(parts) != 2:
                    click.echo("usage: /phase prearrival|postarrival_preprocess|while_dining|after_dining")
                    continue
                client.call("POST", f"/sessions/{session['id']}/phase", json={"phase": parts[1]})
                click.echo(f"phase -> {parts[1]}")
                continue
            body = client.call("POST", f"/sessions/{session['id']}/messages", json={"text": line})
            turn = body["turn"]
            click.echo(f"[{turn['matched_intent']}] {turn['response_text']}")

    _run(ctx, go)


def _print_report(report: dict) -> None:
    click.echo(f"inquiries: {report['total_inquiries']}")
    click.echo(f"responded: {report['responded']}")
    click.echo(f"fallback count: {report['fallback_count']}")
    rate = report.get("fallback_rate_pct")
    click.echo(f"fallback rate: {rate:.1f}%" if rate is not None else "fallback rate: n/a")
    outcomes = " ".join(f"{k}={v}" for k, v in sorted(report["outcome_totals"].items()))
    click.echo(f"outcomes: {outcomes}")
    categories = report["category_totals"]
    click.echo(
        "categories: entertainment={entertainment} information_advice={information_advice} "
        "control={control}".format(**categories)
    )
    phases = report["phase_totals"]
    click.echo(
        "phases: prearrival={prearrival} postarrival_preprocess={postarrival_preprocess} "
        "while_dining={while_dining} after_dining={after_dining}".format(**phases)
    )
    talked = ", ".join(f"{row['dish_id']}={row['inquiries']}" for row in report["most_talked_to"][:5])
    click.echo(f"most talked to: {talked or 'none'}")
    popular = ", ".join(f"{row['dish_id']}={row['distinct_users']}" for row in report["most_popular"][:5])
    click.echo(f"most popular: {popular or 'none'}")
    trending = ", ".join(
        f"{row['dish_id']} ({row['recent']} vs {row['prior']})" for row in report["trending_local"][:5]
    )
    click.echo(f"trending local: {trending or 'none'}")
    click.echo(f"users: registered={report['registered_users']} active={report['active_users']}")


@main.command("replay-corpus")
@click.argument("path", type=click.Path(exists=True))
@click.pass_context
def replay_corpus(ctx, path):
    """Import a pre-labeled turn corpus and print the resulting KPI report."""
    client: Client = ctx.obj

    def go():
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        result = client.call("POST", "/analytics/corpus", data=text.encode("utf-8"))
        click.echo(f"imported {result['imported']} turns")
        report = client.call("GET", "/kpis")
        _print_report(report)

    _run(ctx, go)


if __name__ == "__main__":
    main()
