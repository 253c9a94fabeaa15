"""Location resolution with a pluggable client, persistent cache, and
great-circle distance.

Every query is the folded location string suffixed with ", colombia".
Negative answers are cached alongside positives so OCR junk does not hammer
the client on every run. Department attribution takes the client's
administrative area when present, else the nearest department centroid from
the bundled table.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Protocol

import requests

from eventminer.errors import TransportError, TransportExhausted
from eventminer.textnorm import fold
from eventminer.transport import TransportPolicy, with_retries

EARTH_RADIUS_KM = 6371.0


@dataclass(frozen=True)
class GeoPoint:
    latitude: float
    longitude: float
    resolved_name: str
    department: str | None = None

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} out of range")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} out of range")


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    return haversine_coords_km(a.latitude, a.longitude,
                               b.latitude, b.longitude)


def haversine_coords_km(lat1: float, lon1: float,
                        lat2: float, lon2: float) -> float:
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    h = (math.sin(dphi / 2.0) ** 2
         + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2)
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(min(1.0, h)))


@lru_cache(maxsize=1)
def department_centroids() -> tuple[tuple[str, float, float], ...]:
    text = (resources.files("eventminer")
            / "data/department_centroids.csv").read_text("utf-8")
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        rows.append((row["department"], float(row["latitude"]),
                     float(row["longitude"])))
    return tuple(rows)


def nearest_department(latitude: float, longitude: float) -> str:
    best_name, best_dist = "", math.inf
    for name, lat, lon in department_centroids():
        d = haversine_coords_km(latitude, longitude, lat, lon)
        if d < best_dist:
            best_name, best_dist = name, d
    return best_name


class GeocodeClient(Protocol):
    def resolve(self, query: str) -> tuple[float, float, str, str | None] | None:
        """Return (lat, lon, resolved_name, admin_area) or None if unknown."""


class FixtureGeoClient:
    """Gazetteer-backed client for tests and offline runs.

    CSV columns: query, lat, lon, name, department.
    """

    def __init__(self, path: str | Path):
        self.table: dict[str, tuple[float, float, str, str | None]] = {}
        self.calls = 0
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                self.table[fold(row["query"])] = (
                    float(row["lat"]), float(row["lon"]), row["name"],
                    row.get("department") or None)

    def resolve(self, query: str):
        self.calls += 1
        return self.table.get(fold(query))


class HTTPGeoClient:
    """Client for a Nominatim-style JSON search endpoint."""

    def __init__(self, endpoint: str, timeout: float = 30.0,
                 session: requests.Session | None = None):
        self.endpoint = endpoint
        self.timeout = timeout
        self.session = session or requests.Session()

    def resolve(self, query: str):
        try:
            resp = self.session.get(
                self.endpoint,
                params={"q": query, "format": "json", "limit": 1},
                timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"geocode request failed: {exc}") from exc
        if resp.status_code != 200:
            raise TransportError(f"HTTP {resp.status_code} from geocoder")
        try:
            items = resp.json()
        except ValueError as exc:
            raise TransportError(f"bad geocoder payload: {exc}") from exc
        if not items:
            return None
        item = items[0]
        try:
            lat, lon = float(item["lat"]), float(item["lon"])
        except (KeyError, ValueError, TypeError) as exc:
            raise TransportError(f"bad geocoder item: {exc}") from exc
        name = item.get("display_name") or query
        admin = None
        address = item.get("address") or {}
        for key in ("state", "department", "region"):
            if address.get(key):
                admin = address[key]
                break
        return lat, lon, name, admin


class GeoCache:
    """JSONL-persisted query cache; hits replay the original client answer."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[str, GeoPoint | None] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    entry = json.loads(line)
                    point = None
                    if entry.get("found"):
                        p = entry["point"]
                        point = GeoPoint(p["latitude"], p["longitude"],
                                         p["resolved_name"], p.get("department"))
                    self._entries[entry["query"]] = point

    def __contains__(self, query: str) -> bool:
        return query in self._entries

    def get(self, query: str) -> GeoPoint | None:
        return self._entries[query]

    def put(self, query: str, point: GeoPoint | None) -> None:
        with self._lock:
            self._entries[query] = point
            if self.path is None:
                return
            entry = {
                "query": query,
                "found": point is not None,
                "point": None if point is None else {
                    "latitude": point.latitude,
                    "longitude": point.longitude,
                    "resolved_name": point.resolved_name,
                    "department": point.department,
                },
                "timestamp": dt.datetime.now(dt.timezone.utc).isoformat(),
            }
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    def __len__(self) -> int:
        return len(self._entries)


def geocode_location(raw_location: str, client: GeocodeClient, cache: GeoCache,
                     policy: TransportPolicy | None = None, sleep=None,
                     diagnostics: dict[str, str] | None = None,
                     ) -> GeoPoint | None:
    """Resolve one location string; None when the client does not know it."""
    if not raw_location or not raw_location.strip():
        raise ValueError("raw_location must be non-empty")
    query = fold(raw_location) + ", colombia"
    if query in cache:
        return cache.get(query)
    policy = policy or TransportPolicy()
    kwargs = {} if sleep is None else {"sleep": sleep}
    try:
        answer = with_retries(lambda: client.resolve(query), policy, **kwargs)
    except TransportExhausted as exc:
        # Not cached: a later run with a healthy client should try again.
        if diagnostics is not None:
            diagnostics[raw_location] = str(exc)
        return None
    point = None
    if answer is not None:
        lat, lon, name, admin = answer
        department = admin if admin else nearest_department(lat, lon)
        point = GeoPoint(lat, lon, name or query, department)
    cache.put(query, point)
    return point
