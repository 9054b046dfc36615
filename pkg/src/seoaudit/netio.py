"""Dual-view fetching, redirect walking, and DNS wildcard probing.

All acquisition goes through a Transport so everything downstream is
testable offline: PlaybackTransport replays recorded fixtures
deterministically, while LiveTransport does real HTTP with per-host rate
limiting and a global concurrency cap. Every live HTTP request increments a
module counter, which lets a test suite assert that it ran network-free.
"""

from __future__ import annotations

import json
import random
import re
import socket
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import urljoin, urlparse

from .detectors import Hop, RedirectChain, RedirectMechanism
from .errors import FetchFailure, ResolverFailure, SchemaError, TimeoutExceeded
from .page import SnapshotPair, parse_html

FIXTURE_SCHEMA_VERSION = 1

REDIRECT_STATUSES = (301, 302, 303, 307, 308)

# Documented defaults; both are configurable on LiveTransport.
CRAWLER_USER_AGENT = "Mozilla/5.0 (compatible; Googlebot/2.1; +http://www.google.com/bot.html)"
BROWSER_USER_AGENT = (
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 "
    "(KHTML, like Gecko) Chrome/120.0 Safari/537.36"
)

_META_REFRESH_RE = re.compile(r"url\s*=\s*['\"]?([^'\";]+)", re.IGNORECASE)
_SCRIPT_LOCATION_RES = (
    re.compile(r"(?:window\.|document\.|top\.|self\.)?location(?:\.href)?\s*=\s*[\"']([^\"']+)[\"']"),
    re.compile(r"location\.(?:replace|assign)\(\s*[\"']([^\"']+)[\"']"),
)

# Requests made through the real network path; playback never touches it.
_live_requests = 0
_live_lock = threading.Lock()


def live_request_count() -> int:
    return _live_requests


def _count_live_request() -> None:
    global _live_requests
    with _live_lock:
        _live_requests += 1


@dataclass
class FetchResult:
    status: int
    headers: dict[str, str]
    body: bytes
    final_url: str
    hops: list[Hop] = field(default_factory=list)  # HTTP-level redirects taken
    redirect_limit_hit: bool = False


class PlaybackTransport:
    """Replays recorded (URL, view) -> response fixtures; never networks.

    Fixture schema (JSON): {"schema_version": 1, "responses": [{"url": ...,
    "view": "crawler"|"user"|"any", "status": 200, "headers": {...},
    "body": "..."}]}. Lookup tries the exact view first, then "any".
    """

    def __init__(self, responses: dict[tuple[str, str], dict]):
        self._responses = responses
        self.request_log: list[tuple[str, str]] = []  # (view, url)

    @classmethod
    def from_dict(cls, obj: dict) -> "PlaybackTransport":
        if obj.get("schema_version") != FIXTURE_SCHEMA_VERSION:
            raise SchemaError("unsupported or missing fixture schema_version")
        responses = {}
        for entry in obj.get("responses", []):
            key = (entry["url"], entry.get("view", "any"))
            responses[key] = entry
        return cls(responses)

    @classmethod
    def from_file(cls, path: str | Path) -> "PlaybackTransport":
        return cls.from_dict(json.loads(Path(path).read_text("utf-8")))

    def _lookup(self, url: str, view: str) -> dict:
        entry = self._responses.get((url, view)) or self._responses.get((url, "any"))
        if entry is None:
            raise FetchFailure(view, f"no fixture recorded for {url}")
        return entry

    def fetch(self, url: str, view: str = "user", max_redirects: int = 10) -> FetchResult:
        hops: list[Hop] = []
        current = url
        limit_hit = False
        while True:
            self.request_log.append((view, current))
            entry = self._lookup(current, view)
            status = int(entry.get("status", 200))
            headers = {k.lower(): v for k, v in entry.get("headers", {}).items()}
            if status in REDIRECT_STATUSES and headers.get("location") and len(hops) < max_redirects:
                hops.append(Hop(current, RedirectMechanism.HTTP_3XX))
                current = urljoin(current, headers["location"])
                continue
            if status in REDIRECT_STATUSES and headers.get("location"):
                limit_hit = True
            body = entry.get("body", "")
            return FetchResult(
                status=status,
                headers=headers,
                body=body.encode("utf-8") if isinstance(body, str) else body,
                final_url=current,
                hops=hops,
                redirect_limit_hit=limit_hit,
            )


def _default_http_get(url: str, headers: dict[str, str], timeout: float):
    """Single HTTP request without auto-redirects (the real network path)."""
    import requests

    _count_live_request()
    try:
        resp = requests.get(url, headers=headers, allow_redirects=False, timeout=timeout)
    except requests.Timeout as exc:
        raise TimeoutExceeded("live", f"{url}: {exc}") from exc
    except requests.RequestException as exc:
        raise FetchFailure("live", f"{url}: {exc}") from exc
    return resp.status_code, {k.lower(): v for k, v in resp.headers.items()}, resp.content, url


class LiveTransport:
    """Real HTTP with politeness: per-host min delay and a concurrency cap.

    Proxy settings come from the standard environment variables (honored by
    the underlying HTTP library). The injectable http_get/clock/sleep hooks
    exist so behavior is testable without a network.
    """

    def __init__(
        self,
        crawler_user_agent: str = CRAWLER_USER_AGENT,
        browser_user_agent: str = BROWSER_USER_AGENT,
        min_delay: float = 1.0,
        max_parallel: int = 4,
        timeout: float = 15.0,
        http_get=None,
        clock=time.monotonic,
        sleep=time.sleep,
    ):
        self._agents = {"crawler": crawler_user_agent, "user": browser_user_agent}
        self.min_delay = min_delay
        self.timeout = timeout
        self._http_get = http_get or _default_http_get
        self._clock = clock
        self._sleep = sleep
        self._gate = threading.BoundedSemaphore(max_parallel)
        self._host_lock = threading.Lock()
        self._last_request: dict[str, float] = {}
        self.request_log: list[tuple[float, str, str]] = []  # (time, view, url)

    def _respect_delay(self, host: str) -> None:
        with self._host_lock:
            last = self._last_request.get(host)
            now = self._clock()
            wait = 0.0 if last is None else max(0.0, self.min_delay - (now - last))
            # Reserve the slot before sleeping so concurrent callers queue up.
            self._last_request[host] = now + wait
        if wait > 0:
            self._sleep(wait)

    def fetch(self, url: str, view: str = "user", max_redirects: int = 10) -> FetchResult:
        headers = {"User-Agent": self._agents.get(view, self._agents["user"])}
        hops: list[Hop] = []
        current = url
        limit_hit = False
        with self._gate:
            while True:
                host = urlparse(current).netloc
                self._respect_delay(host)
                self.request_log.append((self._clock(), view, current))
                try:
                    status, resp_headers, body, _ = self._http_get(current, headers, self.timeout)
                except FetchFailure:
                    raise
                except Exception as exc:
                    raise FetchFailure(view, f"{current}: {exc}") from exc
                if status in REDIRECT_STATUSES and resp_headers.get("location"):
                    if len(hops) >= max_redirects:
                        limit_hit = True
                    else:
                        hops.append(Hop(current, RedirectMechanism.HTTP_3XX))
                        current = urljoin(current, resp_headers["location"])
                        continue
                return FetchResult(
                    status=status,
                    headers=resp_headers,
                    body=body,
                    final_url=current,
                    hops=hops,
                    redirect_limit_hit=limit_hit,
                )


def fetch_pair(url: str, transport, max_redirects: int = 10) -> SnapshotPair:
    """Fetch a URL under crawler and browser identities and parse both views.

    Both views are parsed against the request URL, which keeps the pair's
    shared-URL invariant even when the views redirect differently.
    """
    views = {}
    for view in ("crawler", "user"):
        try:
            result = transport.fetch(url, view=view, max_redirects=max_redirects)
        except FetchFailure:
            raise
        except Exception as exc:  # transport-specific failure
            raise FetchFailure(view, str(exc)) from exc
        views[view] = parse_html(result.body, url)
    return SnapshotPair(
        crawler_view=views["crawler"], user_view=views["user"], fetched_at=(time.time(), time.time())
    )


def _find_meta_refresh(body: bytes, base_url: str) -> str | None:
    doc = parse_html(body, base_url) if body.strip() else None
    if doc is None:
        return None
    for node in doc.dom_root.walk():
        if node.tag != "meta":
            continue
        if (node.attributes.get("http-equiv") or "").strip().lower() != "refresh":
            continue
        match = _META_REFRESH_RE.search(node.attributes.get("content") or "")
        if match:
            return urljoin(base_url, match.group(1).strip())
    return None


def _find_script_location(body: bytes, base_url: str) -> str | None:
    doc = parse_html(body, base_url) if body.strip() else None
    if doc is None:
        return None
    for node in doc.dom_root.walk():
        if node.tag != "script":
            continue
        text = "".join(c for c in node.content if isinstance(c, str))
        for pattern in _SCRIPT_LOCATION_RES:
            match = pattern.search(text)
            if match:
                return urljoin(base_url, match.group(1).strip())
    return None


def follow_redirects(url: str, transport, max_hops: int = 10, view: str = "user") -> RedirectChain:
    """Walk a redirect chain hop by hop, labeling each mechanism.

    HTTP 3xx responses, meta-refresh tags, and statically detected script
    location assignments all continue the chain (scripts are pattern-scanned,
    never executed). Stops at the first non-redirecting response or at
    max_hops, in which case the chain is returned with truncated set.
    """
    if max_hops < 1:
        raise ValueError("max_hops must be >= 1")
    hops: list[Hop] = []
    current = url
    for _ in range(max_hops):
        result = transport.fetch(current, view=view, max_redirects=0)
        next_url: str | None = None
        mechanism: RedirectMechanism | None = None
        if result.status in REDIRECT_STATUSES and result.headers.get("location"):
            next_url = urljoin(current, result.headers["location"])
            mechanism = RedirectMechanism.HTTP_3XX
        else:
            try:
                next_url = _find_meta_refresh(result.body, current)
                mechanism = RedirectMechanism.META_REFRESH if next_url else None
                if next_url is None:
                    next_url = _find_script_location(result.body, current)
                    mechanism = RedirectMechanism.SCRIPT_LOCATION if next_url else None
            except Exception:
                next_url = None
                mechanism = None
        if next_url is None:
            hops.append(Hop(current, None))
            return RedirectChain(hops=hops, truncated=False)
        hops.append(Hop(current, mechanism))
        current = next_url
    return RedirectChain(hops=hops, truncated=True)


# --- DNS wildcard probing ---


@dataclass(frozen=True)
class DnsProbeResult:
    domain: str
    wildcard_detected: bool
    probe_labels: tuple[str, ...]
    addresses: tuple[tuple[str, ...], ...] = ()


class FixtureResolver:
    """Resolver over a static mapping; supports '*.domain' wildcard entries."""

    def __init__(self, records: dict[str, list[str]]):
        self._records = {k.lower(): tuple(sorted(v)) for k, v in records.items()}

    def resolve(self, name: str) -> tuple[str, ...]:
        name = name.lower()
        if name in self._records:
            return self._records[name]
        parts = name.split(".")
        for i in range(1, len(parts)):
            wildcard = "*." + ".".join(parts[i:])
            if wildcard in self._records:
                return self._records[wildcard]
        return ()


class LiveResolver:
    """System resolver; empty tuple for NXDOMAIN, ResolverFailure otherwise."""

    def resolve(self, name: str) -> tuple[str, ...]:
        _count_live_request()
        try:
            infos = socket.getaddrinfo(name, None)
        except socket.gaierror as exc:
            if exc.errno in (socket.EAI_NONAME, getattr(socket, "EAI_NODATA", -5)):
                return ()
            raise ResolverFailure(f"{name}: {exc}") from exc
        except OSError as exc:
            raise ResolverFailure(f"{name}: {exc}") from exc
        return tuple(sorted({info[4][0] for info in infos}))


_LABEL_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789"


def dns_wildcard_probe(domain: str, resolver, probes: int = 3, rng: random.Random | None = None) -> DnsProbeResult:
    """Probe random labels under a domain for wildcard DNS.

    Wildcard is reported only when every probe resolves to the same
    non-empty address set. Pass a seeded rng for reproducible labels.
    """
    if not domain or " " in domain or "." not in domain:
        raise ResolverFailure(f"not a probeable domain: {domain!r}")
    rng = rng or random
    labels = tuple(
        "".join(rng.choice(_LABEL_ALPHABET) for _ in range(16)) for _ in range(probes)
    )
    answers = tuple(tuple(sorted(resolver.resolve(f"{label}.{domain}"))) for label in labels)
    wildcard = all(answers) and len(set(answers)) == 1
    return DnsProbeResult(
        domain=domain, wildcard_detected=wildcard, probe_labels=labels, addresses=answers
    )
