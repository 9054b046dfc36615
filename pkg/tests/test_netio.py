import json

import pytest

from seoaudit.detectors import RedirectMechanism, cloaking_similarities
from seoaudit.errors import FetchFailure, ResolverFailure, SchemaError, TimeoutExceeded
from seoaudit.netio import (
    BROWSER_USER_AGENT,
    CRAWLER_USER_AGENT,
    DnsProbeResult,
    FixtureResolver,
    LiveTransport,
    PlaybackTransport,
    dns_wildcard_probe,
    fetch_pair,
    follow_redirects,
    live_request_count,
)
from seoaudit.page import visible_text

LONG_BODY = "<html><body><p>one two three four five six seven eight nine ten</p></body></html>"
OTHER_BODY = "<html><body><p>uno dos tres cuatro cinco seis siete ocho nueve diez</p></body></html>"


def _playback(entries):
    return PlaybackTransport.from_dict({"schema_version": 1, "responses": entries})


# --- playback + fetch_pair ---


def test_identical_views_downstream_similarity():
    t = _playback([{"url": "http://site.test/", "view": "any", "status": 200, "body": LONG_BODY}])
    pair = fetch_pair("http://site.test/", t)
    evidence = cloaking_similarities(pair, "")
    assert evidence.signature_sim == 1.0 and evidence.dom_sim == 1.0
    assert t.request_log == [("crawler", "http://site.test/"), ("user", "http://site.test/")]


def test_per_view_bodies_differ():
    t = _playback(
        [
            {"url": "http://site.test/", "view": "crawler", "status": 200, "body": LONG_BODY},
            {"url": "http://site.test/", "view": "user", "status": 200, "body": OTHER_BODY},
        ]
    )
    pair = fetch_pair("http://site.test/", t)
    assert visible_text(pair.crawler_view) != visible_text(pair.user_view)


def test_missing_fixture_is_fetch_failure():
    t = _playback([])
    with pytest.raises(FetchFailure):
        fetch_pair("http://nowhere.test/", t)


def test_fixture_schema_version_enforced():
    with pytest.raises(SchemaError):
        PlaybackTransport.from_dict({"responses": []})


def test_fixture_file_loading(tmp_path):
    path = tmp_path / "fixture.json"
    path.write_text(
        json.dumps(
            {
                "schema_version": 1,
                "responses": [
                    {"url": "http://x.test/", "view": "any", "status": 200, "body": LONG_BODY}
                ],
            }
        )
    )
    t = PlaybackTransport.from_file(path)
    assert t.fetch("http://x.test/").status == 200


def test_playback_follows_http_redirects():
    t = _playback(
        [
            {"url": "http://a.test/", "status": 302, "headers": {"Location": "/next"}, "body": ""},
            {"url": "http://a.test/next", "status": 200, "body": LONG_BODY},
        ]
    )
    result = t.fetch("http://a.test/")
    assert result.final_url == "http://a.test/next"
    assert [h.mechanism for h in result.hops] == [RedirectMechanism.HTTP_3XX]


# --- follow_redirects ---


def test_no_redirect_single_hop():
    t = _playback([{"url": "http://a.test/", "status": 200, "body": LONG_BODY}])
    chain = follow_redirects("http://a.test/", t)
    assert len(chain.hops) == 1
    assert chain.hops[0].mechanism is None
    assert not chain.truncated


def test_mixed_mechanism_chain():
    meta_body = '<html><head><meta http-equiv="refresh" content="0; url=http://c.test/"></head></html>'
    t = _playback(
        [
            {"url": "http://a.test/", "status": 301, "headers": {"Location": "http://b.test/"}, "body": ""},
            {"url": "http://b.test/", "status": 200, "body": meta_body},
            {"url": "http://c.test/", "status": 200, "body": LONG_BODY},
        ]
    )
    chain = follow_redirects("http://a.test/", t)
    assert [h.url for h in chain.hops] == ["http://a.test/", "http://b.test/", "http://c.test/"]
    assert chain.mechanisms == [RedirectMechanism.HTTP_3XX, RedirectMechanism.META_REFRESH]
    assert chain.final_url == "http://c.test/"


def test_script_location_detected_statically():
    script_body = "<html><body><script>window.location = 'http://evil.test/';</script></body></html>"
    t = _playback(
        [
            {"url": "http://a.test/", "status": 200, "body": script_body},
            {"url": "http://evil.test/", "status": 200, "body": LONG_BODY},
        ]
    )
    chain = follow_redirects("http://a.test/", t)
    assert chain.mechanisms == [RedirectMechanism.SCRIPT_LOCATION]
    assert chain.final_url == "http://evil.test/"


def test_redirect_loop_truncated_at_limit():
    t = _playback(
        [
            {"url": "http://a.test/", "status": 301, "headers": {"Location": "http://b.test/"}, "body": ""},
            {"url": "http://b.test/", "status": 301, "headers": {"Location": "http://a.test/"}, "body": ""},
        ]
    )
    chain = follow_redirects("http://a.test/", t, max_hops=10)
    assert len(chain.hops) == 10
    assert chain.truncated


# --- live transport (network path faked) ---


class _FakeHttp:
    def __init__(self, script):
        self.script = dict(script)
        self.calls = []

    def __call__(self, url, headers, timeout):
        self.calls.append((url, headers["User-Agent"]))
        status, location, body = self.script[url]
        resp_headers = {"location": location} if location else {}
        return status, resp_headers, body.encode(), url


def test_live_transport_redirects_and_agents():
    fake = _FakeHttp(
        {
            "http://a.test/": (301, "http://b.test/", ""),
            "http://b.test/": (200, None, LONG_BODY),
        }
    )
    t = LiveTransport(http_get=fake, min_delay=0.0)
    result = t.fetch("http://a.test/", view="crawler")
    assert result.final_url == "http://b.test/"
    assert [ua for _, ua in fake.calls] == [CRAWLER_USER_AGENT] * 2
    result = t.fetch("http://b.test/", view="user")
    assert fake.calls[-1][1] == BROWSER_USER_AGENT


def test_live_transport_wraps_errors():
    def boom(url, headers, timeout):
        raise FetchFailure("live", "connection refused")

    t = LiveTransport(http_get=boom, min_delay=0.0)
    with pytest.raises(FetchFailure):
        t.fetch("http://unreachable.test/")


def test_live_transport_wraps_arbitrary_failures():
    def flaky(url, headers, timeout):
        raise RuntimeError("socket melted")

    t = LiveTransport(http_get=flaky, min_delay=0.0)
    with pytest.raises(FetchFailure) as exc:
        t.fetch("http://unreachable.test/")
    assert "socket melted" in str(exc.value)


def test_live_transport_timeout_is_fetch_failure_subclass():
    def slow(url, headers, timeout):
        raise TimeoutExceeded("live", "deadline")

    t = LiveTransport(http_get=slow, min_delay=0.0)
    with pytest.raises(FetchFailure):
        t.fetch("http://slow.test/")


def test_politeness_min_delay_per_host():
    clock = {"now": 0.0}
    sleeps = []

    def fake_clock():
        return clock["now"]

    def fake_sleep(seconds):
        sleeps.append(seconds)
        clock["now"] += seconds

    fake = _FakeHttp({"http://a.test/": (200, None, LONG_BODY), "http://b.test/x": (200, None, LONG_BODY)})
    t = LiveTransport(http_get=fake, min_delay=1.0, clock=fake_clock, sleep=fake_sleep)
    t.fetch("http://a.test/")
    t.fetch("http://a.test/")  # same host: must wait out the full delay
    assert sleeps and sleeps[0] >= 1.0
    before = list(sleeps)
    t.fetch("http://b.test/x")  # different host: no extra wait
    assert sleeps == before
    assert len(t.request_log) == 3


def test_fake_http_does_not_count_as_live_traffic():
    before = live_request_count()
    fake = _FakeHttp({"http://a.test/": (200, None, LONG_BODY)})
    LiveTransport(http_get=fake, min_delay=0.0).fetch("http://a.test/")
    assert live_request_count() == before


# --- DNS wildcard probing ---


def test_wildcard_detected_when_all_labels_resolve_alike():
    resolver = FixtureResolver({"*.farm.test": ["10.0.0.1"]})
    result = dns_wildcard_probe("farm.test", resolver)
    assert result.wildcard_detected
    assert len(result.probe_labels) == 3
    assert all(len(label) == 16 for label in result.probe_labels)


def test_no_answers_no_wildcard():
    result = dns_wildcard_probe("normal.test", FixtureResolver({}))
    assert not result.wildcard_detected


class _OneOfThreeResolver:
    def __init__(self):
        self.calls = 0

    def resolve(self, name):
        self.calls += 1
        return ("10.0.0.1",) if self.calls == 1 else ()


def test_partial_answers_no_wildcard():
    result = dns_wildcard_probe("mixed.test", _OneOfThreeResolver())
    assert not result.wildcard_detected


def test_differing_answers_no_wildcard():
    class Differ:
        def __init__(self):
            self.calls = 0

        def resolve(self, name):
            self.calls += 1
            return (f"10.0.0.{self.calls}",)

    assert not dns_wildcard_probe("diff.test", Differ()).wildcard_detected


def test_probe_rejects_bad_domain():
    with pytest.raises(ResolverFailure):
        dns_wildcard_probe("not a domain", FixtureResolver({}))


def test_probe_deterministic_with_seeded_rng():
    import random

    resolver = FixtureResolver({"*.farm.test": ["10.0.0.1"]})
    a = dns_wildcard_probe("farm.test", resolver, rng=random.Random(5))
    b = dns_wildcard_probe("farm.test", resolver, rng=random.Random(5))
    assert a == b == DnsProbeResult(
        domain="farm.test",
        wildcard_detected=True,
        probe_labels=a.probe_labels,
        addresses=a.addresses,
    )
