"""Registrable-domain classification backed by a bundled suffix snapshot.

Uses a static public-suffix list shipped with the package so that
internal/external link classification is deterministic and works offline.
Wildcard and exception rules of the full public-suffix format are not
modeled; unknown top-level labels fall back to last-label-as-suffix.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from urllib.parse import urlparse

_SUFFIXES: frozenset[str] | None = None


def _load_suffixes() -> frozenset[str]:
    global _SUFFIXES
    if _SUFFIXES is None:
        text = resources.files("seoaudit.data").joinpath("public_suffixes.txt").read_text("utf-8")
        _SUFFIXES = frozenset(
            line.strip().lower()
            for line in text.splitlines()
            if line.strip() and not line.startswith("#")
        )
    return _SUFFIXES


def _is_ip(host: str) -> bool:
    if host.count(".") == 3 and all(p.isdigit() for p in host.split(".")):
        return True
    return ":" in host  # bracketless IPv6


@lru_cache(maxsize=4096)
def registrable_domain(host_or_url: str) -> str:
    """Public-suffix-plus-one-label for a host name or URL.

    Returns the host itself for IP addresses and single labels, and "" for
    inputs with no host at all (e.g. mailto: URLs).
    """
    host = host_or_url
    if "//" in host_or_url or host_or_url.startswith(("http:", "https:", "file:", "mailto:")):
        host = urlparse(host_or_url).hostname or ""
    host = host.strip().strip(".").lower()
    if not host:
        return ""
    if _is_ip(host):
        return host
    labels = host.split(".")
    if len(labels) == 1:
        return host
    suffixes = _load_suffixes()
    # Longest listed suffix wins; otherwise the last label acts as the suffix.
    for i in range(len(labels) - 1):
        candidate = ".".join(labels[i:])
        if candidate in suffixes:
            if i == 0:
                # The host IS a public suffix; no registrable domain below it.
                return host
            return ".".join(labels[i - 1 :])
    return ".".join(labels[-2:])


def same_registrable_domain(url_a: str, url_b: str) -> bool:
    """True when both URLs share a non-empty registrable domain."""
    a = registrable_domain(url_a)
    b = registrable_domain(url_b)
    return bool(a) and a == b
