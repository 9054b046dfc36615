"""Tolerant HTML parsing into a normalized page model.

Real-world spam pages are malformed more often than not, so the parser never
raises on bad markup: unclosed tags are auto-closed, stray end tags are
ignored, and a missing <html>/<body> skeleton is synthesized. The model kept
per page is deliberately small — an element tree, visible text grouped into
blocks, hyperlinks, meta-item presence, and media counts — because that is
exactly what the downstream feature extraction and detectors consume.

Parsing rules worth knowing:

* Depth counts element nodes only; the root ``html`` element has depth 1.
* A text block is a maximal run of visible text whose nearest block-level
  ancestor (p, div, li, h1-h6, td, blockquote, pre, section, article) is the
  same element; text with no block-level ancestor is grouped under the body.
* Content inside script, style, template, noscript, and head is never
  visible text (it is preserved for re-serialization).
* Bytes decode as UTF-8 with lossy replacement; a different encoding is
  honored only when declared in a charset meta item within the first 2 KiB.
* Only http(s) hyperlinks are recorded; javascript:/mailto:/tel:/data:
  targets are dropped.
"""

from __future__ import annotations

import codecs
import html as html_mod
import json
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from urllib.parse import urljoin, urlparse

from .domains import same_registrable_domain
from .errors import EmptyDocument, InvalidBaseUrl

VOID_TAGS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)

BLOCK_TAGS = frozenset(
    "p div li h1 h2 h3 h4 h5 h6 td blockquote pre section article".split()
)

# Content below these elements is not visible text.
INVISIBLE_TAGS = frozenset("script style template noscript head".split())

# Raw-text elements whose content must not be entity-escaped when serialized.
RAW_TEXT_TAGS = frozenset("script style".split())

# Opening one of these implicitly closes an open <p>.
_P_CLOSERS = frozenset(
    "p div ul ol li table section article blockquote pre h1 h2 h3 h4 h5 h6 form hr".split()
)

# Opening the same tag again closes the previous sibling (e.g. <li><li>).
_SELF_SIBLING_CLOSERS = frozenset("p li tr td th dt dd option".split())

_HEADING_TAGS = frozenset("h1 h2 h3 h4 h5 h6".split())

# Tags that belong inside <head>; anything else auto-closes an open head.
_HEAD_CONTENT_TAGS = frozenset("head title meta link base style script noscript template".split())

SKIPPED_LINK_SCHEMES = ("javascript:", "mailto:", "tel:", "data:")

MEDIA_KINDS = ("image", "video", "audio", "embedded-frame")

_MEDIA_TAG_KIND = {
    "img": "image",
    "video": "video",
    "audio": "audio",
    "iframe": "embedded-frame",
    "embed": "embedded-frame",
}

# The 12-item meta checklist used for the completeness feature.
META_CHECKLIST = (
    "title",
    "meta-description",
    "meta-keywords",
    "canonical",
    "robots",
    "viewport",
    "og:title",
    "og:description",
    "og:image",
    "twitter:card",
    "author",
    "charset",
)

_WS_RE = re.compile(r"\s+")
_CHARSET_RE = re.compile(
    rb"""<meta[^>]+charset\s*=\s*["']?\s*([a-zA-Z0-9._\-]+)""", re.IGNORECASE
)

JSON_SCHEMA_VERSION = 1


@dataclass
class DomNode:
    """One element node. ``content`` interleaves child elements with raw text
    segments in document order; ``children`` exposes the element-only view."""

    tag: str
    attributes: dict[str, str] = field(default_factory=dict)
    content: list = field(default_factory=list)  # DomNode | str
    depth: int = 1

    @property
    def children(self) -> list["DomNode"]:
        return [c for c in self.content if isinstance(c, DomNode)]

    def walk(self):
        """Yield this node and every descendant element, document order.

        Iterative, so adversarially deep trees cannot hit the recursion limit.
        """
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def subtree_text(self) -> str:
        """Whitespace-normalized text of all descendant text segments."""
        parts: list[str] = []
        stack: list = list(reversed(self.content))
        while stack:
            item = stack.pop()
            if isinstance(item, DomNode):
                stack.extend(reversed(item.content))
            else:
                parts.append(item)
        return _WS_RE.sub(" ", "".join(parts)).strip()


@dataclass(frozen=True)
class TextBlock:
    text: str
    token_count: int
    source_tag: str


@dataclass(frozen=True)
class LinkRecord:
    target: str
    anchor_text: str
    internal: bool


@dataclass
class PageDocument:
    """Normalized page: element tree plus the derived views of it."""

    url: str
    dom_root: DomNode
    text_blocks: list[TextBlock]
    links: list[LinkRecord]
    meta_items: frozenset[str]
    media_counts: dict[str, int]

    def max_depth(self) -> int:
        return max(node.depth for node in self.dom_root.walk())

    def distinct_tags(self) -> set[str]:
        return {node.tag for node in self.dom_root.walk()}

    def image_nodes(self) -> list[DomNode]:
        return [n for n in self.dom_root.walk() if n.tag == "img"]


@dataclass
class SnapshotPair:
    """Crawler-view and user-view snapshots of the same request URL."""

    crawler_view: PageDocument
    user_view: PageDocument
    fetched_at: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.crawler_view.url != self.user_view.url:
            raise ValueError("snapshot views must share the same request URL")


class _TreeBuilder(HTMLParser):
    """Event handler that grows a forest of DomNodes with auto-closing."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.top: list = []  # top-level DomNode | str
        self.stack: list[DomNode] = []

    def _append(self, item) -> None:
        if self.stack:
            self.stack[-1].content.append(item)
        else:
            self.top.append(item)

    def handle_starttag(self, tag, attrs):
        tag = tag.lower()
        attributes: dict[str, str] = {}
        for name, value in attrs:
            attributes.setdefault(name.lower(), value if value is not None else "")
        if tag not in _HEAD_CONTENT_TAGS:
            # a body-level tag while <head> is still open closes the head
            for i, open_node in enumerate(self.stack):
                if open_node.tag == "head":
                    del self.stack[i:]
                    break
        if self.stack:
            current = self.stack[-1].tag
            if tag in _SELF_SIBLING_CLOSERS and current == tag:
                self.stack.pop()
            elif tag in _HEADING_TAGS and current in _HEADING_TAGS:
                self.stack.pop()
            elif tag in _P_CLOSERS and current == "p" and tag != "p":
                self.stack.pop()
        node = DomNode(tag=tag, attributes=attributes)
        self._append(node)
        if tag not in VOID_TAGS:
            self.stack.append(node)

    def handle_startendtag(self, tag, attrs):
        tag = tag.lower()
        attributes: dict[str, str] = {}
        for name, value in attrs:
            attributes.setdefault(name.lower(), value if value is not None else "")
        self._append(DomNode(tag=tag, attributes=attributes))

    def handle_endtag(self, tag):
        tag = tag.lower()
        if tag in VOID_TAGS:
            return
        for i in range(len(self.stack) - 1, -1, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # Stray end tag: ignore.

    def handle_data(self, data):
        if data:
            self._append(data)

    # Comments, doctypes, and processing instructions carry no model content.
    def handle_comment(self, data):
        pass

    def handle_decl(self, decl):
        pass

    def handle_pi(self, data):
        pass


def _decode(raw: bytes) -> str:
    if raw.startswith(codecs.BOM_UTF8):
        return raw.decode("utf-8-sig", errors="replace")
    match = _CHARSET_RE.search(raw[:2048])
    if match:
        declared = match.group(1).decode("ascii", errors="replace")
        try:
            return raw.decode(codecs.lookup(declared).name, errors="replace")
        except LookupError:
            pass
    return raw.decode("utf-8", errors="replace")


def _assemble_root(top: list) -> DomNode | None:
    elements = [n for n in top if isinstance(n, DomNode)]
    texts = [t for t in top if isinstance(t, str)]

    html_nodes = [n for n in elements if n.tag == "html"]
    if html_nodes:
        root = html_nodes[0]
        for extra in elements:
            if extra is not root:
                root.content.append(extra)
        return root

    if not elements and not any(t.strip() for t in texts):
        return None

    root = DomNode(tag="html")
    if any(n.tag in ("head", "body") for n in elements):
        root.content = list(top)
    else:
        body = DomNode(tag="body", content=list(top))
        root.content = [body]
    return root


def _assign_depths(root: DomNode) -> None:
    stack = [(root, 1)]
    while stack:
        node, depth = stack.pop()
        node.depth = depth
        for child in node.children:
            stack.append((child, depth + 1))


def _extract_blocks(root: DomNode) -> list[TextBlock]:
    segments: list[tuple[DomNode, str]] = []  # (grouping element, raw text)
    stack: list[tuple] = [(root, ())]  # (node or text, ancestor chain)
    while stack:
        item, chain = stack.pop()
        if isinstance(item, DomNode):
            if item.tag in INVISIBLE_TAGS:
                continue
            child_chain = chain + (item,)
            stack.extend((child, child_chain) for child in reversed(item.content))
        else:
            key = None
            for anc in reversed(chain):
                if anc.tag in BLOCK_TAGS:
                    key = anc
                    break
            if key is None:
                for anc in reversed(chain):
                    if anc.tag == "body":
                        key = anc
                        break
                key = key or chain[0]
            segments.append((key, item))

    blocks: list[TextBlock] = []
    i = 0
    while i < len(segments):
        key = segments[i][0]
        j = i
        parts: list[str] = []
        while j < len(segments) and segments[j][0] is key:
            parts.append(segments[j][1])
            j += 1
        text = _WS_RE.sub(" ", "".join(parts)).strip()
        if text:
            blocks.append(TextBlock(text=text, token_count=len(text.split()), source_tag=key.tag))
        i = j
    return blocks


def _extract_links(root: DomNode, page_url: str) -> list[LinkRecord]:
    links: list[LinkRecord] = []
    for node in root.walk():
        if node.tag != "a":
            continue
        href = (node.attributes.get("href") or "").strip()
        if not href or href.lower().startswith(SKIPPED_LINK_SCHEMES):
            continue
        target = urljoin(page_url, href)
        if urlparse(target).scheme not in ("http", "https"):
            continue
        links.append(
            LinkRecord(
                target=target,
                anchor_text=node.subtree_text(),
                internal=same_registrable_domain(target, page_url),
            )
        )
    return links


def _extract_media(root: DomNode) -> dict[str, int]:
    counts = {kind: 0 for kind in MEDIA_KINDS}
    for node in root.walk():
        kind = _MEDIA_TAG_KIND.get(node.tag)
        if kind:
            counts[kind] += 1
    return counts


def _extract_meta_items(root: DomNode) -> frozenset[str]:
    present: set[str] = set()
    for node in root.walk():
        if node.tag == "title" and node.subtree_text():
            present.add("title")
        elif node.tag == "link":
            if (node.attributes.get("rel") or "").strip().lower() == "canonical" and node.attributes.get("href"):
                present.add("canonical")
        elif node.tag == "meta":
            attrs = node.attributes
            if "charset" in attrs:
                present.add("charset")
            if "charset" in (attrs.get("content") or "").lower() and (
                (attrs.get("http-equiv") or "").lower() == "content-type"
            ):
                present.add("charset")
            name = (attrs.get("name") or attrs.get("property") or "").strip().lower()
            content = (attrs.get("content") or "").strip()
            if not name or not content:
                continue
            if name == "description":
                present.add("meta-description")
            elif name == "keywords":
                present.add("meta-keywords")
            elif name in ("robots", "viewport", "author", "twitter:card", "og:title", "og:description", "og:image"):
                present.add(name)
    return frozenset(present)


def parse_html(raw_bytes: bytes, base_url: str) -> PageDocument:
    """Parse raw HTML bytes into a PageDocument.

    Raises InvalidBaseUrl when base_url is not absolute and EmptyDocument
    when neither an element nor visible text can be recovered.
    """
    if not urlparse(base_url).scheme:
        raise InvalidBaseUrl(f"base URL must be absolute: {base_url!r}")

    builder = _TreeBuilder()
    builder.feed(_decode(raw_bytes))
    builder.close()

    root = _assemble_root(builder.top)
    if root is None:
        raise EmptyDocument(f"nothing recoverable from {len(raw_bytes)} input bytes")
    _assign_depths(root)

    return PageDocument(
        url=base_url,
        dom_root=root,
        text_blocks=_extract_blocks(root),
        links=_extract_links(root, base_url),
        meta_items=_extract_meta_items(root),
        media_counts=_extract_media(root),
    )


def visible_text(doc: PageDocument) -> str:
    """Text blocks joined by single newlines; script/style/head content excluded."""
    return "\n".join(block.text for block in doc.text_blocks)


# --- serialization ---


def to_html(doc: PageDocument) -> str:
    """Re-serialize the element tree (no doctype; entity-escaped text)."""
    out: list[str] = []
    stack: list = [doc.dom_root]  # DomNode to open, or a pre-rendered string
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        attrs = "".join(
            f' {name}="{html_mod.escape(value, quote=True)}"'
            for name, value in item.attributes.items()
        )
        out.append(f"<{item.tag}{attrs}>")
        if item.tag in VOID_TAGS:
            continue
        stack.append(f"</{item.tag}>")
        raw = item.tag in RAW_TEXT_TAGS
        for child in reversed(item.content):
            if isinstance(child, DomNode):
                stack.append(child)
            else:
                stack.append(child if raw else html_mod.escape(child, quote=False))
    return "".join(out)


def _node_to_json(node: DomNode) -> dict:
    return {
        "tag": node.tag,
        "depth": node.depth,
        "attributes": dict(sorted(node.attributes.items())),
        "content": [
            _node_to_json(item) if isinstance(item, DomNode) else {"text": item}
            for item in node.content
        ],
    }


def _node_from_json(obj: dict) -> DomNode:
    node = DomNode(tag=obj["tag"], attributes=dict(obj.get("attributes", {})))
    for item in obj.get("content", []):
        if "tag" in item:
            node.content.append(_node_from_json(item))
        else:
            node.content.append(item.get("text", ""))
    return node


def to_json(doc: PageDocument, indent: int | None = 2) -> str:
    """Canonical JSON form of a PageDocument (debugging interface)."""
    obj = {
        "schema_version": JSON_SCHEMA_VERSION,
        "url": doc.url,
        "text_blocks": [
            {"text": b.text, "token_count": b.token_count, "source_tag": b.source_tag}
            for b in doc.text_blocks
        ],
        "links": [
            {"target": l.target, "anchor_text": l.anchor_text, "internal": l.internal}
            for l in doc.links
        ],
        "meta_items": sorted(doc.meta_items),
        "media_counts": {k: doc.media_counts.get(k, 0) for k in MEDIA_KINDS},
        "dom": _node_to_json(doc.dom_root),
    }
    return json.dumps(obj, indent=indent, ensure_ascii=False)


def from_json(text: str) -> PageDocument:
    """Rebuild a PageDocument from its JSON form.

    Derived views (blocks, links, meta, media) are recomputed from the stored
    tree so that every type invariant holds by construction.
    """
    obj = json.loads(text)
    root = _node_from_json(obj["dom"])
    _assign_depths(root)
    url = obj["url"]
    return PageDocument(
        url=url,
        dom_root=root,
        text_blocks=_extract_blocks(root),
        links=_extract_links(root, url),
        meta_items=_extract_meta_items(root),
        media_counts=_extract_media(root),
    )
