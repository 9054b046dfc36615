#!/usr/bin/env python3
"""Parse messy real-world HTML and profile it.

The parser never rejects malformed markup: it auto-closes dangling tags,
ignores stray closers, and synthesizes the html/body skeleton when a page
omits it. From the normalized model we compute the eight features that
separate pages promoted by AI search frontends from pages they demote.
"""

from seoaudit.features import extract_features
from seoaudit.page import parse_html, to_json, visible_text

MESSY_PAGE = b"""
<html>
<head>
  <title>Glowmore Desk Lamp</title>
  <meta name="description" content="A quiet, adjustable desk lamp.">
  <meta charset="utf-8">
<body>
  <h1>Glowmore Desk Lamp
  <p>The Glowmore pairs a warm glow with a compact base.
  <p>Reviewers call it <b>dependable</b> and easy to live with.
  <div>Setup takes two minutes: unbox, clip, plug in.
  <img src="lamp-front.png" alt="front view">
  <img src="lamp-side.png">
  <a href="/specs">full specifications</a>
  <a href="https://retailer.example/buy">buy from a retailer</a>
  <script>trackPageview();</script>
"""

doc = parse_html(MESSY_PAGE, "https://glowmore.example.test/")

print("== visible text (script content excluded) ==")
print(visible_text(doc))

print("\n== text blocks, each tied to its enclosing block element ==")
for block in doc.text_blocks:
    print(f"  <{block.source_tag}> {block.token_count:2d} tokens: {block.text[:50]}")

print("\n== links, classified by registrable domain ==")
for link in doc.links:
    kind = "internal" if link.internal else "external"
    print(f"  [{kind}] {link.target}  ({link.anchor_text!r})")

print("\n== the eight-feature profile ==")
for name, value in extract_features(doc).to_dict().items():
    print(f"  {name:20s} {value}")

print("\n== canonical JSON (first 300 chars) ==")
print(to_json(doc)[:300], "...")
