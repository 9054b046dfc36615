"""Command-line interface.

Subcommands: detect, features, attackgen, index, sim, bench, attack-eval,
rank-shift, rewrite-dist, report. Exit codes: 0 success, 1 usage error,
2 data error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import attackgen as ag
from .detectors import (
    AttackType,
    AuthorityList,
    Hop,
    HotwordList,
    QueryClass,
    RedirectChain,
    RedirectMechanism,
    SiteStats,
    cloaking_similarities,
    detect_cloaking,
    detect_keyword_stuffing,
    detect_link_farm,
    detect_redirection,
    detect_semantic_confusion,
)
from .errors import IoFailure, SchemaError, SeoAuditError
from .features import extract_features, group_differences
from .harness import (
    BenchDataset,
    build_resilience_report,
    emit_report,
    report_from_dict,
    run_attack_eval,
    run_bench,
    write_atomic,
)
from .metrics import (
    QuerySitePair,
    bucketize,
    dump_traces,
    load_traces,
    rank_shift,
    rewrite_distance,
)
from .page import SnapshotPair, parse_html, to_json
from .pipeline import CorpusIndex, PipelineConfig, run_pipeline
from .textscore import BagOfWordsScorer

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="seoaudit", description=__doc__)
    parser.add_argument("--config", help="pipeline config JSON file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--jobs", type=int, default=1, help="worker pool size for batch runs")
    parser.add_argument(
        "--format", choices=("json", "csv", "markdown"), default="json", help="report output format"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", help="eight-feature profiles for pages")
    p.add_argument("path", nargs="?", help="HTML file or directory tree")
    p.add_argument("--base-url", help="URL assigned to parsed files (default: file:// path)")
    p.add_argument("--group-diff", nargs=2, metavar=("UP", "DOWN"), help="two feature JSONL files")
    p.add_argument(
        "--emit-page-json",
        action="store_true",
        help="emit the full parsed-page JSON instead of feature records",
    )
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("detect", help="run one black-hat SEO detector over case files")
    p.add_argument("--type", required=True, choices=[t.value for t in AttackType])
    p.add_argument("--input", required=True, nargs="+", help="JSON case file(s)")
    p.add_argument("--scorer", help="text scorer corpus manifest JSON")
    p.add_argument("--hotwords", help="newline-delimited hotword phrases")
    p.add_argument("--authority", help="rank,domain authority list file")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("attackgen", help="generate an adversarial page corpus")
    p.add_argument("--spec", help="corpus spec JSON file")
    p.add_argument("--out", help="output directory (overrides spec)")
    p.add_argument("--count", type=int, help="sites per technique (overrides spec)")
    p.add_argument("--base-url", help="corpus base URL (overrides spec)")
    p.add_argument("--force", action="store_true", help="overwrite a non-empty output dir")
    p.set_defaults(func=_cmd_attackgen)

    p = sub.add_parser("index", help="build a corpus index file")
    p.add_argument("--corpus", required=True, help="directory of HTML files")
    p.add_argument("--out", required=True, help="index JSON output path")
    p.add_argument("--scorer", help="text scorer corpus manifest JSON")
    p.add_argument("--base-url", help="URL prefix for files without a manifest")
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("sim", help="run one query through the pipeline")
    p.add_argument("--query", required=True)
    p.add_argument("--corpus", help="corpus directory to index on the fly")
    p.add_argument("--index", dest="index_file", help="previously built index JSON")
    p.add_argument("--target", default="https://target.invalid/", help="target URL for the trace")
    p.add_argument("--query-class", default="benign", choices=[c.value for c in QueryClass])
    p.add_argument("--attack-type", default="semantic_confusion", choices=[t.value for t in AttackType])
    p.add_argument("--scorer", help="text scorer corpus manifest JSON")
    p.set_defaults(func=_cmd_sim)

    p = sub.add_parser("bench", help="run a dataset through the pipeline and report resilience")
    p.add_argument("--dataset", required=True, help="QuerySitePair JSONL file")
    p.add_argument("--corpus", help="corpus directory to index on the fly")
    p.add_argument("--index", dest="index_file", help="previously built index JSON")
    p.add_argument("--scorer", help="text scorer corpus manifest JSON")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--traces-out", help="also dump raw traces as JSONL")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("attack-eval", help="score an adversarial corpus per technique")
    p.add_argument("--corpus", required=True, help="attackgen corpus directory")
    p.add_argument("--query", required=True, help="product query")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--scorer", help="text scorer corpus manifest JSON")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=_cmd_attack_eval)

    p = sub.add_parser("rank-shift", help="relative rank changes between two ranked URL lists")
    p.add_argument("--google", required=True, help="newline-delimited URL list")
    p.add_argument("--llm", required=True, help="newline-delimited URL list")
    p.set_defaults(func=_cmd_rank_shift)

    p = sub.add_parser("rewrite-dist", help="semantic/syntactic distance of query rewrites")
    p.add_argument("--original")
    p.add_argument("--rewritten")
    p.add_argument("--pairs", help="JSONL of {original, rewritten, success}")
    p.add_argument("--buckets", action="store_true", help="emit the bucketized success table")
    p.set_defaults(func=_cmd_rewrite_dist)

    p = sub.add_parser("report", help="re-render a stored report or raw traces")
    p.add_argument("--in", dest="input", help="report JSON file")
    p.add_argument("--traces", help="PhaseTrace JSONL file to aggregate")
    p.set_defaults(func=_cmd_report)

    return parser


def _load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _load_scorer(path: str | None):
    return BagOfWordsScorer.from_file(path) if path else None


def _emit(args, text: str, out: str | None = None) -> None:
    if out:
        write_atomic(out, text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _iter_html_files(path: Path):
    if path.is_file():
        yield path
    else:
        yield from sorted(path.rglob("*.html"))


# --- subcommands ---


def _cmd_features(args) -> int:
    if args.group_diff:
        from .features import FeatureVector

        def load(path):
            return [
                FeatureVector.from_dict(json.loads(line))
                for line in Path(path).read_text("utf-8").splitlines()
                if line.strip()
            ]

        rows = group_differences(load(args.group_diff[0]), load(args.group_diff[1]))
        if args.format == "markdown":
            lines = ["| Feature | Avg. (Up) | Avg. (Down) | Difference | P-value |", "|---|---|---|---|---|"]
            for r in rows:
                lines.append(
                    f"| {r.feature} | {r.mean_up:.4g} | {r.mean_down:.4g} | "
                    f"{r.difference_pct:+.2f}% | {r.p_value:.4f} |"
                )
            print("\n".join(lines))
        elif args.format == "csv":
            print("feature,mean_up,mean_down,difference_pct,p_value")
            for r in rows:
                print(f"{r.feature},{r.mean_up!r},{r.mean_down!r},{r.difference_pct!r},{r.p_value!r}")
        else:
            print(json.dumps([vars(r) for r in rows], indent=2))
        return EXIT_OK

    if not args.path:
        raise SchemaError("features needs a path or --group-diff")
    root = Path(args.path)
    if not root.exists():
        raise FileNotFoundError(f"no such file or directory: {root}")
    for html_path in _iter_html_files(root):
        if args.base_url:
            rel = html_path.name if root.is_file() else html_path.relative_to(root).as_posix()
            url = f"{args.base_url.rstrip('/')}/{rel}"
        else:
            url = html_path.resolve().as_uri()
        doc = parse_html(html_path.read_bytes(), url)
        if args.emit_page_json:
            print(to_json(doc, indent=None))
        else:
            record = {"url": url, **extract_features(doc).to_dict()}
            print(json.dumps(record, ensure_ascii=False))
    return EXIT_OK


def _read_case(path: str) -> tuple[dict, Path]:
    case_path = Path(path)
    return json.loads(case_path.read_text("utf-8")), case_path.parent


def _case_html(case: dict, key: str, base_dir: Path, url: str):
    html_path = base_dir / case[key]
    return parse_html(html_path.read_bytes(), url)


def _cmd_detect(args) -> int:
    attack = AttackType(args.type)
    scorer = _load_scorer(args.scorer)
    for case_file in args.input:
        case, base_dir = _read_case(case_file)
        if attack == AttackType.SEMANTIC_CONFUSION:
            if scorer is None:
                raise SchemaError("semantic_confusion detection needs --scorer")
            doc = _case_html(case, "html_path", base_dir, case.get("url", "https://case.invalid/"))
            verdict = detect_semantic_confusion(doc, scorer)
        elif attack == AttackType.CLOAKING:
            url = case.get("url", "https://case.invalid/")
            pair = SnapshotPair(
                crawler_view=_case_html(case, "crawler_html_path", base_dir, url),
                user_view=_case_html(case, "user_html_path", base_dir, url),
            )
            evidence = cloaking_similarities(pair, case.get("serp_summary", ""))
            verdict = detect_cloaking(evidence)
        elif attack == AttackType.KEYWORD_STUFFING:
            if not args.hotwords:
                raise SchemaError("keyword_stuffing detection needs --hotwords")
            doc = _case_html(case, "html_path", base_dir, case.get("url", "https://case.invalid/"))
            site = SiteStats(
                domain=case.get("domain", ""),
                subpage_count=int(case.get("subpage_count", 0)),
                spam_subpage_count=int(case.get("spam_subpage_count", 0)),
            )
            verdict = detect_keyword_stuffing(doc, HotwordList.from_file(args.hotwords), site)
        elif attack == AttackType.LINK_FARM:
            verdict = detect_link_farm(
                set(case["visit_a"]), set(case["visit_b"]), bool(case.get("wildcard_dns", False))
            )
        else:  # redirection
            if scorer is None or not args.authority:
                raise SchemaError("redirection detection needs --scorer and --authority")
            hops = [
                Hop(h["url"], RedirectMechanism(h["mechanism"]) if h.get("mechanism") else None)
                for h in case["hops"]
            ]
            chain = RedirectChain(
                hops=hops, origin_query_class=QueryClass(case.get("origin_query_class", "benign"))
            )
            landing = _case_html(case, "landing_html_path", base_dir, chain.final_url)
            verdict = detect_redirection(chain, AuthorityList.from_file(args.authority), scorer, landing)
        print(json.dumps(verdict.to_dict(), ensure_ascii=False))
    return EXIT_OK


def _cmd_attackgen(args) -> int:
    if args.spec:
        spec = ag.CorpusSpec.from_file(args.spec)
    else:
        if not args.out:
            raise SchemaError("attackgen needs --spec or --out")
        spec = ag.CorpusSpec(out_dir=args.out)
    if args.out:
        spec = replace(spec, out_dir=args.out)
    if args.count:
        spec = replace(spec, sites_per_technique=args.count)
    if args.base_url:
        spec = replace(spec, base_url=args.base_url)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.force:
        spec = replace(spec, force=True)
    manifest = ag.build_corpus(spec)
    summary = {
        "out_dir": str(spec.out_dir),
        "pages": len(manifest["pages"]),
        "techniques": manifest["techniques"],
        "sites_per_technique": manifest["sites_per_technique"],
        "seed": manifest["seed"],
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_index(args) -> int:
    scorer = _load_scorer(args.scorer)
    index = CorpusIndex.build_from_directory(args.corpus, scorer=scorer, base_url=args.base_url)
    index.save(args.out)
    print(json.dumps({"docs": index.doc_count, "out": args.out}))
    return EXIT_OK


def _load_index(args, scorer=None) -> CorpusIndex:
    if getattr(args, "index_file", None):
        return CorpusIndex.load(args.index_file)
    if getattr(args, "corpus", None):
        return CorpusIndex.build_from_directory(args.corpus, scorer=scorer)
    raise SchemaError("need --index or --corpus")


def _cmd_sim(args) -> int:
    cfg = _load_config(args)
    scorer = _load_scorer(args.scorer)
    index = _load_index(args, scorer)
    pair = QuerySitePair(
        query=args.query,
        query_class=QueryClass(args.query_class),
        target_url=args.target,
        attack_type=AttackType(args.attack_type),
    )
    trace = run_pipeline(pair, index, cfg)
    print(json.dumps(trace.to_dict(), indent=2, ensure_ascii=False))
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = _load_config(args)
    scorer = _load_scorer(args.scorer)
    dataset = BenchDataset.load(args.dataset)
    index = _load_index(args, scorer)
    report = run_bench(dataset, index, cfg, trials=args.trials, jobs=args.jobs)
    if args.traces_out:
        work = [pair for _ in range(max(args.trials, 1)) for pair in dataset.pairs]
        dump_traces([run_pipeline(p, index, cfg) for p in work], args.traces_out)
    _emit(args, emit_report(report, args.format), args.out)
    return EXIT_OK


def _cmd_attack_eval(args) -> int:
    cfg = _load_config(args)
    scorer = _load_scorer(args.scorer)
    index = CorpusIndex.build_from_directory(args.corpus, scorer=scorer)
    report = run_attack_eval(args.corpus, args.query, index, cfg, trials=args.trials)
    _emit(args, emit_report(report, args.format), args.out)
    return EXIT_OK


def _cmd_rank_shift(args) -> int:
    def load_list(path):
        return [line.strip() for line in Path(path).read_text("utf-8").splitlines() if line.strip()]

    records = rank_shift(load_list(args.google), load_list(args.llm))
    if args.format == "markdown":
        lines = ["| URL | Rel. rank (engine) | Rel. rank (AI) | Delta | Direction |", "|---|---|---|---|---|"]
        for r in records:
            lines.append(f"| {r.url} | {r.rank_google_rel} | {r.rank_llm_rel} | {r.delta:+d} | {r.direction} |")
        print("\n".join(lines))
    elif args.format == "csv":
        print("url,rank_google_rel,rank_llm_rel,delta,direction")
        for r in records:
            print(f"{r.url},{r.rank_google_rel},{r.rank_llm_rel},{r.delta},{r.direction}")
    else:
        for r in records:
            print(json.dumps({**vars(r), "direction": r.direction}, ensure_ascii=False))
    return EXIT_OK


def _cmd_rewrite_dist(args) -> int:
    if args.pairs:
        records = []
        for line in Path(args.pairs).read_text("utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            dist = rewrite_distance(obj["original"], obj["rewritten"])
            records.append((dist, bool(obj.get("success", False)), obj))
        if args.buckets:
            table = bucketize([(d, s) for d, s, _ in records])
            if args.format == "markdown":
                print(table.to_markdown())
            else:
                print(json.dumps(table.to_dict(), indent=2))
        else:
            for dist, success, obj in records:
                print(
                    json.dumps(
                        {"original": obj["original"], "rewritten": obj["rewritten"], "std": dist.std, "ed": dist.ed, "success": success},
                        ensure_ascii=False,
                    )
                )
        return EXIT_OK
    if args.original is None or args.rewritten is None:
        raise SchemaError("rewrite-dist needs --original and --rewritten, or --pairs")
    dist = rewrite_distance(args.original, args.rewritten)
    print(json.dumps({"std": dist.std, "ed": dist.ed}))
    return EXIT_OK


def _cmd_report(args) -> int:
    if args.traces:
        report = build_resilience_report(load_traces(args.traces))
    elif args.input:
        report = report_from_dict(json.loads(Path(args.input).read_text("utf-8")))
    else:
        raise SchemaError("report needs --in or --traces")
    print(emit_report(report, args.format))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IoFailure as exc:
        print(f"seoaudit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"seoaudit: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SeoAuditError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"seoaudit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
