"""Command-line entry point.

Exit codes: 0 on success, 1 on bad input (unreadable or malformed files,
unknown options values), 2 on anything else.
"""
from __future__ import annotations

import argparse
import json
import sys
import traceback
import warnings
from zoneinfo import ZoneInfoNotFoundError

from . import __version__
from .affect import correlate_pleasure_sentiment, emotion_matrix, sweep_smell_sentiment
from .chroma import DEFAULT_MIN_PHOTOS, color_associations, color_matrix, count_cooccurrences, export_bipartite
from .errors import InputError, SmellscapeError
from .geo import DEFAULT_MAX_DIST_M, CountTable, aggregate, build_index
from .ingest import Dataset, read_dataset
from .lexicon import Lexicons, normalize
from .report import (DEFAULT_SWEEP, export_geojson, provenance, validate_pollution,
                     validate_venues, write_csv, write_json)
from .smellmetrics import (DEFAULT_MIN_TAGS, month_report, pleasure_months, pleasure_segments,
                           seasonality_by_category, distinctiveness_ranking)
from .taxonomy import build_graph, cluster, describe_clusters, modularity


def _lexicons(args) -> Lexicons:
    return Lexicons.load(getattr(args, "smell_dict", None), getattr(args, "affect_dict", None),
                         getattr(args, "color_dict", None), getattr(args, "pleasant_list", None))


def _lexicon_inputs(args):
    return {"smell_dict": getattr(args, "smell_dict", None),
            "affect_dict": getattr(args, "affect_dict", None),
            "color_dict": getattr(args, "color_dict", None),
            "pleasant_list": getattr(args, "pleasant_list", None)}


def _sweep(text):
    if ":" in text:
        lo, hi, step = (int(v) for v in text.split(":"))
        return list(range(lo, hi + 1, step))
    return [int(v) for v in text.split(",")]


def _emit(args, header, rows, inputs, params):
    write_csv(args.out or "-", header, rows, provenance(inputs, params))


# -- subcommands --------------------------------------------------------------------------

def cmd_ingest(args):
    ds, report = read_dataset(args.records, args.streets, args.pollutants, args.venues,
                              args.timezone, args.records_format, args.text_ngrams)
    ds.save(args.out)
    if args.rejects:
        write_json(args.rejects, report, provenance(
            {"records": args.records, "streets": args.streets,
             "pollutants": args.pollutants, "venues": args.venues},
            {"timezone": args.timezone, "records_format": args.records_format,
             "text_ngrams": args.text_ngrams}))
    rec = report["records"]
    print(f"records: {rec['accepted']} accepted, {rec['rejected']} rejected; "
          f"segments: {report['segments']['accepted']}", file=sys.stderr)


def cmd_map(args):
    ds = Dataset.load(args.dataset)
    index = build_index(ds.segments)
    tallies = aggregate(ds.records, index, _lexicons(args), args.max_dist, ds.timezone,
                        dedup_tags=not args.keep_duplicates, workers=args.workers,
                        chunk_size=args.chunk_size)
    tallies.save(args.out)
    rep = tallies.report
    print(f"snapped {rep.get('snapped', 0)} of {rep.get('records', 0)} records", file=sys.stderr)


def cmd_seasonality(args):
    rows = []
    tables = [CountTable.load(p) for p in args.tallies]
    labels = args.label or [f"city{k + 1}" for k in range(len(tables))]
    if len(labels) != len(tables):
        raise InputError("--label must be given once per --tallies")
    groups = list(zip(labels, tables))
    if len(tables) > 1:
        groups.append(("pooled", CountTable.concat(tables).group("segment", "month")))
    for label, table in groups:
        for name, r in seasonality_by_category(table, args.lag, args.level).items():
            rows.append((label, name, r))
    _emit(args, ["city", "category", "value"], rows,
          {f"tallies{k}": p for k, p in enumerate(args.tallies)},
          {"lag": args.lag, "level": args.level})


def cmd_pleasantness(args):
    table = CountTable.load(args.tallies)
    if args.by == "month":
        rows = sorted(pleasure_months(table, args.per_year).items())
        header = ["month", "z_pleasure"]
    else:
        rows = sorted(pleasure_segments(table, args.min_tags).items())
        header = ["segment_id", "z_pleasure"]
    _emit(args, header, rows, {"tallies": args.tallies},
          {"by": args.by, "min_tags": args.min_tags, "per_year": args.per_year})


def cmd_month_report(args):
    table = CountTable.load(args.tallies)
    coords = {}
    if args.dataset:
        for s in Dataset.load(args.dataset).segments:
            mid = s.polyline[len(s.polyline) // 2]
            coords[s.id] = mid
    entropy = dict(distinctiveness_ranking(table, level=args.level))
    rows = []
    for t, smell, seg in month_report(table, args.min_tags, args.level):
        lat, lon = coords.get(seg, (None, None))
        rows.append((t, smell or "NA", seg or "NA", lat, lon, entropy.get(t)))
    _emit(args, ["month", "smell", "segment_id", "lat", "lon", "entropy"], rows,
          {"tallies": args.tallies, "dataset": args.dataset},
          {"min_tags": args.min_tags, "level": args.level})


def cmd_emotions(args):
    table = CountTable.load(args.tallies)
    method = "spearman" if args.spearman else "pearson"
    cats, emos, mat = emotion_matrix(table, args.min_tags, method)
    params = {"min_tags": args.min_tags, "method": method, "sweep": args.sweep}
    _emit(args, ["category", *emos], [(c, *row) for c, row in zip(cats, mat)],
          {"tallies": args.tallies}, params)
    if args.sweep_out:
        rows = []
        for t, res in sweep_smell_sentiment(table, args.sweep):
            for c in cats:
                rows.append((t, res["n"], c, res["pearson"][c], res["spearman"][c]))
        write_csv(args.sweep_out, ["min_tags", "n", "category", "pearson", "spearman"], rows,
                  provenance({"tallies": args.tallies}, params))
    if args.coupling_out:
        rows = correlate_pleasure_sentiment(table, args.sweep)
        write_csv(args.coupling_out, ["min_tags", "n", "spearman", "pearson"], rows,
                  provenance({"tallies": args.tallies}, params))


def cmd_colors(args):
    lex = _lexicons(args)
    ds = Dataset.load(args.dataset)
    counts = count_cooccurrences(ds.records, lex)
    assoc = color_associations(counts, lex.smell, args.min_photos)
    cats, colors, mat = color_matrix(assoc)
    ent = {c.category: c.entropy for c in assoc.categories.values()}
    inputs = {"dataset": args.dataset, **_lexicon_inputs(args)}
    params = {"min_photos": args.min_photos}
    _emit(args, ["category", *colors, "entropy"],
          [(c, *row, ent[c]) for c, row in zip(cats, mat)], inputs, params)
    if args.graph:
        write_json(args.graph, export_bipartite(assoc, cats), provenance(inputs, params))


def cmd_taxonomy(args):
    if args.action != "build":
        raise InputError(f"unknown taxonomy action {args.action!r}")
    ds, _ = read_dataset(records=args.records, records_format=args.records_format)
    with open(args.vocab, encoding="utf-8") as fh:
        vocab = [normalize(line.split(",")[0]) for line in fh if line.strip() and not line.startswith("#")]
    graph = build_graph(ds.records, vocab)
    parts = cluster(graph, args.resolution, args.seed)
    doc = {"clusters": describe_clusters(graph, parts, args.top),
           "modularity": modularity(graph, parts, args.resolution),
           "n_nodes": len(graph.nodes), "n_edges": len(graph.weights)}
    write_json(args.out, doc, provenance({"records": args.records, "vocab": args.vocab},
                                         {"resolution": args.resolution, "seed": args.seed}))


def cmd_validate(args):
    table = CountTable.load(args.tallies)
    ds = Dataset.load(args.dataset)
    sweep = _sweep(args.sweep)
    params = {"study": args.study, "sweep": sweep, "buffer_m": args.buffer_m}
    inputs = {"tallies": args.tallies, "dataset": args.dataset}
    if args.study == "pollution":
        rows = validate_pollution(table, ds.pollutants, ds.segments, sweep, args.buffer_m)
        _emit(args, ["min_tags", "pollutant", "category", "method", "n", "spearman"], rows, inputs, params)
    else:
        index = build_index(ds.segments)
        rows = validate_venues(table, ds.venues, index, sweep, args.max_dist)
        _emit(args, ["min_tags", "kind", "category", "n", "pearson", "spearman"], rows, inputs, params)


def cmd_export(args):
    table = CountTable.load(args.tallies)
    ds = Dataset.load(args.dataset)
    assoc = None
    if args.colored:
        lex = _lexicons(args)
        assoc = color_associations(count_cooccurrences(ds.records, lex), lex.smell, args.min_photos)
    doc = export_geojson(table, ds.segments, args.layer, args.min_tags, assoc)
    write_json(args.out, doc, provenance({"tallies": args.tallies, "dataset": args.dataset},
                                         {"layer": args.layer, "min_tags": args.min_tags}))


# -- parser -------------------------------------------------------------------------------

def _lexicon_flags(p):
    p.add_argument("--smell-dict", help="smell dictionary CSV (category,subcategory,word)")
    p.add_argument("--affect-dict", help="affect lexicon CSV (word,polarity,emotions)")
    p.add_argument("--color-dict", help="color term CSV (nuance,canonical)")
    p.add_argument("--pleasant-list", help="pleasantness CSV (word,class)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smellscape", description="Urban smellscape metrics from tagged photos.")
    ap.add_argument("--version", action="version", version=f"smellscape {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse raw inputs into a dataset snapshot")
    p.add_argument("--records")
    p.add_argument("--records-format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--text-ngrams", type=int, default=0, help="extract n-grams up to this length from free text")
    p.add_argument("--streets", required=True)
    p.add_argument("--pollutants")
    p.add_argument("--venues")
    p.add_argument("--timezone", default="UTC")
    p.add_argument("--rejects", help="write the rejects report (JSON) here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("map", help="snap records to segments and tally")
    p.add_argument("--dataset", required=True)
    p.add_argument("--max-dist", type=float, default=DEFAULT_MAX_DIST_M)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--chunk-size", type=int, default=50_000, help="records per worker task")
    p.add_argument("--keep-duplicates", action="store_true", help="count repeated tags on a record")
    p.add_argument("--out", required=True)
    _lexicon_flags(p)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("seasonality", help="lag autocorrelation per smell category")
    p.add_argument("--tallies", action="append", required=True, help="repeat for several cities")
    p.add_argument("--label", action="append")
    p.add_argument("--lag", type=int, default=12)
    p.add_argument("--level", choices=("category", "subcategory"), default="category")
    p.add_argument("--out")
    p.set_defaults(func=cmd_seasonality)

    p = sub.add_parser("pleasantness", help="pleasantness scores by month or segment")
    p.add_argument("--tallies", required=True)
    p.add_argument("--by", choices=("month", "segment"), default="segment")
    p.add_argument("--per-year", action="store_true")
    p.add_argument("--min-tags", type=int, default=DEFAULT_MIN_TAGS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pleasantness)

    p = sub.add_parser("month-report", help="smell of the month and where to find it")
    p.add_argument("--tallies", required=True)
    p.add_argument("--dataset", help="adds segment coordinates")
    p.add_argument("--min-tags", type=int, default=DEFAULT_MIN_TAGS)
    p.add_argument("--level", choices=("category", "subcategory"), default="category")
    p.add_argument("--out")
    p.set_defaults(func=cmd_month_report)

    p = sub.add_parser("emotions", help="smell x emotion correlation matrix")
    p.add_argument("--tallies", required=True)
    p.add_argument("--min-tags", type=int, default=DEFAULT_MIN_TAGS)
    p.add_argument("--sweep", default="10:300:10")
    p.add_argument("--spearman", action="store_true", help="Spearman instead of Pearson")
    p.add_argument("--sweep-out", help="smell vs sentiment correlations per threshold")
    p.add_argument("--coupling-out", help="pleasure vs sentiment correlation per threshold")
    p.add_argument("--out")
    p.set_defaults(func=cmd_emotions)

    p = sub.add_parser("colors", help="smell category x color strengths")
    p.add_argument("--dataset", required=True)
    p.add_argument("--min-photos", type=int, default=DEFAULT_MIN_PHOTOS)
    p.add_argument("--graph", help="bipartite graph JSON")
    p.add_argument("--out")
    _lexicon_flags(p)
    p.set_defaults(func=cmd_colors)

    p = sub.add_parser("taxonomy", help="cluster smell words by co-occurrence")
    p.add_argument("action", choices=("build",))
    p.add_argument("--records", required=True)
    p.add_argument("--records-format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--vocab", required=True, help="one word per line (first CSV column)")
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_taxonomy)

    p = sub.add_parser("validate", help="pollution or venue validation studies")
    p.add_argument("study", choices=("pollution", "venues"))
    p.add_argument("--tallies", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--sweep", default=",".join(map(str, DEFAULT_SWEEP)))
    p.add_argument("--buffer-m", type=float, help="density per corridor area instead of per meter")
    p.add_argument("--max-dist", type=float, default=DEFAULT_MAX_DIST_M)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("export", help="GeoJSON map layer")
    p.add_argument("--tallies", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--layer", default="pleasure",
                   help="pleasure, sentiment, smell:<category> or emotion:<emotion>")
    p.add_argument("--min-tags", type=int, default=DEFAULT_MIN_TAGS)
    p.add_argument("--colored", action="store_true", help="draw smell layers in their dominant color")
    p.add_argument("--min-photos", type=int, default=DEFAULT_MIN_PHOTOS)
    p.add_argument("--out", required=True)
    _lexicon_flags(p)
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args)
    except (InputError, OSError, json.JSONDecodeError, ZoneInfoNotFoundError, SmellscapeError) as exc:
        print(f"smellscape: error: {exc}", file=sys.stderr)
        return 1
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
