"""Command-line entry point: ``drgkit <command> [options]``.

Exit status is 0 on success, 1 on a usage error and 2 on a data error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from contextlib import contextmanager

from .clausal import parse_clf, serialize_clf, validate
from .encoding import ALIASES, ENCODINGS, decode
from .estimators import DrgEncoder, DrgMatcher
from .exceptions import DrgkitError
from .graph import from_interchange, write_jsonl
from .lattice import ConceptLattice
from .matching import SearchBudget, clause_counts, fscore

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

# encoding pairs whose edge savings `stats` reports: (from, to)
REDUCTION_PAIRS = (
    ("fork-breif-creif", "fork-breif-cedge"),
    ("fork-breif-cedge", "fork-breif-cref"),
    ("fork-bnode-cnode", "fork-bnode-cedge"),
    ("fork-bnode-cedge", "fork-bnode-cref"),
    ("chain-bnode-cedge", "chain-bnode-cref"),
    ("chainlab-bnode-cedge", "chainlab-bnode-cref"),
    ("chain-bnode-cref", "chain-bnode-cref-implicit"),
    ("chainlab-bnode-cref", "chainlab-bnode-cref-implicit"),
)


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_workers():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser():
    parser = _Parser(prog="drgkit", description="Convert clausal DRSs to graphs and score them.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    def io(p, default_input="-"):
        p.add_argument("--input", default=default_input, help="input file ('-' for stdin)")
        p.add_argument("--output", default="-", help="output file ('-' for stdout)")

    def hypernyms(p):
        p.add_argument("--hypernyms", help="child<TAB>parent file (default: $DRGKIT_HYPERNYMS or bundled)")

    p = add("convert", "clausal form -> JSON-lines graphs")
    p.add_argument("--encoding", required=True, choices=list(ENCODINGS))
    io(p)
    hypernyms(p)

    p = add("decode", "JSON-lines graphs -> clausal form")
    p.add_argument("--encoding", choices=list(ENCODINGS), help="override the encoding named in each graph")
    io(p)

    for name, help_ in (("score", "score system graphs against gold graphs"),
                        ("score-clf", "clause-level scoring of two clausal-form files")):
        p = add(name, help_)
        p.add_argument("--gold", required=True)
        p.add_argument("--system", required=True)
        p.add_argument("--output", default="-")
        p.add_argument("--seed", type=int, default=0)
        if name == "score":
            p.add_argument("--workers", type=_positive_int, default=None)
            p.add_argument("--max-expansions", type=_positive_int, default=SearchBudget.max_expansions)
            p.add_argument("--max-pairs", type=_positive_int, default=SearchBudget.max_candidate_pairs)
            p.add_argument("--anchors", action="store_true", help="credit anchor spans as items")

    p = add("validate", "report well-formedness issues of clausal DRSs")
    io(p)

    p = add("stats", "node/edge counts and edge savings across all encodings")
    io(p)
    hypernyms(p)

    p = add("list-encodings", "show the design choices behind every encoding name")
    p.add_argument("--output", default="-")
    return parser


# --------------------------------------------------------------------------
# I/O helpers

def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None


@contextmanager
def _open_output(path):
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        try:
            fh = open(path, "w", encoding="utf-8")
        except OSError as exc:
            raise DataError(f"{path}: {exc.strerror}") from None
        with fh:
            yield fh


def _read_clf(path):
    try:
        return parse_clf(_read_text(path))
    except DrgkitError as exc:
        raise DataError(f"{path}: {exc}") from None


def _read_graphs(path):
    graphs = []
    for line_no, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            graphs.append(from_interchange(line))
        except DrgkitError as exc:
            raise DataError(f"{path}, line {line_no}: {exc}") from None
    return graphs


def _lattice(args):
    path = args.hypernyms or os.environ.get("DRGKIT_HYPERNYMS") or None
    try:
        return ConceptLattice.load(path)
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None
    except DrgkitError as exc:
        raise DataError(f"{path}: {exc}") from None


def _dump_json(obj, out):
    json.dump(obj, out, ensure_ascii=False, indent=2)
    out.write("\n")


def _fmt(x):
    return f"{x:.4f}"


# --------------------------------------------------------------------------
# commands

def cmd_convert(args):
    docs = _read_clf(args.input)
    encoder = DrgEncoder(args.encoding, hypernyms=_lattice(args)).fit()
    graphs = encoder.transform(docs)
    with _open_output(args.output) as out:
        write_jsonl(graphs, out)
    nulls = [g for g in graphs if g.is_null]
    for g in nulls:
        print(f"{g.doc_id}: {g.error}", file=sys.stderr)
    print(f"{len(nulls)} null graphs", file=sys.stderr)
    return EXIT_OK


def cmd_decode(args):
    graphs = _read_graphs(args.input)
    docs, skipped = [], 0
    for g in graphs:
        if g.is_null:
            skipped += 1
            print(f"{g.doc_id}: null graph ({g.error})", file=sys.stderr)
            continue
        spec = ENCODINGS[args.encoding or g.encoding]
        try:
            docs.append(decode(g, spec))
        except DrgkitError as exc:
            raise DataError(f"{g.doc_id}: {exc}") from None
    with _open_output(args.output) as out:
        out.write(serialize_clf(docs))
    print(f"{skipped} null graphs skipped", file=sys.stderr)
    return EXIT_OK


def _score_table(report, title):
    width = max([len("document")] + [len(d["id"]) for d in report["docs"]])
    lines = [title, f"{'document':<{width}}  {'P':>6}  {'R':>6}  {'F1':>6}  exact"]
    for d in report["docs"]:
        exact = {True: "yes", False: "no", None: "-"}[d["exact"]]
        if d.get("error"):
            exact += f"  ({d['error']})"
        lines.append(f"{d['id']:<{width}}  {_fmt(d['p']):>6}  {_fmt(d['r']):>6}  {_fmt(d['f1']):>6}  {exact}")
    lines.append(f"macro-F1 {_fmt(report['macro_f1'])}")
    if "approx_rate" in report:
        lines.append(f"approximate matches {100 * report['approx_rate']:.1f}%")
    return "\n".join(lines) + "\n"


def cmd_score(args):
    gold = _read_graphs(args.gold)
    system = _read_graphs(args.system)
    workers = args.workers or _default_workers()
    matcher = DrgMatcher(
        max_expansions=args.max_expansions,
        max_candidate_pairs=args.max_pairs,
        seed=args.seed,
        workers=workers,
        anchors=args.anchors,
    )
    try:
        report = matcher.fit(gold).report(system).to_dict()
    except ValueError as exc:  # id mismatches and duplicate ids
        raise DataError(str(exc)) from None
    with _open_output(args.output) as out:
        if args.json:
            _dump_json(report, out)
        else:
            out.write(_score_table(report, "graph matching"))
    return EXIT_OK


def cmd_score_clf(args):
    gold = {d.doc_id: d for d in _read_clf(args.gold)}
    system = {d.doc_id: d for d in _read_clf(args.system)}
    stray = sorted(set(system) - set(gold))
    if stray:
        raise DataError("system documents without gold counterpart: " + ", ".join(stray))
    rows = []
    for doc_id, g in gold.items():
        s = system.get(doc_id)
        if s is None:
            rows.append({"id": doc_id, "p": 0.0, "r": 0.0, "f1": 0.0, "exact": None, "error": "missing"})
            continue
        matched, n_sys, n_gold = clause_counts(s, g, seed=args.seed)
        p, r, f = fscore(matched, n_sys, n_gold)
        rows.append({"id": doc_id, "p": p, "r": r, "f1": f, "exact": None})
    macro = math.fsum(r["f1"] for r in rows) / len(rows) if rows else 0.0
    report = {"macro_f1": macro, "docs": rows, "seed": args.seed}
    with _open_output(args.output) as out:
        if args.json:
            _dump_json(report, out)
        else:
            out.write(_score_table(report, "clause matching"))
    return EXIT_OK


def cmd_validate(args):
    docs = _read_clf(args.input)
    report = {d.doc_id: [str(i) for i in validate(d)] for d in docs}
    bad = sum(1 for issues in report.values() if issues)
    with _open_output(args.output) as out:
        if args.json:
            _dump_json({"documents": len(docs), "ill_formed": bad, "issues": report}, out)
        else:
            for doc_id, issues in report.items():
                for issue in issues:
                    out.write(f"{doc_id}: {issue}\n")
            out.write(f"{len(docs)} documents, {bad} ill-formed\n")
    return EXIT_DATA if bad else EXIT_OK


def _corpus_stats(docs, lattice):
    per_encoding = {}
    edges_by_doc = {}
    for name in ENCODINGS:
        graphs = DrgEncoder(name, hypernyms=lattice).fit().transform(docs)
        ok = [g for g in graphs if not g.is_null]
        per_encoding[name] = {
            "documents": len(graphs),
            "null_graphs": len(graphs) - len(ok),
            "nodes": sum(len(g.nodes) for g in ok),
            "edges": sum(len(g.edges) for g in ok),
            "labeled_edges": sum(1 for g in ok for e in g.edges if e.label is not None),
        }
        edges_by_doc[name] = {g.doc_id: len(g.edges) for g in ok}
    reductions = []
    for a, b in REDUCTION_PAIRS:
        common = set(edges_by_doc[a]) & set(edges_by_doc[b])
        ea = sum(edges_by_doc[a][d] for d in common)
        eb = sum(edges_by_doc[b][d] for d in common)
        reductions.append({"from": a, "to": b, "documents": len(common),
                           "reduction": (ea - eb) / ea if ea else 0.0})
    return {"encodings": per_encoding, "edge_reduction": reductions}


def cmd_stats(args):
    docs = _read_clf(args.input)
    report = _corpus_stats(docs, _lattice(args))
    with _open_output(args.output) as out:
        if args.json:
            _dump_json(report, out)
            return EXIT_OK
        width = max(len(n) for n in ENCODINGS)
        out.write(f"{'encoding':<{width}}  {'nodes':>7}  {'edges':>7}  {'labeled':>7}  nulls\n")
        for name, row in report["encodings"].items():
            out.write(f"{name:<{width}}  {row['nodes']:>7}  {row['edges']:>7}  "
                      f"{row['labeled_edges']:>7}  {row['null_graphs']}\n")
        out.write("\nedge reduction\n")
        for row in report["edge_reduction"]:
            out.write(f"{row['from']} -> {row['to']}: {100 * row['reduction']:.1f}%\n")
    return EXIT_OK


def cmd_list_encodings(args):
    rows = []
    for name, spec in ENCODINGS.items():
        row = {"name": name, "alias": ALIASES.get(name)}
        row.update(spec.axes())
        row["lossy"] = spec.lossy
        rows.append(row)
    with _open_output(args.output) as out:
        if args.json:
            _dump_json(rows, out)
            return EXIT_OK
        cols = ["name", "alias", "args", "binary", "concept", "membership", "membership_labels", "lossy"]
        table = [[str(r[c]) if r[c] is not None else "" for c in cols] for r in rows]
        widths = [max(len(c), *(len(t[i]) for t in table)) for i, c in enumerate(cols)]
        out.write("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip() + "\n")
        for t in table:
            out.write("  ".join(v.ljust(w) for v, w in zip(t, widths)).rstrip() + "\n")
    return EXIT_OK


COMMANDS = {
    "convert": cmd_convert,
    "decode": cmd_decode,
    "score": cmd_score,
    "score-clf": cmd_score_clf,
    "validate": cmd_validate,
    "stats": cmd_stats,
    "list-encodings": cmd_list_encodings,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except DataError as exc:
        print(f"drgkit: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
