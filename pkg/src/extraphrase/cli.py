"""Command-line interface: ``extraphrase {compress,augment,evaluate,stats}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 translation backend error.
"""

import argparse
import contextlib
import json
import logging
import os
import sys
import tempfile

from extraphrase import __version__
from extraphrase.augment import build_pseudo_corpus
from extraphrase.config import ToolkitConfig, load_config
from extraphrase.corpus_io import ConlluError, MalformedRecord, parse_conllu, read_pairs, write_pairs
from extraphrase.deptree import compress
from extraphrase.errors import ArgumentError, ConfigError, DegenerateInput
from extraphrase.metrics import corpus_bleu, corpus_rouge, length_stats
from extraphrase.paraphrase import BackendUnavailable, LengthMismatch

logger = logging.getLogger("extraphrase")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BACKEND = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@contextlib.contextmanager
def atomic_output(path):
    """Yield a text stream; the file appears at ``path`` only if the block
    completes. ``-`` or ``None`` writes to stdout."""
    if path in (None, "-"):
        yield sys.stdout
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            yield f
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


@contextlib.contextmanager
def open_input(path):
    if path == "-":
        yield sys.stdin
    else:
        with open(path, encoding="utf-8") as f:
            yield f


def _config(args, extra=None) -> ToolkitConfig:
    overrides = dict(extra or {})
    io = {}
    if getattr(args, "strict", None):
        io["strict"] = True
    if getattr(args, "group_by", None):
        io["group_by"] = args.group_by
    if io:
        overrides["io"] = io
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    return load_config(args.config, overrides)


def _read_documents(path, cfg: ToolkitConfig):
    rejected = []
    with open_input(path) as f:
        docs = parse_conllu(f, strict=cfg.strict, group_by=cfg.group_by, rejected=rejected)
    if rejected:
        print(f"skipped {len(rejected)} invalid sentence(s)", file=sys.stderr)
    return docs, rejected


def cmd_compress(args):
    cfg = _config(args)
    docs, rejected = _read_documents(args.input, cfg)
    n = 0
    with atomic_output(args.output) as out:
        for doc in docs:
            for sent in doc.sentences:
                out.write(compress(sent, cfg.compression) + "\n")
                n += 1
    print(f"compressed {n} sentence(s)", file=sys.stderr)
    return EXIT_OK


def cmd_augment(args):
    extra = {}
    if args.no_paraphrase:
        extra["roundtrip"] = None
    aug = {}
    if args.doc_limit is not None:
        aug["doc_sentence_limit"] = args.doc_limit
    if args.no_tag:
        aug["tag_enabled"] = False
    if aug:
        extra["augment"] = aug
    cfg = _config(args, extra)
    if cfg.roundtrip is None and not args.no_paraphrase:
        logger.warning("no roundtrip backends configured; emitting compression-only targets")

    docs, rejected = _read_documents(args.input, cfg)
    skipped = []
    pairs = build_pseudo_corpus(docs, cfg.augment, strict=cfg.strict, skipped=skipped)
    if skipped:
        print(f"skipped {len(skipped)} document(s)", file=sys.stderr)

    manifest = {
        "tool": "extraphrase",
        "version": __version__,
        "config_hash": cfg.hash,
        "config": cfg.normalized,
        "backends": cfg.roundtrip.identifiers if cfg.roundtrip else None,
        "seed": cfg.seed,
        "counts": {
            "documents": len(docs),
            "rejected_sentences": len(rejected),
            "skipped_documents": len(skipped),
            "pairs": len(pairs),
        },
    }
    with atomic_output(args.output) as out:
        write_pairs(pairs, out)
    if args.output not in (None, "-"):
        with atomic_output(args.output + ".manifest.json") as out:
            json.dump(manifest, out, indent=2, sort_keys=True, ensure_ascii=False)
            out.write("\n")
    print(f"wrote {len(pairs)} pair(s) from {len(docs)} document(s)", file=sys.stderr)
    return EXIT_OK


def _detect_format(path, fmt):
    if fmt != "auto":
        return fmt
    return "jsonl" if path.endswith((".jsonl", ".json")) else "text"


def load_aligned(cand_path, ref_path, fmt="auto"):
    """Return (candidates, references). JSONL files are matched by id using
    the ``target`` field; text files are aligned by line."""
    fmt = _detect_format(cand_path, fmt)
    if fmt == "text":
        with open_input(cand_path) as f:
            cands = [line.rstrip("\r\n") for line in f]
        with open_input(ref_path) as f:
            refs = [line.rstrip("\r\n") for line in f]
        if len(cands) != len(refs):
            raise DataError(f"{len(cands)} candidate lines vs {len(refs)} reference lines")
        return cands, refs
    with open_input(cand_path) as f:
        cand_pairs = read_pairs(f)
    with open_input(ref_path) as f:
        ref_pairs = read_pairs(f)
    refs_by_id = {}
    for p in ref_pairs:
        if p.id in refs_by_id:
            raise DataError(f"duplicate reference id {p.id!r}")
        refs_by_id[p.id] = p.target
    seen = set()
    for p in cand_pairs:
        if p.id in seen:
            raise DataError(f"duplicate candidate id {p.id!r}")
        seen.add(p.id)
        if p.id not in refs_by_id:
            raise DataError(f"candidate id {p.id!r} has no reference")
    for p in ref_pairs:
        if p.id not in seen:
            raise DataError(f"reference id {p.id!r} has no candidate")
    return [p.target for p in cand_pairs], [refs_by_id[p.id] for p in cand_pairs]


def _emit(report, path):
    with atomic_output(path) as out:
        json.dump(report, out, indent=2, ensure_ascii=False)
        out.write("\n")


def evaluation_report(cands, refs, smooth=False):
    rouge = corpus_rouge(list(zip(cands, refs)))
    return {
        "pair_count": len(cands),
        "rouge1": rouge["rouge1"].as_dict(),
        "rouge2": rouge["rouge2"].as_dict(),
        "rougeL": rouge["rougeL"].as_dict(),
        "bleu": corpus_bleu(cands, refs, smooth=smooth),
        "length_stats": length_stats(cands, refs).as_dict(),
        "bertscore": None,
    }


def cmd_evaluate(args):
    cfg = _config(args)
    cands, refs = load_aligned(args.candidates, args.references, args.format)
    smooth = args.smooth or cfg.metrics.bleu_smoothing
    _emit(evaluation_report(cands, refs, smooth=smooth), args.out)
    return EXIT_OK


def cmd_stats(args):
    cands, refs = load_aligned(args.candidates, args.references, args.format)
    if not cands:
        raise DegenerateInput("no pairs to measure")
    stats = length_stats(cands, refs)
    _emit({"pair_count": len(cands), **stats.as_dict()}, args.out)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="extraphrase", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--strict", action="store_true", default=None,
                        help="abort on the first invalid sentence instead of skipping it")
        sp.add_argument("--group-by", choices=["sentence", "sent_id"],
                        help="document grouping for input without newdoc markers")
        sp.add_argument("--workers", type=int, help="cap on concurrent translation requests")

    sp = sub.add_parser("compress", help="compress each CoNLL-U sentence")
    sp.add_argument("input", help="CoNLL-U file or -")
    sp.add_argument("-o", "--output", default="-")
    common(sp)
    sp.set_defaults(func=cmd_compress)

    sp = sub.add_parser("augment", help="build a pseudo pair corpus")
    sp.add_argument("input", help="CoNLL-U file or -")
    sp.add_argument("-o", "--output", required=True, help="JSONL output (manifest goes beside it)")
    sp.add_argument("--no-paraphrase", action="store_true", help="skip round-trip translation")
    sp.add_argument("--doc-limit", type=int, help="sentences per document used for the target")
    sp.add_argument("--no-tag", action="store_true", help="do not prefix sources with the pseudo tag")
    sp.add_argument("--seed", type=int)
    common(sp)
    sp.set_defaults(func=cmd_augment)

    for name, func, helptext in (("evaluate", cmd_evaluate, "ROUGE/BLEU/length report"),
                                 ("stats", cmd_stats, "length ratio and difference")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("candidates")
        sp.add_argument("references")
        sp.add_argument("--format", choices=["auto", "jsonl", "text"], default="auto")
        sp.add_argument("--out", default="-")
        if name == "evaluate":
            sp.add_argument("--smooth", action="store_true", help="smoothed BLEU")
            sp.add_argument("--config", help="JSON config file")
        sp.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BackendUnavailable, LengthMismatch) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (ConlluError, MalformedRecord, DataError, DegenerateInput, ArgumentError,
            OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
