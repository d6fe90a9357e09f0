"""Command-line interface: extract, vocab, train, predict, evaluate, stats.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant violation.

Seeds: ``--seed S`` drives everything. ``extract`` samples the paths of the
i-th function (in sorted input order) with seed ``S ^ i``; ``train`` uses
``S`` for parameter initialization and for the per-epoch shuffle, which is
seeded with ``(S, epoch)``; ``evaluate --compare`` seeds the bootstrap with ``S``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

from . import metrics, minijava, paths, syntax, train, vocab
from .errors import (CheckpointError, DataError, InvariantError, NamegenError, ParseError,
                     ValidationError)
from .model import beam_decode, greedy_decode, load_model

log = logging.getLogger("namegen")

SOURCE_SUFFIXES = (".java", ".mj", ".minijava")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------- manifest


class Manifest:
    """JSON record of stage outputs; refuses to mix vocabularies across stages."""

    def __init__(self, path):
        self.path = path
        self.data = {"stages": {}}
        if path and os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                self.data = json.load(fh)

    def check_vocab(self, checksum, stage):
        known = self.data.get("vocab_checksum")
        if self.path and known and checksum != known:
            raise DataError(f"{stage}: vocabulary checksum {checksum} differs from "
                            f"the pipeline manifest ({known})")

    def record(self, stage, vocab_checksum=None, **info):
        if not self.path:
            return
        if vocab_checksum:
            self.data["vocab_checksum"] = vocab_checksum
        self.data["stages"][stage] = dict(info, done=True)
        tmp = f"{self.path}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)
        os.replace(tmp, self.path)


# ---------------------------------------------------------------- commands


def _source_files(inputs):
    files = []
    for item in inputs:
        if os.path.isdir(item):
            for root, _dirs, names in os.walk(item):
                files += [os.path.join(root, n) for n in names
                          if n.endswith(SOURCE_SUFFIXES + (".jsonl",))]
        elif os.path.exists(item):
            files.append(item)
        else:
            raise DataError(f"input not found: {item}")
    return sorted(files)


def cmd_extract(args, manifest):
    functions, failures = [], []
    files = _source_files(args.inputs)
    for path in files:
        try:
            with open(path, encoding="utf-8") as fh:
                if path.endswith(".jsonl"):
                    functions += syntax.load_ast_json(fh, origin=path)
                else:
                    functions += minijava.parse_mini_java(fh.read(), origin=path)
        except (ParseError, ValidationError, DataError) as exc:
            failures.append(str(exc))
            print(f"error: {exc}", file=sys.stderr)
    if failures and len(failures) == len(files):
        raise DataError(f"all {len(files)} input file(s) failed to parse")
    if not functions:
        raise DataError("no functions found")
    limit = None if args.no_filter else args.max_path_subwords
    records = []
    for i, fn in enumerate(functions):
        rec = paths.function_to_record(fn, i, args.seed, args.cap, limit)
        if rec is None:
            log.warning("%s: %s has no usable paths, skipped", fn.origin, fn.name)
        else:
            records.append(rec)
    if not records:
        raise DataError("no function produced any path")
    paths.write_path_file(args.out, records)
    if args.ast_out:
        with open(args.ast_out, "w", encoding="utf-8", newline="\n") as fh:
            syntax.dump_ast_json(functions, fh)
    log.info("extracted %d functions (%d parse failures) -> %s",
             len(records), len(failures), args.out)
    manifest.record("extract", output=args.out, functions=len(records), seed=args.seed,
                    cap=args.cap)
    print(f"{len(records)} functions extracted")


def cmd_vocab(args, manifest):
    records = paths.read_path_file(args.paths)
    if not records:
        raise DataError(f"{args.paths}: no examples")
    use_mfs = not args.no_mfs
    if args.vocab_in:
        voc = vocab.Vocabulary.load(args.vocab_in)
        voc, examples = vocab.prepare_corpus(records, voc, use_mfs)
    else:
        voc, examples = vocab.prepare_corpus(records, None, use_mfs, args.min_count, args.max_size)
        if not args.out:
            raise UsageError("vocab: --out is required when building a new vocabulary")
        voc.save(args.out)
    manifest.check_vocab(voc.checksum, "vocab")
    if args.prepared:
        vocab.PreparedDataset(examples, voc.checksum, use_mfs).save(args.prepared)
    manifest.record("vocab", vocab_checksum=voc.checksum, vocab=args.out or args.vocab_in,
                    prepared=args.prepared, size=len(voc), use_mfs=use_mfs)
    print(f"vocabulary: {len(voc)} subwords, {voc.num_labels} labels, checksum {voc.checksum}")


def _train_config(args):
    config = train.load_config(args.config) if args.config else train.TrainConfig()
    if args.seed_given:
        config = replace(config, seed=args.seed)
    if args.epochs is not None:
        config = replace(config, epochs=args.epochs)
    return config


def cmd_train(args, manifest):
    voc = vocab.Vocabulary.load(args.vocab)
    data = vocab.PreparedDataset.load(args.data)
    if data.vocab_checksum != voc.checksum:
        raise DataError(f"{args.data} was prepared with vocabulary {data.vocab_checksum}, "
                        f"not {voc.checksum}")
    manifest.check_vocab(voc.checksum, "train")
    if args.resume:
        # everything comes from the checkpoint except the epoch target:
        # --epochs, else the --config file's epochs, else the checkpoint's
        state = train.load_checkpoint(args.resume)
        target = args.epochs
        if target is None and args.config:
            target = train.load_config(args.config).epochs
        if target is not None:
            state.config = replace(state.config, epochs=target)
    else:
        state = train.new_state(_train_config(args), voc)
    train.fit(state, data, checkpoint_path=args.out)
    final = state.losses[-1] if state.losses else float("nan")
    manifest.record("train", vocab_checksum=voc.checksum, checkpoint=args.out,
                    epochs=state.epoch, final_loss=final, seed=state.config.seed)
    print(f"trained {state.epoch} epochs, final loss {final:.6f}")


def cmd_predict(args, manifest):
    if not os.path.exists(args.checkpoint):
        raise DataError(f"checkpoint not found: {args.checkpoint}")
    model = load_model(args.checkpoint)
    voc = vocab.Vocabulary.load(args.vocab)
    data = vocab.PreparedDataset.load(args.data)
    for what, checksum in (("checkpoint", model.vocab_checksum), ("data", data.vocab_checksum)):
        if checksum != voc.checksum:
            raise DataError(f"{what} vocabulary {checksum} does not match {voc.checksum}")
    manifest.check_vocab(voc.checksum, "predict")
    if args.mode == "greedy":
        outputs = []
        for start in range(0, len(data.examples), 64):
            outputs += greedy_decode(model, data.examples[start:start + 64], voc, args.max_len)
    else:
        outputs = [beam_decode(model, ex, voc, args.beam_size, args.max_len)
                   for ex in data.examples]
    preds = [metrics.Prediction(out, ex.original_gold(), ex.provenance)
             for out, ex in zip(outputs, data.examples)]
    metrics.write_predictions(args.out, preds)
    manifest.record("predict", vocab_checksum=voc.checksum, predictions=args.out,
                    mode=args.mode)
    print(f"{len(preds)} predictions -> {args.out}")


def read_frequency_table(path):
    """``subword<TAB>count`` lines, or a vocabulary file (``subword<TAB>id<TAB>count``)."""
    freq = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if line == "[labels]":
                break
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise DataError(f"{path}:{lineno}: expected subword and count columns")
            w = paths.unescape(parts[0])
            if w in vocab.SPECIALS:
                continue
            freq[w] = int(parts[-1])
    return freq


def cmd_evaluate(args, manifest):
    preds = metrics.read_predictions(args.predictions)
    report = {"system": metrics.evaluate(preds).to_json()}
    rows = [(args.name, metrics.evaluate(preds))]
    if args.freq_table:
        freq = read_frequency_table(args.freq_table)
        report["buckets"] = metrics.bucketed_scores(preds, freq).to_json()
        low = metrics.low_frequency_slice(preds, freq, args.low_threshold)
        report["low_frequency"] = {"threshold_pct": args.low_threshold,
                                   "report": None if low is None else low.to_json()}
    if args.compare:
        other = metrics.read_predictions(args.compare)
        rows.append((args.compare_name, metrics.evaluate(other)))
        report["baseline"] = rows[1][1].to_json()
        report["bootstrap"] = {
                m: metrics.paired_bootstrap(preds, other, m, args.resamples, args.seed)
                for m in metrics.METRICS}
        report["bootstrap_resamples"] = args.resamples
    table = metrics.summary_table(rows)
    report["table"] = table
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    manifest.record("evaluate", report=args.out)
    print(table)
    if args.compare:
        for m, p in report["bootstrap"].items():
            print(f"p({m}: baseline >= system) = {p:.4f}")


def cmd_stats(args, manifest):
    records = paths.read_path_file(args.paths)
    st = vocab.corpus_stats(records)
    out = st.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(out, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.freq_out:
        ranked = sorted(st.subword_frequencies.items(), key=lambda wc: (-wc[1], wc[0]))
        with open(args.freq_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(f"{paths.escape(w)}\t{c}\n" for w, c in ranked)
    manifest.record("stats", output=args.out)
    print(f"{st.n_examples} examples: {st.pct_names_containing_snippet_mfs:.2f}% names contain "
          f"the snippet's most frequent subword, {st.pct_names_sharing_any_subword:.2f}% share "
          f"at least one input subword")


# ---------------------------------------------------------------- argument parsing


def build_parser():
    p = _Parser(prog="namegen", description="Function-name generation from AST paths.")
    p.add_argument("--seed", type=int, default=None, help="global seed (default 0)")
    p.add_argument("--config", help="training config file (key = value lines)")
    p.add_argument("--quiet", action="store_true", help="only print errors")
    p.add_argument("--manifest", help="pipeline manifest JSON to update and check")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("extract", help="parse sources and write the path-context file")
    e.add_argument("inputs", nargs="+", help="mini-Java files/directories or AST .jsonl files")
    e.add_argument("--out", required=True)
    e.add_argument("--cap", type=int, default=paths.PATH_CAP)
    e.add_argument("--max-path-subwords", type=int, default=paths.MAX_PATH_SUBWORDS)
    e.add_argument("--no-filter", action="store_true", help="keep paths of any subword count")
    e.add_argument("--ast-out", help="also write the parsed ASTs as JSONL")
    e.set_defaults(func=cmd_extract)

    v = sub.add_parser("vocab", help="build a vocabulary and/or encode a path file")
    v.add_argument("paths")
    v.add_argument("--out", help="vocabulary file to write")
    v.add_argument("--vocab-in", help="encode with an existing vocabulary instead")
    v.add_argument("--prepared", help="write the id-encoded dataset (JSONL)")
    v.add_argument("--min-count", type=int, default=1)
    v.add_argument("--max-size", type=int, default=None)
    v.add_argument("--no-mfs", action="store_true", help="disable the MFS placeholder")
    v.set_defaults(func=cmd_vocab)

    t = sub.add_parser("train", help="train a model")
    t.add_argument("--data", required=True, help="prepared dataset")
    t.add_argument("--vocab", required=True)
    t.add_argument("--out", required=True, help="checkpoint path")
    t.add_argument("--resume", help="checkpoint to resume from")
    t.add_argument("--epochs", type=int, default=None, help="override total epochs")
    t.set_defaults(func=cmd_train)

    r = sub.add_parser("predict", help="decode names for a prepared dataset")
    r.add_argument("--checkpoint", required=True)
    r.add_argument("--vocab", required=True)
    r.add_argument("--data", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--mode", choices=("greedy", "beam"), default="greedy")
    r.add_argument("--beam-size", type=int, default=4)
    r.add_argument("--max-len", type=int, default=None)
    r.set_defaults(func=cmd_predict)

    ev = sub.add_parser("evaluate", help="score predictions")
    ev.add_argument("predictions")
    ev.add_argument("--freq-table", help="training subword frequencies (TSV or vocab file)")
    ev.add_argument("--low-threshold", type=float, default=0.0001,
                    help="relative frequency threshold in percent for the rare-subword slice")
    ev.add_argument("--compare", help="baseline predictions for paired bootstrap")
    ev.add_argument("--resamples", type=int, default=10_000)
    ev.add_argument("--name", default="system")
    ev.add_argument("--compare-name", default="baseline")
    ev.add_argument("--out", help="JSON report path")
    ev.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("stats", help="corpus statistics of a path file")
    s.add_argument("paths")
    s.add_argument("--out")
    s.add_argument("--freq-out", help="write subword frequencies as TSV")
    s.set_defaults(func=cmd_stats)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"namegen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    stdout = sys.stdout
    if args.quiet:
        sys.stdout = open(os.devnull, "w")
    try:
        args.func(args, Manifest(args.manifest))
        return EXIT_OK
    except UsageError as exc:
        print(f"namegen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print(f"namegen: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (DataError, ParseError, ValidationError, CheckpointError, OSError) as exc:
        print(f"namegen: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NamegenError as exc:
        print(f"namegen: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    finally:
        if args.quiet:
            sys.stdout.close()
            sys.stdout = stdout


if __name__ == "__main__":
    sys.exit(main())
