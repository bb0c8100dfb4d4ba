"""Command-line front end: mine, train, evaluate, predict, stats, synth.

Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence under --strict.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .analytics import (CATEGORIES, METRIC_NAMES, bucket_by_actors, compare_categories,
                        compute_metrics, cooccurrence, pair_tests_tsv, shapiro_wilk,
                        summarize_corpus)
from .classifiers import (KINDS, TrainedModel, export_tree, hyperparameters_for, load_model,
                          save_model, train)
from .corpus import load_corpus, read_issues, stratified_split, write_corpus
from .errors import MissingAnnotations, NonConvergenceWarning, WontfixError
from .evaluation import (ConfusionMatrix, EvaluationReport, cross_validate, evaluate_holdout,
                         metrics_from_confusion)
from .features import Weighting, build_matrix, fit_corpus_vocabulary

DEFAULT_SEED = 20190501
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NONCONVERGED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _param(text: str) -> tuple[str, Any]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        return key, raw


def _config(args: argparse.Namespace, **extra) -> dict:
    skip = {"func"}
    cfg = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k not in skip}
    cfg["params"] = dict(args.params) if getattr(args, "params", None) else {}
    cfg.update(extra)
    cfg["version"] = __version__
    return cfg


def _write(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def _weighting(args) -> Weighting:
    return Weighting.SUBLINEAR if getattr(args, "sublinear", False) else Weighting.RAW


def _hyper(args) -> dict:
    try:
        return hyperparameters_for(args.model, dict(args.params or []))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# --- subcommands -------------------------------------------------------------------

def cmd_mine(args) -> int:
    from .miner import GitHubClient, ReplaySession, Throttle, mine, token_from_env

    session = ReplaySession.from_file(args.replay) if args.replay else None
    client = GitHubClient(session, token=token_from_env(args.token_env),
                          throttle=Throttle(legacy=args.legacy_throttle), max_wait=args.max_wait)
    if args.replay:
        client.sleep = lambda s: None  # recorded runs need no real pauses
    result = mine(client, args.language, args.top_n, args.out, args.checkpoint)
    print(f"repositories: {len(result.repos)}  issues written: {result.emitted}  "
          f"already present: {result.skipped_duplicates}")
    return EXIT_OK


def cmd_train(args) -> int:
    params = _hyper(args)
    corpus = load_corpus(args.corpus)
    vocab = fit_corpus_vocabulary(corpus, min_df=args.min_df, weighting=_weighting(args))
    model = train(args.model, build_matrix(corpus, vocab), params, seed=args.seed)
    vocab_mode = "full" if args.paper_compat else "train"
    trained = TrainedModel(model, vocab, params,
                           _config(args, vocab_mode=vocab_mode, n_docs=len(corpus)))
    save_model(trained, args.out)
    print(f"trained {args.model} on {len(corpus)} issues, {len(vocab)} terms -> {args.out}")
    if args.export_tree:
        if args.model != "j48":
            raise UsageError("--export-tree only applies to --model j48")
        _write(args.export_tree, export_tree(model, vocab))
    return EXIT_OK


def _report_outputs(args, report: EvaluationReport) -> None:
    print(report.render())
    if args.out_json:
        _write(args.out_json, report.to_json())
    if args.out_tsv:
        header = "# config: " + json.dumps(report.config, sort_keys=True) + "\n"
        _write(args.out_tsv, header + report.to_tsv())


def cmd_evaluate(args) -> int:
    if args.from_matrix:
        try:
            counts = [int(x) for x in args.from_matrix.split(",")]
            cm = ConfusionMatrix(*counts)
        except (ValueError, TypeError):
            raise UsageError("--from-matrix expects tp,fn,fp,tn as four non-negative integers") from None
        report = EvaluationReport(cm, metrics_from_confusion(cm),
                                  {"mode": "from_matrix", "version": __version__})
        _report_outputs(args, report)
        return EXIT_OK
    if not args.corpus:
        raise UsageError("evaluate needs --corpus (or --from-matrix)")
    params = _hyper(args)
    corpus = load_corpus(args.corpus)
    vocab_mode = "full" if args.paper_compat else "train"
    if args.mode == "holdout":
        tr, te = stratified_split(corpus, args.fraction, seed=args.seed)
        report = evaluate_holdout(tr, te, args.model, params, seed=args.seed,
                                  vocab_mode=vocab_mode, weighting=_weighting(args))
    else:
        report = cross_validate(corpus, args.folds, args.model, params, seed=args.seed,
                                vocab_mode=vocab_mode, weighting=_weighting(args))
    report = EvaluationReport(report.matrix, report.metrics,
                              {**report.config, "corpus": str(args.corpus), "version": __version__},
                              report.fold_metrics)
    _report_outputs(args, report)
    return EXIT_OK


def cmd_predict(args) -> int:
    trained = load_model(args.model_file)
    rows = []
    for issue, _ in read_issues(args.issues):
        p = trained.predict_issue(issue)
        rows.append(f"{issue.id}\t{p.cls.value}\t{p.score!r}")
    header = "# config: " + json.dumps({"model_file": str(args.model_file), "kind": trained.kind,
                                        "vocab_hash": trained.vocab.digest(),
                                        "version": __version__}, sort_keys=True)
    _write(args.out, "\n".join([header, "id\tclass\tscore", *rows]))
    return EXIT_OK


def cmd_stats(args) -> int:
    corpus = load_corpus(args.corpus)
    cfg = "# config: " + json.dumps(_config(args), sort_keys=True)
    op = args.count_opening_post
    if args.analysis == "table4":
        tests = compare_categories(corpus, args.metrics or METRIC_NAMES, count_opening_post=op)
        _write(args.out, cfg + "\n" + pair_tests_tsv(tests))
    elif args.analysis == "buckets":
        buckets, tests = bucket_by_actors(corpus, args.metric, args.category, count_opening_post=op)
        lines = [cfg, "bucket\tn\tvalues"]
        lines += [f"{b}\t{len(v)}\t{','.join(repr(x) for x in v)}" for b, v in buckets.items()]
        _write(args.out, "\n".join(lines) + "\n" + pair_tests_tsv(tests))
    elif args.analysis == "cooccurrence":
        if not corpus.annotations:
            raise MissingAnnotations("cooccurrence needs opening and closing annotations "
                                     "(an \"annotations\" object on each analysed issue)")
        _write(args.out, cfg + "\n" + cooccurrence(corpus).to_tsv())
    elif args.analysis == "summary":
        table = summarize_corpus(corpus, op, group_by=lambda i: corpus.class_of[i.id].value)
        _write(args.out, json.dumps({"config": _config(args), "summary": table}, indent=2,
                                    sort_keys=True))
    else:  # normality
        lines = [cfg, "metric\tW\tp_value"]
        values = [compute_metrics(i, op) for i in corpus.issues]
        for name in args.metrics or METRIC_NAMES:
            res = shapiro_wilk([m[name] for m in values])
            lines.append(f"{name}\t{res.statistic!r}\t{res.p_value!r}")
        _write(args.out, "\n".join(lines))
    return EXIT_OK


def cmd_synth(args) -> int:
    from .synthetic import generate_corpus

    corpus = generate_corpus(args.n, args.wontfix_share, seed=args.seed, annotate=args.annotate)
    write_corpus(corpus, args.out)
    n_w, n_n = corpus.counts()
    print(f"wrote {len(corpus)} issues ({n_w} wontfix, {n_n} non_wontfix) -> {args.out}")
    return EXIT_OK


# --- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wontfix", description="Mine, classify and analyse wontfix issues.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("mine", help="collect closed issues from GitHub")
    m.add_argument("--language", required=True)
    m.add_argument("--top-n", type=int, default=1000)
    m.add_argument("--out", type=Path, required=True)
    m.add_argument("--checkpoint", type=Path)
    m.add_argument("--token-env", default="GITHUB_TOKEN",
                   help="environment variable holding the API token")
    m.add_argument("--legacy-throttle", action="store_true",
                   help="pause a fixed 40 s after every request")
    m.add_argument("--max-wait", type=float, default=3600.0,
                   help="give up when a rate-limit reset is further away than this (s)")
    m.add_argument("--replay", type=Path, help="serve HTTP from a recorded fixture file")
    m.set_defaults(func=cmd_mine)

    def model_opts(sp, model_required=True):
        sp.add_argument("--model", choices=KINDS, required=model_required)
        sp.add_argument("--param", dest="params", action="append", type=_param, default=[],
                        metavar="KEY=VALUE", help="hyperparameter override, repeatable")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--paper-compat", action="store_true",
                        help="fit the vocabulary on the whole corpus, test issues included")
        sp.add_argument("--sublinear", action="store_true", help="use 1 + ln(tf) term weights")
        sp.add_argument("--strict", action="store_true",
                        help="exit 3 when the SVM solver does not converge")

    t = sub.add_parser("train", help="train a classifier on a labeled corpus")
    t.add_argument("--corpus", type=Path, required=True)
    t.add_argument("--out", type=Path, required=True)
    t.add_argument("--min-df", type=int, default=1)
    t.add_argument("--export-tree", type=Path, help="write the J48 tree as text")
    model_opts(t)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="holdout or k-fold evaluation")
    e.add_argument("--corpus", type=Path)
    e.add_argument("--mode", choices=("holdout", "cv"), default="holdout")
    e.add_argument("--fraction", type=float, default=0.5, help="training share for holdout")
    e.add_argument("--folds", type=int, default=10)
    e.add_argument("--from-matrix", metavar="TP,FN,FP,TN",
                   help="only compute metrics for the given confusion counts")
    e.add_argument("--out-json", type=Path)
    e.add_argument("--out-tsv", type=Path)
    model_opts(e, model_required=False)
    e.set_defaults(func=cmd_evaluate, model="nb")

    r = sub.add_parser("predict", help="classify issues with a trained model")
    r.add_argument("--model-file", type=Path, required=True)
    r.add_argument("--issues", type=Path, required=True)
    r.add_argument("--out", type=Path)
    r.set_defaults(func=cmd_predict)

    s = sub.add_parser("stats", help="discussion-metric analyses")
    s.add_argument("--corpus", type=Path, required=True)
    s.add_argument("--analysis", required=True,
                   choices=("table4", "buckets", "cooccurrence", "summary", "normality"))
    s.add_argument("--metric", choices=METRIC_NAMES, default="time_to_close")
    s.add_argument("--metrics", nargs="+", choices=METRIC_NAMES)
    s.add_argument("--category", choices=tuple(CATEGORIES), default="All")
    s.add_argument("--count-opening-post", action="store_true",
                   help="treat the issue description as a discussion message")
    s.add_argument("--out", type=Path)
    s.set_defaults(func=cmd_stats)

    y = sub.add_parser("synth", help="write a seeded synthetic corpus")
    y.add_argument("--n", type=int, default=500)
    y.add_argument("--wontfix-share", type=float, default=0.3)
    y.add_argument("--seed", type=int, default=DEFAULT_SEED)
    y.add_argument("--annotate", action="store_true", help="add random taxonomy annotations")
    y.add_argument("--out", type=Path, required=True)
    y.set_defaults(func=cmd_synth)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    strict = getattr(args, "strict", False)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NonConvergenceWarning)
            code = args.func(args)
        nonconverged = [w for w in caught if issubclass(w.category, NonConvergenceWarning)]
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        if nonconverged and strict:
            return EXIT_NONCONVERGED
        return code
    except UsageError as exc:
        print(f"wontfix: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WontfixError as exc:
        print(f"wontfix: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"wontfix: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
