"""``bursty`` command-line interface.

Every output starts with (text) or contains (JSON) the resolved run
configuration.  Library errors exit with the code carried by the
exception class; see :mod:`bursty.errors`.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import _io
from .betabinom import assumption_report, fit_all_terms, fits_to_csv
from .classify import ClassificationReport, fit_evaluate, resolve_penalty, sensitivity_grid
from .corpus import (
    TermDocumentMatrix,
    compute_stats,
    default_stopwords,
    load_stopwords,
    matrix_from_json,
    matrix_to_json,
    read_delimited,
    read_directory,
    read_triplets,
    split,
    stats_to_json,
    write_triplets,
)
from .errors import BurstyError, GuardViolated, MalformedInput
from .plr import correlation_study, plr_report
from .simulate import SimConfig, sample_dm_corpus
from .weights import PenaltyParams, _normalize_scheme, weigh_collection

SCHEMES = ("tfidf", "btfidf", "tficf", "lambda", "sigmoid-lambda")


# --------------------------------------------------------------------------- input


def _stopwords(args):
    if args.stopwords is None:
        return default_stopwords()
    if args.stopwords == "none":
        return frozenset()
    return load_stopwords(args.stopwords)


def load_matrix(path: str | Path, stopwords=frozenset()) -> TermDocumentMatrix:
    """Dispatch on the input's shape.

    * a directory holding ``triplets.txt`` and ``vocab.txt`` (``ingest`` output);
    * a ``.json`` file written by ``ingest --format json``;
    * a ``.csv`` / ``.tsv`` file with header ``id,label,text``;
    * any other directory, read as ``<label>/<document>`` files.
    """
    path = Path(path)
    if path.is_dir() and (path / "triplets.txt").is_file():
        docs = path / "docs.tsv"
        return read_triplets(path / "triplets.txt", path / "vocab.txt", docs if docs.is_file() else None)
    if path.is_dir():
        return read_directory(path, stopwords)
    if not path.is_file():
        raise MalformedInput("no such file or directory", str(path))
    if path.suffix.lower() == ".json":
        try:
            return matrix_from_json(json.loads(path.read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise MalformedInput(exc.msg, str(path), exc.lineno) from exc
    if path.name == "triplets.txt":
        docs = path.with_name("docs.tsv")
        return read_triplets(path, path.with_name("vocab.txt"), docs if docs.is_file() else None)
    return read_delimited(path, stopwords)


def _penalty(args, matrix: TermDocumentMatrix) -> PenaltyParams:
    return resolve_penalty(matrix, args.mu, args.sigma2)


def _emit(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
    else:
        _io.write_text(args.out, text)


def _base_meta(args) -> dict:
    meta = {"command": args.command, "schema_version": _io.SCHEMA_VERSION}
    for key in ("input", "test", "seed", "stopwords", "train_fraction", "smoothing"):
        value = getattr(args, key, None)
        if value is not None:
            meta[key] = value
    return meta


def _penalty_meta(meta: dict, args, penalty: PenaltyParams) -> dict:
    meta.update(mu=penalty.mu, mu_arg=args.mu, sigma2=penalty.sigma2, eta2=penalty.eta2)
    return meta


# --------------------------------------------------------------------------- commands


def cmd_ingest(args) -> int:
    matrix = load_matrix(args.input, _stopwords(args))
    meta = _base_meta(args)
    meta.update(d=matrix.d, m=matrix.m, n=matrix.n, dropped=len(matrix.dropped))
    if args.out is None:
        raise MalformedInput("ingest needs --out DIR")
    out = Path(args.out)
    stats = stats_to_json(compute_stats(matrix), matrix.vocab, meta)
    if args.format == "json":
        _io.write_text(out / "matrix.json", _io.dumps(matrix_to_json(matrix, meta)))
    else:
        write_triplets(matrix, out, meta)
    _io.write_text(out / "stats.json", _io.dumps(stats))
    return 0


def cmd_weigh(args) -> int:
    matrix = load_matrix(args.input, _stopwords(args)).compact()
    scheme = _normalize_scheme(args.scheme)
    meta = _base_meta(args)
    meta["scheme"] = scheme
    penalty = None
    if scheme in ("lambda", "sigmoid_lambda"):
        penalty = _penalty(args, matrix)
        _penalty_meta(meta, args, penalty)
    weights = weigh_collection(matrix, scheme, penalty)
    weights = type(weights)(weights.scheme, weights.vocab, weights.docs, weights.values, meta)
    _emit(args, _io.dumps(weights.to_json()) if args.format == "json" else weights.to_csv())
    return 0


def cmd_fit(args) -> int:
    matrix = load_matrix(args.input, _stopwords(args)).compact()
    fits = fit_all_terms(matrix, tol=args.tol, max_iter=args.max_iter)
    meta = _base_meta(args)
    meta.update(tol=args.tol, max_iter=args.max_iter)
    summary = assumption_report(fits)
    meta.update(frac_alpha_small=summary.frac_alpha_small, frac_alpha_not_large=summary.frac_alpha_not_large)
    if args.format == "json":
        doc = {
            "schema": "bursty.fits",
            "schema_version": _io.SCHEMA_VERSION,
            "config": meta,
            "assumptions": summary.to_json(),
            "terms": [
                {
                    "term": f.term,
                    "alpha_i": f.params.alpha_i if f.params else None,
                    "alpha_not_i": f.params.alpha_not_i if f.params else None,
                    "converged": f.converged,
                    "boundary": f.boundary,
                    "iterations": f.iterations,
                    "loglik": f.loglik,
                    "message": f.message,
                }
                for f in fits
            ],
        }
        _emit(args, _io.dumps(doc))
    else:
        _emit(args, fits_to_csv(fits, meta))
    return 0


def _sidecar_path(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    return out.with_name(out.stem + ".excluded.csv")


def cmd_plr(args) -> int:
    matrix = load_matrix(args.input, _stopwords(args)).compact()
    penalty = _penalty(args, matrix)
    report = plr_report(matrix, penalty, exact=args.exact)
    meta = _penalty_meta(_base_meta(args), args, penalty)
    meta.update(exact=args.exact, excluded=len(report.excluded))
    report = type(report)(report.rows, report.penalty, meta)
    _emit(args, _io.dumps(report.to_json(sort=True)) if args.format == "json" else report.to_csv(sort=True))
    r = compute_stats(matrix).n_i - matrix.doc_freqs + 1
    excluded = report.excluded
    side_text = _io.csv_text(
        ("term", "reason", "eta2", "r"),
        ((row.term, row.reason, penalty.eta2, int(r[matrix.term_index(row.term)])) for row in excluded),
        meta,
    )
    sidecar = _sidecar_path(args)
    if sidecar is not None:
        _io.write_text(sidecar, side_text)
    elif excluded:
        sys.stderr.write(side_text)
    if excluded and len(excluded) == len(report.rows):
        raise GuardViolated("all terms", penalty.eta2, int(r.min()))
    return 0


def _sim_config(args) -> SimConfig:
    if args.config is not None:
        config = SimConfig.load(args.config)
        if args.seed is not None:
            config = dataclasses.replace(config, seed=args.seed)
        return config
    kwargs = {}
    for key in ("m", "d"):
        if getattr(args, key, None) is not None:
            kwargs[key] = getattr(args, key)
    if args.seed is not None:
        kwargs["seed"] = args.seed
    return SimConfig(**kwargs)


def cmd_simulate(args) -> int:
    config = _sim_config(args)
    matrix = sample_dm_corpus(config)
    meta = _base_meta(args)
    meta["simulation"] = config.to_json()
    meta["seed"] = config.seed
    if args.out is None:
        raise MalformedInput("simulate needs --out DIR")
    out = Path(args.out)
    if args.format == "json":
        _io.write_text(out / "matrix.json", _io.dumps(matrix_to_json(matrix, meta)))
    else:
        write_triplets(matrix, out, meta)
    _io.write_text(out / "config.json", _io.dumps(config.to_json()))
    return 0


def _splits(args):
    stop = _stopwords(args)
    matrix = load_matrix(args.input, stop)
    if args.test is not None:
        train = matrix.compact()
        return train, load_matrix(args.test, stop).align(train.vocab)
    return split(matrix, args.train_fraction, args.seed if args.seed is not None else 0)


def cmd_classify(args) -> int:
    train, test = _splits(args)
    scheme = _normalize_scheme(args.scheme)
    penalty = _penalty(args, train) if scheme in ("lambda", "sigmoid_lambda") else None
    report = fit_evaluate(train, test, scheme, penalty, args.smoothing)
    meta = _base_meta(args)
    meta.update(report.config)
    if penalty is not None:
        _penalty_meta(meta, args, penalty)
    report = ClassificationReport.from_confusion(report.classes, report.confusion, meta)
    if args.format == "json":
        _emit(args, _io.dumps(report.to_json()))
    else:
        rows = [
            (c, float(report.precision[k]), float(report.recall[k]), float(report.f1[k]), int(report.support[k]))
            for k, c in enumerate(report.classes)
        ]
        total = int(report.support.sum())
        for name, avg in (("macro avg", report.macro()), ("weighted avg", report.weighted())):
            rows.append((name, avg["precision"], avg["recall"], avg["f1"], total))
        rows.append(("accuracy", "", "", report.accuracy, total))
        _emit(args, _io.csv_text(("class", "precision", "recall", "f1", "support"), rows, meta))
    if args.table:
        sys.stderr.write(report.to_text())
    return 0


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def cmd_sensitivity(args) -> int:
    train, test = _splits(args)
    grid = sensitivity_grid(train, test, args.mu_grid, args.sigma2_grid, args.smoothing, args.scheme)
    meta = _base_meta(args)
    meta.update(grid.config)
    mu, s2, acc = grid.peak()
    meta.update(peak_mu=mu, peak_sigma2=s2, peak_accuracy=acc)
    grid = type(grid)(grid.mu_values, grid.sigma2_values, grid.accuracy, meta)
    if args.format == "json":
        doc = {
            "schema": "bursty.sensitivity",
            "schema_version": _io.SCHEMA_VERSION,
            "config": meta,
            "mu": list(grid.mu_values),
            "sigma2": list(grid.sigma2_values),
            "accuracy": grid.accuracy.tolist(),
        }
        _emit(args, _io.dumps(doc))
    else:
        _emit(args, grid.to_csv())
    return 0


def cmd_correlate(args) -> int:
    meta = _base_meta(args)
    if args.input is not None:
        matrix = load_matrix(args.input, _stopwords(args))
    else:
        config = _sim_config(args)
        matrix = sample_dm_corpus(config)
        meta["simulation"] = config.to_json()
        meta["seed"] = config.seed
    matrix = matrix.compact()
    penalty = _penalty(args, matrix)
    _penalty_meta(meta, args, penalty)
    study = correlation_study(matrix, penalty)
    meta.update(pearson_r=study.r, excluded=len(study.excluded))
    if args.format == "json":
        doc = {
            "schema": "bursty.correlation",
            "schema_version": _io.SCHEMA_VERSION,
            "config": meta,
            "pearson_r": study.r,
            "excluded": list(study.excluded),
            "terms": [
                {"term": t, "lambda": float(lam), "tfidf_total": float(tot)}
                for t, lam, tot in zip(study.terms, study.lam, study.tfidf_total)
            ],
        }
        _emit(args, _io.dumps(doc))
    else:
        _emit(args, study.to_csv(meta))
    return 0


# --------------------------------------------------------------------------- parser


def _mu(text: str):
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {text!r}") from exc
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output file (directory for ingest/simulate); stdout if omitted")
    common.add_argument("--seed", type=_seed, default=None)
    common.add_argument(
        "--stopwords", default=None,
        help="stopword file, 'none', or omit for the bundled English list",
    )

    penalty = argparse.ArgumentParser(add_help=False)
    penalty.add_argument("--mu", type=_mu, default="auto", help="'auto' (mean document length) or a value")
    penalty.add_argument("--sigma2", type=float, default=1.0)

    labelled = argparse.ArgumentParser(add_help=False)
    labelled.add_argument("--test", help="separate test collection; otherwise split --input")
    labelled.add_argument("--train-fraction", type=float, default=0.7)
    labelled.add_argument("--smoothing", type=float, default=1.0)

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--config", help="simulation config JSON (keys: " + ", ".join(SimConfig.KEYS) + ")")
    sim.add_argument("--m", type=int)
    sim.add_argument("--d", type=int)

    parser = argparse.ArgumentParser(prog="bursty", description="Word-burstiness statistics and weights.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="build a term-document matrix")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("weigh", parents=[common, penalty], help="term weights per document")
    p.add_argument("--input", required=True)
    p.add_argument("--scheme", choices=SCHEMES, default="tfidf")
    p.set_defaults(func=cmd_weigh)

    p = sub.add_parser("fit", parents=[common], help="exact beta-binomial fits per term")
    p.add_argument("--input", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=500)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("plr", parents=[common, penalty], help="burstiness statistic per term")
    p.add_argument("--input", required=True)
    p.add_argument("--exact", action="store_true", help="exact beta-binomial likelihood in the reference value")
    p.set_defaults(func=cmd_plr)

    p = sub.add_parser("simulate", parents=[common, sim], help="sample a Dirichlet-multinomial corpus")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", parents=[common, penalty, labelled], help="Naive Bayes evaluation")
    p.add_argument("--input", required=True)
    p.add_argument("--scheme", choices=SCHEMES, default="sigmoid-lambda")
    p.add_argument("--table", action="store_true", help="also print an aligned table to stderr")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sensitivity", parents=[common, labelled], help="accuracy over a (mu, sigma2) grid")
    p.add_argument("--input", required=True)
    p.add_argument("--scheme", choices=("lambda", "sigmoid-lambda"), default="sigmoid-lambda")
    p.add_argument("--mu-grid", type=_floats, default=_floats("30,60,90,120,150,180"))
    p.add_argument("--sigma2-grid", type=_floats, default=_floats("0.5,1,2,3,4,5"))
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("correlate", parents=[common, penalty, sim], help="statistic vs summed TF-IDF")
    p.add_argument("--input", help="collection to analyse; a simulated corpus if omitted")
    p.set_defaults(func=cmd_correlate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BurstyError as exc:
        sys.stderr.write(f"bursty {args.command}: error: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
