"""Command-line entry point: ``nerprobe <subcommand> ...``.

Exit status: 0 on success, 1 when the data fails validation (misaligned
files, malformed rows, degenerate statistics), 2 for usage and I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import SCHEMA_VERSION, __version__
from .corpus import DEFAULT_GENRE_MAP, FormatConfig, load_genre_map, load_source_map, read_conll, save_conll
from .errors import NerProbeError, ParseError
from .perturb import (CONSISTENCY, builtin_rules, default_lexicon, get_rule, load_lexicon, load_rule,
                      replacement_novelty)
from .perturb import apply as apply_plan
from .perturb import plan as make_plan
from .report import compare, from_json, to_csv, to_json, to_markdown
from .scorer import ScoreReport, score
from .splits import (SplitSpec, cross_genre_sets, generate_splits, overlap_stats, proportions_from_counts,
                     write_cross_genre, write_splits)
from .stats import aggregate, paired_t_test


class UsageError(Exception):
    pass


def _format_config(args) -> FormatConfig:
    sep = {"ws": None, "space": " ", "tab": "\t"}[args.sep]
    tag_col = "last" if args.tag_col == "last" else int(args.tag_col)
    kw = {}
    if args.source and args.source_map:
        raise UsageError("--source and --source-map are mutually exclusive")
    if args.source:
        kw = {"source_policy": "fixed", "fixed_source": args.source}
    elif args.source_map:
        with open(args.source_map, encoding="utf-8") as f:
            kw = {"source_policy": "map", "source_map": load_source_map(f)}
    try:
        return FormatConfig(separator=sep, token_col=args.token_col, tag_col=tag_col,
                            comment_prefix=args.comment_prefix, **kw)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _genre_map(args):
    if getattr(args, "genre_map", None):
        with open(args.genre_map, encoding="utf-8") as f:
            return load_genre_map(f)
    return DEFAULT_GENRE_MAP


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read_floats(path: str) -> list[float]:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                out.append(float(line))
            except ValueError:
                raise ParseError(f"not a number: {line.strip()!r}", lineno) from None
    return out


def _score_text(r: ScoreReport) -> str:
    def line(name, g_prf, c):
        p = g_prf
        nums = "\t".join(f"{k}={'n/a' if p is None else format(v, '.4f')}"
                         for k, v in zip(("precision", "recall", "f1"), p or (0, 0, 0)))
        return f"{name}\t{nums}\ttp={c.tp}\tfp={c.fp}\tfn={c.fn}\n"

    out = [line("overall", r.prf, r.counts)]
    for t, g in r.by_type.items():
        out.append(line(f"type:{t}", g.prf, g.counts))
    for s, g in r.by_source.items():
        out.append(line(f"source:{s}", g.prf, g.counts))
    for s, g in r.by_genre.items():
        out.append(line(f"genre:{s}", g.prf, g.counts))
    return "".join(out)


def cmd_score(args) -> int:
    cfg = _format_config(args)
    gm = _genre_map(args)
    gold = read_conll(args.gold, cfg)
    pred = read_conll(args.pred, cfg)
    group = None if args.group_by in (None, "type") else args.group_by
    r = score(gold, pred, group, gm, check_surfaces=args.check_surfaces, strict=args.strict)
    if args.json:
        text = to_json(r)
    elif args.md:
        layout = {None: "overall", "type": "by_type", "source": "by_source", "genre": "by_genre"}[args.group_by]
        text = to_markdown(r, layout, gm=gm)
    else:
        text = _score_text(r)
    _emit(text, args.out)
    return 0


def cmd_perturb(args) -> int:
    cfg = _format_config(args)
    if Path(args.rule).is_file():
        rule = load_rule(args.rule)
    else:
        try:
            rule = get_rule(args.rule)
        except KeyError:
            names = ", ".join(r.rule_id for r in builtin_rules())
            raise UsageError(f"--rule must be one of {names} or a rule JSON file") from None
    if args.consistency:
        rule = rule.with_consistency(args.consistency)
    if args.lexicon:
        with open(args.lexicon, encoding="utf-8") as f:
            lex = load_lexicon(f)
    else:
        lex = default_lexicon()
    corpus = read_conll(getattr(args, "in"), cfg)
    p = make_plan(corpus, rule, lex, args.seed)
    save_conll(apply_plan(corpus, p), args.out, cfg)
    if args.manifest:
        Path(args.manifest).write_text(p.to_json(rule), encoding="utf-8")
    msg = f"{rule.rule_id}: {len(p)} substitutions"
    if args.novelty_train:
        nov = replacement_novelty(p, read_conll(args.novelty_train, cfg))
        msg += f"; novel replacement tokens: {'n/a' if nov is None else f'{100 * nov:.2f}%'}"
    print(msg, file=sys.stderr)
    return 0


def _parse_proportions(text: str) -> tuple[float, float, float]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"bad --proportions {text!r}") from None
    if len(vals) != 3:
        raise UsageError("--proportions needs three comma-separated numbers")
    return vals  # type: ignore[return-value]


def cmd_split(args) -> int:
    cfg = _format_config(args)
    if args.proportions:
        props = _parse_proportions(args.proportions)
    else:
        props = proportions_from_counts(*(len(read_conll(f, cfg)) for f in args.reference))
    try:
        spec = SplitSpec(props, args.seed, args.n)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if args.by_document:
        raise UsageError("--by-document splitting is not implemented")
    corpus = read_conll(getattr(args, "in"), cfg)
    if not len(corpus):
        raise NerProbeError("input corpus is empty")
    splits = generate_splits(corpus, spec, stratify=args.stratify, gm=_genre_map(args))
    write_splits(args.out_dir, splits, spec, cfg)
    return 0


def cmd_cross_genre(args) -> int:
    cfg = _format_config(args)
    mode, _, genre = args.mode.partition(":")
    modes = {"single": "single", "loo": "leave_one_out"}
    if mode not in modes or not genre:
        raise UsageError("--mode must be single:GENRE or loo:GENRE")
    gm = _genre_map(args)
    sets = cross_genre_sets(read_conll(args.train, cfg), read_conll(args.dev, cfg),
                            read_conll(args.test, cfg), modes[mode], genre, args.dev_genre, gm)
    write_cross_genre(args.out_dir, sets, modes[mode], genre, cfg)
    return 0


def cmd_overlap(args) -> int:
    cfg = _format_config(args)
    st = overlap_stats(read_conll(args.train, cfg), read_conll(args.test, cfg), args.type)
    if args.json:
        text = to_json(st)
    else:
        fmt = lambda v: "n/a" if v is None else f"{v:.2f}"  # noqa: E731
        text = (f"type\t{st.entity_type}\n"
                f"test_token_overlap_pct\t{fmt(st.test_token_overlap_pct)}\n"
                f"train_unique_token_pct\t{fmt(st.train_unique_token_pct)}\n")
    _emit(text, args.out)
    return 0


def cmd_aggregate(args) -> int:
    s = aggregate(_read_floats(args.values))
    if args.json:
        text = to_json(s)
    elif args.md:
        text = to_markdown({args.label: s}, "runs")
    else:
        sd = "n/a" if s.sample_sd is None else f"{s.sample_sd:.4f}"
        text = f"n\t{s.n}\nmean\t{s.mean:.4f}\nsd\t{sd}\nmin\t{s.min:.4f}\nmax\t{s.max:.4f}\n"
    _emit(text, args.out)
    return 0


def cmd_ttest(args) -> int:
    r = paired_t_test(_read_floats(args.a), _read_floats(args.b))
    if args.json:
        text = to_json(r)
    else:
        text = f"t\t{r.t_statistic:.4f}\ndf\t{r.degrees_of_freedom}\np\t{r.p_two_tailed:.4f}\n"
        if args.alpha is not None:
            text += f"significant\t{'yes' if r.significant(args.alpha) else 'no'} (alpha={args.alpha})\n"
    _emit(text, args.out)
    return 0


def cmd_compare(args) -> int:
    docs = []
    for path in (args.baseline, args.candidate):
        doc = from_json(Path(path).read_text(encoding="utf-8"))
        if not isinstance(doc, ScoreReport):
            raise NerProbeError(f"{path} is not a score report")
        docs.append(doc)
    table = compare(*docs)
    if args.json:
        text = to_json(table)
    elif args.csv:
        text = to_csv(table, "compare")
    else:
        text = to_markdown(table, "compare")
    _emit(text, args.out)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentParser(add_help=False)
    g = fmt.add_argument_group("column format")
    g.add_argument("--sep", choices=("ws", "space", "tab"), default="ws",
                   help="column separator; 'ws' reads any whitespace and writes a space")
    g.add_argument("--token-col", type=int, default=0)
    g.add_argument("--tag-col", default="last", help="0-based index or 'last'")
    g.add_argument("--comment-prefix", default=None)
    g.add_argument("--source", default=None, help="fixed source label for every sentence")
    g.add_argument("--source-map", default=None, help="TSV of doc_id<TAB>source")

    p = _Parser(prog="nerprobe", description="Entity-level NER evaluation and robustness toolkit.")
    p.add_argument("--version", action="version",
                   version=f"nerprobe {__version__} (schema {SCHEMA_VERSION})")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("score", parents=[fmt], help="entity-level micro P/R/F1")
    s.add_argument("--gold", required=True)
    s.add_argument("--pred", required=True)
    s.add_argument("--group-by", choices=("type", "source", "genre"))
    s.add_argument("--genre-map")
    s.add_argument("--check-surfaces", action="store_true", help="require identical tokens")
    s.add_argument("--strict", action="store_true", help="reject dangling I- tags")
    out = s.add_mutually_exclusive_group()
    out.add_argument("--json", action="store_true")
    out.add_argument("--md", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("perturb", parents=[fmt], help="build an adversarial test set")
    s.add_argument("--in", required=True)
    s.add_argument("--rule", required=True, help="perturb_1 .. perturb_6, or a rule JSON file")
    s.add_argument("--lexicon", help="lexicon TSV (default: bundled starter lexicon)")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--consistency", choices=CONSISTENCY)
    s.add_argument("--out", required=True)
    s.add_argument("--manifest", help="write the substitution plan as JSON")
    s.add_argument("--novelty-train", help="report replacement tokens unseen in this corpus")
    s.set_defaults(func=cmd_perturb)

    s = sub.add_parser("split", parents=[fmt], help="seeded random train/dev/test splits")
    s.add_argument("--in", required=True)
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--proportions", help="train,dev,test fractions summing to 1")
    src.add_argument("--reference", nargs=3, metavar=("TRAIN", "DEV", "TEST"),
                     help="take proportions from the sentence counts of a reference split")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--stratify", action="store_true", help="keep proportions within each genre")
    s.add_argument("--by-document", action="store_true", help=argparse.SUPPRESS)
    s.add_argument("--genre-map")
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("cross-genre", parents=[fmt], help="genre-restricted training sets")
    s.add_argument("--train", required=True)
    s.add_argument("--dev", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--mode", required=True, help="single:GENRE or loo:GENRE")
    s.add_argument("--dev-genre")
    s.add_argument("--genre-map")
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_cross_genre)

    s = sub.add_parser("overlap", parents=[fmt], help="train/test entity-token overlap")
    s.add_argument("--train", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--type", required=True)
    s.add_argument("--json", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_overlap)

    s = sub.add_parser("aggregate", help="mean/sd/min/max of per-run scores")
    s.add_argument("--values", required=True, help="one number per line")
    s.add_argument("--label", default="run")
    out = s.add_mutually_exclusive_group()
    out.add_argument("--json", action="store_true")
    out.add_argument("--md", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_aggregate)

    s = sub.add_parser("ttest", help="two-tailed paired t-test")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--alpha", type=float)
    s.add_argument("--json", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_ttest)

    s = sub.add_parser("compare", help="per-group deltas between two JSON score reports")
    s.add_argument("--baseline", required=True)
    s.add_argument("--candidate", required=True)
    out = s.add_mutually_exclusive_group()
    out.add_argument("--json", action="store_true")
    out.add_argument("--csv", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_compare)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"nerprobe: error: {e}", file=sys.stderr)
        return 2
    except SystemExit as e:  # --help / --version
        return e.code if isinstance(e.code, int) else 0
    except (NerProbeError, UnicodeDecodeError) as e:
        print(f"nerprobe: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"nerprobe: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
