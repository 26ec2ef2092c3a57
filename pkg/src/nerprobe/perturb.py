"""Adversarial test sets by seeded entity substitution.

A rule picks a target entity type and a generator. Planning walks the
corpus in order, decodes mentions, and draws a same-length replacement for
every target mention. Applying a plan only swaps surfaces: sentence
lengths, tags, doc ids and every other token stay as they were.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Sequence, TextIO

from . import SCHEMA_VERSION
from .corpus import Corpus, Sentence, Token
from .errors import LexiconCoverageError, ParseError, PlanError
from .rng import SplitMix64
from .spans import decode_mentions

KINDS = ("first", "last", "place", "suffix")
GENDERS = ("F", "M", "any")
CONSISTENCY = ("surface", "occurrence")


class LexiconEntry(NamedTuple):
    surface: str
    kind: str
    gender: str
    locale: str


class Lexicon:
    """Name pools indexed by (locale, kind, gender).

    Gender ``"any"`` as a filter selects every entry; ``"F"`` or ``"M"``
    selects entries of that gender plus entries marked ``any``. Bucket order
    is file order.
    """

    def __init__(self, entries: Sequence[LexiconEntry] = ()):
        self.entries = tuple(dict.fromkeys(entries))
        self._buckets: dict[tuple[str, str, str], tuple[str, ...]] = {}

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, Lexicon) and self.entries == other.entries

    def bucket(self, locale: str, kind: str, gender: str = "any") -> tuple[str, ...]:
        key = (locale, kind, gender)
        if key not in self._buckets:
            ok = GENDERS if gender == "any" else (gender, "any")
            self._buckets[key] = tuple(
                e.surface for e in self.entries
                if e.locale == locale and e.kind == kind and e.gender in ok
            )
        return self._buckets[key]

    def require(self, locale: str, kind: str, gender: str = "any") -> tuple[str, ...]:
        pool = self.bucket(locale, kind, gender)
        if not pool:
            raise LexiconCoverageError(locale, kind, gender)
        return pool

    @cached_property
    def surfaces(self) -> frozenset[str]:
        return frozenset(e.surface for e in self.entries)


def load_lexicon(stream: TextIO | str) -> Lexicon:
    """Parse ``surface<TAB>kind<TAB>gender<TAB>locale`` lines.

    Blank lines and ``#`` comments are skipped; duplicates collapse onto
    their first occurrence.
    """
    if isinstance(stream, str):
        stream = stream.splitlines()
    entries = []
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ParseError(f"expected 4 tab-separated fields, found {len(parts)}", lineno)
        surface, kind, gender, locale = parts
        if not surface or any(ch.isspace() for ch in surface):
            raise ParseError(f"bad surface {surface!r}", lineno)
        if kind not in KINDS:
            raise ParseError(f"bad kind {kind!r} (expected one of {', '.join(KINDS)})", lineno)
        if gender not in GENDERS:
            raise ParseError(f"bad gender {gender!r} (expected one of {', '.join(GENDERS)})", lineno)
        if not locale:
            raise ParseError("empty locale", lineno)
        entries.append(LexiconEntry(surface, kind, gender, locale))
    return Lexicon(entries)


def default_lexicon() -> Lexicon:
    """The bundled starter pools for en_US, en_IN, en_TH and en_IE."""
    text = resources.files("nerprobe").joinpath("data/lexicon_en.tsv").read_text(encoding="utf-8")
    return load_lexicon(text)


def gen_person(lex: Lexicon, locale: str, gender: str, n_tokens: int, rng: SplitMix64) -> list[str]:
    """One first name, then a last name for every further token."""
    if n_tokens < 1:
        raise ValueError("n_tokens must be positive")
    out = [rng.choice(lex.require(locale, "first", gender))]
    if n_tokens > 1:
        lasts = lex.require(locale, "last", gender)
        out.extend(rng.choice(lasts) for _ in range(n_tokens - 1))
    return out


def gen_gpe(lex: Lexicon, locale: str, n_tokens: int, rng: SplitMix64) -> list[str]:
    """One place name, then a place suffix for every further token."""
    if n_tokens < 1:
        raise ValueError("n_tokens must be positive")
    out = [rng.choice(lex.require(locale, "place"))]
    if n_tokens > 1:
        suffixes = lex.require(locale, "suffix")
        out.extend(rng.choice(suffixes) for _ in range(n_tokens - 1))
    return out


@dataclass(frozen=True)
class FixedToken:
    token: str

    def generate(self, lex: Lexicon, n: int, rng: SplitMix64) -> list[str]:
        return [self.token] * n


@dataclass(frozen=True)
class PersonName:
    locale: str
    gender: str = "any"

    def __post_init__(self):
        if self.gender not in GENDERS:
            raise ValueError(f"bad gender filter {self.gender!r}")

    def generate(self, lex: Lexicon, n: int, rng: SplitMix64) -> list[str]:
        return gen_person(lex, self.locale, self.gender, n, rng)


@dataclass(frozen=True)
class GpeName:
    locale: str

    def generate(self, lex: Lexicon, n: int, rng: SplitMix64) -> list[str]:
        return gen_gpe(lex, self.locale, n, rng)


_GENERATORS = {"fixed": FixedToken, "person": PersonName, "gpe": GpeName}


@dataclass(frozen=True)
class PerturbationRule:
    rule_id: str
    target_type: str
    generator: FixedToken | PersonName | GpeName
    consistency: str = "surface"

    def __post_init__(self):
        if self.consistency not in CONSISTENCY:
            raise ValueError(f"consistency must be one of {CONSISTENCY}")
        if isinstance(self.generator, FixedToken) and (
                not self.generator.token or any(ch.isspace() for ch in self.generator.token)):
            raise ValueError("fixed token must be a non-empty single token")

    def with_consistency(self, consistency: str) -> "PerturbationRule":
        return PerturbationRule(self.rule_id, self.target_type, self.generator, consistency)

    def to_dict(self) -> dict:
        kind = next(k for k, cls in _GENERATORS.items() if isinstance(self.generator, cls))
        return {
            "rule_id": self.rule_id,
            "target_type": self.target_type,
            "generator": {"kind": kind, **asdict(self.generator)},
            "consistency": self.consistency,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PerturbationRule":
        try:
            gen = dict(d["generator"])
            gen_cls = _GENERATORS[gen.pop("kind")]
            return cls(d["rule_id"], d["target_type"], gen_cls(**gen),
                       d.get("consistency", "surface"))
        except (KeyError, TypeError) as e:
            raise ParseError(f"malformed rule specification: {e}") from None


def builtin_rules() -> list[PerturbationRule]:
    return [
        PerturbationRule("perturb_1", "PER", FixedToken("Dodo")),
        PerturbationRule("perturb_2", "PER", PersonName("en_US", "any")),
        PerturbationRule("perturb_3", "PER", PersonName("en_IN", "any")),
        PerturbationRule("perturb_4", "PER", PersonName("en_TH", "F")),
        PerturbationRule("perturb_5", "PER", PersonName("en_IN", "F")),
        PerturbationRule("perturb_6", "GPE", GpeName("en_IE")),
    ]


def get_rule(name: str) -> PerturbationRule:
    for r in builtin_rules():
        if r.rule_id == name.lower().replace(".", "_"):
            return r
    raise KeyError(f"no built-in rule named {name!r}")


class Substitution(NamedTuple):
    sentence: int
    doc_id: str
    index: int
    start: int
    end: int
    original: tuple[str, ...]
    replacement: tuple[str, ...]


@dataclass(frozen=True)
class SubstitutionPlan:
    rule_id: str
    seed: int
    substitutions: tuple[Substitution, ...]

    def __len__(self):
        return len(self.substitutions)

    def to_json(self, rule: PerturbationRule | None = None) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "substitution_plan",
            "rule_id": self.rule_id,
            "seed": self.seed,
            "substitutions": [s._asdict() for s in self.substitutions],
        }
        if rule is not None:
            doc["rule"] = rule.to_dict()
        return json.dumps(doc, sort_keys=True, ensure_ascii=False, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SubstitutionPlan":
        doc = json.loads(text)
        subs = tuple(
            Substitution(s["sentence"], s["doc_id"], s["index"], s["start"], s["end"],
                         tuple(s["original"]), tuple(s["replacement"]))
            for s in doc["substitutions"]
        )
        return cls(doc["rule_id"], doc["seed"], subs)


def plan(c: Corpus, rule: PerturbationRule, lex: Lexicon, seed: int) -> SubstitutionPlan:
    """Draw a replacement for every mention of the rule's target type.

    With ``surface`` consistency the first replacement drawn for an original
    surface form is reused for every later occurrence in the corpus.
    """
    rng = SplitMix64(seed)
    b_tag, i_tag = "B-" + rule.target_type, "I-" + rule.target_type
    memo: dict[tuple[str, ...], tuple[str, ...]] = {}
    subs = []
    for si, s in enumerate(c.sentences):
        tags = s.tags
        if b_tag not in tags and i_tag not in tags:
            continue
        words = s.words
        for m in decode_mentions(tags, words):
            if m.entity_type != rule.target_type:
                continue
            if rule.consistency == "surface" and m.surface in memo:
                repl = memo[m.surface]
            else:
                repl = tuple(rule.generator.generate(lex, len(m), rng))
                if rule.consistency == "surface":
                    memo[m.surface] = repl
            subs.append(Substitution(si, s.doc_id, s.index, m.start, m.end, m.surface, repl))
    return SubstitutionPlan(rule.rule_id, seed, tuple(subs))


def apply(c: Corpus, p: SubstitutionPlan) -> Corpus:
    by_sentence: dict[int, list[Substitution]] = {}
    for sub in p.substitutions:
        by_sentence.setdefault(sub.sentence, []).append(sub)
    sentences = list(c.sentences)
    for si, subs in by_sentence.items():
        if not 0 <= si < len(sentences):
            raise PlanError(f"plan refers to sentence {si}, corpus has {len(sentences)}")
        s = sentences[si]
        if (s.doc_id, s.index) != (subs[0].doc_id, subs[0].index):
            raise PlanError(f"sentence {si} is ({s.doc_id!r}, {s.index}), "
                            f"plan expects ({subs[0].doc_id!r}, {subs[0].index})")
        tokens = list(s.tokens)
        prev_end = 0
        for sub in sorted(subs, key=lambda x: x.start):
            if sub.start < prev_end or not 0 <= sub.start < sub.end <= len(tokens):
                raise PlanError(f"sentence {si}: bad or overlapping range [{sub.start}, {sub.end})")
            if len(sub.replacement) != sub.end - sub.start:
                raise PlanError(f"sentence {si}: replacement length differs from mention length")
            for k, word in enumerate(sub.replacement):
                tokens[sub.start + k] = Token(word, tokens[sub.start + k].tag)
            prev_end = sub.end
        sentences[si] = Sentence(tuple(tokens), s.doc_id, s.source, s.index)
    return Corpus(tuple(sentences))


def perturb(c: Corpus, rule: PerturbationRule, lex: Lexicon | None = None,
            seed: int = 0) -> tuple[Corpus, SubstitutionPlan]:
    p = plan(c, rule, lex if lex is not None else default_lexicon(), seed)
    return apply(c, p), p


def replacement_novelty(p: SubstitutionPlan, train: Corpus) -> float | None:
    """Share of replacement token instances whose surface never occurs in ``train``.

    None when the plan is empty.
    """
    vocab = {t.surface for s in train.sentences for t in s.tokens}
    toks = [w for sub in p.substitutions for w in sub.replacement]
    if not toks:
        return None
    return sum(w not in vocab for w in toks) / len(toks)


def load_rule(path: str | Path) -> PerturbationRule:
    return PerturbationRule.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
