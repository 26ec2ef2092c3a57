"""Random corpus generators and independent reference implementations.

Nothing here imports the decoding or matching code under test: the oracles
are written from the conlleval chunk rules directly.
"""

import random

from nerprobe.corpus import Corpus, Sentence, Token

WORDS = ["the", "a", "Paris", "John", "Smith", "said", "in", "of", "Bank", ",", ".", "Mary",
         "visited", "New", "York", "Kostunica", "Dodo", "on", "Monday", "UN"]
SOURCES = ["bc", "bn", "mz", "nw", "tc", "wb"]


def random_tags(rng: random.Random, n: int, types=("PER", "GPE", "ORG"), p_o=0.5):
    """Arbitrary valid labels, including dangling I- tags and type switches."""
    out = []
    for _ in range(n):
        if rng.random() < p_o:
            out.append("O")
        else:
            out.append(rng.choice("BI") + "-" + rng.choice(types))
    return out


def random_sentence_tags(rng, max_tokens=12, **kw):
    return random_tags(rng, rng.randint(1, max_tokens), **kw)


def random_corpus(rng: random.Random, max_sents=6, max_tokens=12, types=("PER", "GPE", "ORG"),
                  sources=SOURCES, min_sents=0):
    """Sentences grouped into OntoNotes-style documents with consistent sources."""
    sents = []
    n = rng.randint(min_sents, max_sents)
    doc_no, idx, doc_id, src = 0, 0, None, None
    for _ in range(n):
        if doc_id is None or rng.random() < 0.3:
            src = rng.choice(sources)
            doc_id = f"{src}/d/{doc_no:04d}"
            doc_no += 1
            idx = 0
        k = rng.randint(1, max_tokens)
        tags = random_tags(rng, k, types)
        toks = tuple(Token(rng.choice(WORDS), t) for t in tags)
        sents.append(Sentence(toks, doc_id, src, idx))
        idx += 1
    return Corpus(tuple(sents))


def wild_corpus(rng: random.Random, max_sents=6, max_tokens=8):
    """Corpora that stress serialization: gaps in indices, interleaved
    documents, sources unrelated to doc ids, empty doc ids."""
    used = set()
    sents = []
    for _ in range(rng.randint(0, max_sents)):
        while True:
            doc = rng.choice(["", "bn/x/1", "nw/y/2", "plain", "tc/z", "doc1"])
            idx = rng.randint(0, 4)
            if (doc, idx) not in used:
                used.add((doc, idx))
                break
        src = rng.choice(SOURCES + ["unknown", "bn"])
        toks = tuple(Token(rng.choice(WORDS + ["#", "-X-", "_"]), t)
                     for t in random_tags(rng, rng.randint(1, max_tokens)))
        sents.append(Sentence(toks, doc, src, idx))
    return Corpus(tuple(sents))


def same_shape_prediction(rng: random.Random, gold: Corpus, types=("PER", "GPE", "ORG")):
    """A prediction aligned with ``gold``: either a noisy copy or fresh random tags."""
    out = []
    for s in gold.sentences:
        if rng.random() < 0.5:
            tags = [t if rng.random() < 0.8 else rng.choice(["O", "B-PER", "I-GPE", "B-ORG"])
                    for t in s.tags]
        else:
            tags = random_tags(rng, len(s), types)
        out.append(Sentence(tuple(Token(w, t) for w, t in zip(s.words, tags)),
                            s.doc_id, s.source, s.index))
    return Corpus(tuple(out))


# ---------------------------------------------------------------- oracles

def _split(tag):
    return ("O", None) if tag == "O" else (tag[0], tag[2:])


def _chunk_end(prev, cur):
    p1, t1 = _split(prev)
    p2, t2 = _split(cur)
    if p1 == "O":
        return False
    if p2 == "O":
        return True
    return t1 != t2 or p2 == "B"


def _chunk_start(prev, cur):
    p1, t1 = _split(prev)
    p2, t2 = _split(cur)
    if p2 == "O":
        return False
    if p1 == "O":
        return True
    return t1 != t2 or p2 == "B"


def reference_chunks(tags):
    """conlleval-style chunk extraction: list of (type, start, end)."""
    chunks = []
    start = None
    prev = "O"
    for i, tag in enumerate(list(tags) + ["O"]):
        if start is not None and _chunk_end(prev, tag):
            chunks.append((_split(prev)[1], start, i))
            start = None
        if _chunk_start(prev, tag):
            start = i
        prev = tag
    return chunks


def brute_force_counts(gold_tag_seqs, pred_tag_seqs):
    """Enumerate every gold/pred chunk pair per sentence; greedy one-to-one
    matching on identical triples. Returns ({type: [tp, fp, fn]}, [tp, fp, fn])."""
    per_type = {}
    for g_tags, p_tags in zip(gold_tag_seqs, pred_tag_seqs):
        gold = reference_chunks(g_tags)
        pred = reference_chunks(p_tags)
        used = [False] * len(gold)
        for pc in pred:
            hit = False
            for j, gc in enumerate(gold):
                if not used[j] and gc == pc:
                    used[j] = True
                    hit = True
                    break
            per_type.setdefault(pc[0], [0, 0, 0])[0 if hit else 1] += 1
        for j, gc in enumerate(gold):
            if not used[j]:
                per_type.setdefault(gc[0], [0, 0, 0])[2] += 1
    total = [sum(v[i] for v in per_type.values()) for i in range(3)]
    return per_type, total


def oracle_prf(tp, fp, fn):
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return p, r, (2 * p * r / (p + r) if p + r else 0.0)


def synthetic_pair(n_tokens: int, seed: int = 0):
    """A large gold/pred pair of roughly ``n_tokens`` tokens (20 per sentence)."""
    rng = random.Random(seed)
    gold, pred = [], []
    per = 20
    for i in range(n_tokens // per):
        g = random_tags(rng, per, p_o=0.7)
        p = [t if rng.random() < 0.9 else "O" for t in g]
        words = [WORDS[(i + k) % len(WORDS)] for k in range(per)]
        src = SOURCES[i % 6]
        doc = f"{src}/syn/{i // 50}"
        gold.append(Sentence(tuple(map(Token, words, g)), doc, src, i % 50))
        pred.append(Sentence(tuple(map(Token, words, p)), doc, src, i % 50))
    return Corpus(tuple(gold)), Corpus(tuple(pred))


# ---------------------------------------------------------------- CLI fixtures

def every_source(rng, sources):
    """A random corpus guaranteed to contain each of ``sources``."""
    return Corpus(tuple(s for src in sources
                        for s in random_corpus(rng, 5, min_sents=2, sources=[src]).sentences))


def cli_workspace(root):
    """Write a small gold/pred/train/dev/test set and score files under ``root``."""
    from nerprobe.corpus import write_conll

    rng = random.Random(5)
    gold = random_corpus(rng, max_sents=20, min_sents=12, sources=["bn", "tc", "bc", "wb"])
    files = {
        "gold.conll": write_conll(gold),
        "pred.conll": write_conll(same_shape_prediction(rng, gold)),
        "train.conll": write_conll(every_source(rng, ["bn", "nw", "tc", "bc", "wb"])),
        "dev.conll": write_conll(every_source(rng, ["bn", "tc", "bc", "wb"])),
        "a.txt": "88.1\n89.0\n87.5\n88.9\n",
        "b.txt": "87.0\n88.8\n86.1\n88.0\n",
    }
    for name, text in files.items():
        (root / name).write_text(text, encoding="utf-8")
    return root


def cli_invocations(ws, out):
    """One argv per subcommand; every output lands under ``out``."""
    g, p = str(ws / "gold.conll"), str(ws / "pred.conll")
    return {
        "score": ["score", "--gold", g, "--pred", p, "--group-by", "genre", "--json",
                  "--out", str(out / "score.json")],
        "score_md": ["score", "--gold", g, "--pred", p, "--group-by", "source", "--md"],
        "perturb": ["perturb", "--in", g, "--rule", "perturb_2", "--seed", "3",
                    "--out", str(out / "adv.conll"), "--manifest", str(out / "plan.json")],
        "split": ["split", "--in", str(ws / "train.conll"), "--proportions", "0.8,0.1,0.1",
                  "--seed", "1", "--n", "3", "--out-dir", str(out / "splits")],
        "cross-genre": ["cross-genre", "--train", str(ws / "train.conll"), "--dev", str(ws / "dev.conll"),
                        "--test", g, "--mode", "loo:tc", "--out-dir", str(out / "xg")],
        "overlap": ["overlap", "--train", str(ws / "train.conll"), "--test", g, "--type", "PER"],
        "aggregate": ["aggregate", "--values", str(ws / "a.txt"), "--md"],
        "ttest": ["ttest", "--a", str(ws / "a.txt"), "--b", str(ws / "b.txt"), "--alpha", "0.05"],
        "compare": ["compare", "--baseline", str(out / "score.json"),
                    "--candidate", str(out / "score.json")],
    }


def snapshot(root):
    """Relative path -> bytes for every file below ``root``."""
    return {str(f.relative_to(root)): f.read_bytes() for f in sorted(root.rglob("*")) if f.is_file()}
