"""Corpus and query ingestion, tokenization, and synthetic benchmark generation.

Documents and queries are whitespace-tokenized word sequences over a dense
integer vocabulary. Sentence boundaries are detected from terminal
punctuation before punctuation is stripped, so they survive into the token
space where sentence-level edits need them.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import CorpusError

UNK_ID = 0
UNK_TOKEN = "<unk>"

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_WORD = re.compile(r"[a-z0-9']+")


@dataclass
class Document:
    id: str
    text: str
    tokens: np.ndarray
    sentence_bounds: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class Query:
    id: str
    text: str
    tokens: np.ndarray
    topic: int | None = None

    def __len__(self) -> int:
        return len(self.tokens)


class Vocabulary:
    """Dense token<->id bijection with id 0 reserved for unknown tokens."""

    def __init__(self, tokens: list[str], counts: list[int]):
        if tokens[0] != UNK_TOKEN:
            raise ValueError("token 0 must be the reserved unknown token")
        self.tokens = list(tokens)
        self.counts = np.asarray(counts, dtype=np.int64)
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ValueError("duplicate token in vocabulary")

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        return self.index.get(token, UNK_ID)

    def token_of(self, token_id: int) -> str:
        return self.tokens[token_id]

    def decode(self, token_ids) -> str:
        return " ".join(self.tokens[t] for t in token_ids)

    @classmethod
    def from_texts(cls, texts) -> "Vocabulary":
        counts: dict[str, int] = {}
        for text in texts:
            for word in normalize_words(text):
                counts[word] = counts.get(word, 0) + 1
        # frequency-descending, then alphabetical: deterministic ids
        ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        tokens = [UNK_TOKEN] + [tok for tok, _ in ordered]
        return cls(tokens, [0] + [c for _, c in ordered])

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# rankattack-vocab v1\n")
            for tok, cnt in zip(self.tokens, self.counts):
                fh.write(f"{tok}\t{int(cnt)}\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != "# rankattack-vocab v1":
                raise CorpusError(f"unrecognized vocabulary file header: {header!r}")
            tokens, counts = [], []
            for line in fh:
                tok, cnt = line.rstrip("\n").split("\t")
                tokens.append(tok)
                counts.append(int(cnt))
        return cls(tokens, counts)


def normalize_words(text: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace."""
    return _WORD.findall(text.lower())


def split_sentences(text: str) -> list[str]:
    parts = _SENTENCE_SPLIT.split(text.strip())
    return [p for p in parts if p.strip()]


def tokenize(text: str, vocab: Vocabulary) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Map text to token ids plus sentence bounds covering [0, len) exactly.

    Sentences are delimited by terminal punctuation (. ! ?); text without
    any becomes a single sentence. Unknown words map to the reserved id 0.
    """
    ids: list[int] = []
    bounds: list[tuple[int, int]] = []
    for sentence in split_sentences(text):
        words = normalize_words(sentence)
        if not words:
            continue
        start = len(ids)
        ids.extend(vocab.id_of(w) for w in words)
        bounds.append((start, len(ids)))
    return np.asarray(ids, dtype=np.int64), bounds


def _truncate_bounds(bounds: list[tuple[int, int]], limit: int) -> list[tuple[int, int]]:
    out = []
    for start, end in bounds:
        if start >= limit:
            break
        out.append((start, min(end, limit)))
    return out


def ingest_corpus(path, max_doc_len: int = 512) -> tuple[list[Document], Vocabulary]:
    """Load a JSONL corpus (one {"id", "text"} record per line).

    The vocabulary is built from the full corpus before tokenization, so the
    result is a pure function of the input bytes.
    """
    records: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed record ({exc.msg})") from exc
            if not isinstance(rec, dict) or "id" not in rec or "text" not in rec:
                raise CorpusError(f"{path}:{lineno}: record must have id and text fields")
            doc_id = str(rec["id"])
            if doc_id in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate id {doc_id!r}")
            seen.add(doc_id)
            records.append((doc_id, str(rec["text"])))

    vocab = Vocabulary.from_texts(text for _, text in records)
    docs = []
    for doc_id, text in records:
        tokens, bounds = tokenize(text, vocab)
        if len(tokens) == 0:
            raise CorpusError(f"empty document: {doc_id!r}")
        if len(tokens) > max_doc_len:
            tokens = tokens[:max_doc_len]
            bounds = _truncate_bounds(bounds, max_doc_len)
        docs.append(Document(id=doc_id, text=text, tokens=tokens, sentence_bounds=bounds))
    return docs, vocab


def load_queries(path, vocab: Vocabulary) -> list[Query]:
    queries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed record ({exc.msg})") from exc
            tokens, _ = tokenize(str(rec["text"]), vocab)
            if len(tokens) == 0:
                raise CorpusError(f"{path}:{lineno}: empty query {rec.get('id')!r}")
            queries.append(
                Query(id=str(rec["id"]), text=str(rec["text"]), tokens=tokens,
                      topic=rec.get("topic"))
            )
    return queries


def write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def relevance_grade(doc_text: str, query_text: str) -> int:
    """Occurrences of query terms in the document, clipped to [0, 3]."""
    terms = set(normalize_words(query_text))
    hits = sum(1 for w in normalize_words(doc_text) if w in terms)
    return min(hits, 3)


def write_qrels(path, queries, docs) -> None:
    """Whitespace-separated "query_id doc_id grade" lines; zero grades omitted."""
    with open(path, "w", encoding="utf-8") as fh:
        for q in queries:
            for d in docs:
                grade = relevance_grade(d["text"] if isinstance(d, dict) else d.text,
                                        q["text"] if isinstance(q, dict) else q.text)
                if grade > 0:
                    qid = q["id"] if isinstance(q, dict) else q.id
                    did = d["id"] if isinstance(d, dict) else d.id
                    fh.write(f"{qid} {did} {grade}\n")


def read_qrels(path) -> dict[tuple[str, str], int]:
    grades = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            qid, did, grade = line.split()
            grades[(qid, did)] = int(grade)
    return grades


# ---------------------------------------------------------------------------
# Synthetic benchmark generation
# ---------------------------------------------------------------------------

_CONSONANTS = "bcdfgklmnprstvz"
_VOWELS = "aeiou"


def _pseudo_word(rng: np.random.Generator) -> str:
    n_syll = int(rng.integers(2, 4))
    parts = []
    for _ in range(n_syll):
        parts.append(_CONSONANTS[rng.integers(len(_CONSONANTS))])
        parts.append(_VOWELS[rng.integers(len(_VOWELS))])
    return "".join(parts)


@dataclass
class SyntheticData:
    doc_records: list[dict]
    query_records: list[dict]
    topic_pools: list[list[str]]
    n_topics: int

    def grades(self) -> dict[tuple[str, str], int]:
        out = {}
        for q in self.query_records:
            for d in self.doc_records:
                g = relevance_grade(d["text"], q["text"])
                if g > 0:
                    out[(q["id"], d["id"])] = g
        return out


def _make_term_pools(rng: np.random.Generator, n_topics: int, vocab_size: int) -> list[list[str]]:
    words: list[str] = []
    seen = set()
    while len(words) < vocab_size:
        w = _pseudo_word(rng)
        if w not in seen and w != "unk":
            seen.add(w)
            words.append(w)
    per_topic = vocab_size // n_topics
    return [words[i * per_topic:(i + 1) * per_topic] for i in range(n_topics)]


def _zipf_weights(n: int) -> np.ndarray:
    w = 1.0 / (np.arange(n) + 1.0)
    return w / w.sum()


def generate_synthetic_corpus(
    seed: int,
    n_docs: int,
    n_queries: int,
    n_topics: int,
    vocab_size: int,
    min_doc_words: int = 60,
    max_doc_words: int = 140,
) -> SyntheticData:
    """Generate a topic-structured corpus with graded query relevance.

    Each topic owns a disjoint term pool; documents mix 1-3 topics; queries
    sample 2-4 distinct terms from a single topic. The output is a pure
    function of the arguments (identical seeds give byte-identical files).
    """
    if n_topics < 2:
        raise ValueError("n_topics must be >= 2")
    if vocab_size < 50 * n_topics:
        raise ValueError("vocab_size must be >= 50 * n_topics")
    if min_doc_words < 10 or max_doc_words < min_doc_words:
        raise ValueError("bad document length range")

    rng = np.random.default_rng(seed)
    pools = _make_term_pools(rng, n_topics, vocab_size)

    doc_records = []
    used_terms: set[str] = set()
    for i in range(n_docs):
        k_topics = int(rng.integers(1, 4))
        topics = rng.choice(n_topics, size=min(k_topics, n_topics), replace=False)
        terms: list[str] = []
        weights: list[float] = []
        for t in topics:
            pool = pools[int(t)]
            terms.extend(pool)
            weights.extend(_zipf_weights(len(pool)) / len(topics))
        weights_arr = np.asarray(weights)
        weights_arr = weights_arr / weights_arr.sum()
        total = int(rng.integers(min_doc_words, max_doc_words + 1))
        sentences = []
        written = 0
        while written < total:
            n_words = int(rng.integers(6, 13))
            n_words = min(n_words, total - written)
            if n_words < 3:
                n_words = 3
            picks = rng.choice(len(terms), size=n_words, p=weights_arr)
            sentences.append(" ".join(terms[j] for j in picks) + ".")
            written += n_words
        text = " ".join(sentences)
        used_terms.update(normalize_words(text))
        doc_records.append({"id": f"d{i:04d}", "text": text})

    query_records = []
    for i in range(n_queries):
        topic = int(rng.integers(n_topics))
        # only terms that actually occur in the corpus, so queries never go OOV
        pool = [w for w in pools[topic] if w in used_terms]
        if len(pool) < 4:
            pool = pools[topic]
        weights_arr = _zipf_weights(len(pool))
        n_terms = int(rng.integers(2, 5))
        picks = rng.choice(len(pool), size=min(n_terms, len(pool)), replace=False, p=weights_arr)
        text = " ".join(pool[j] for j in picks)
        query_records.append({"id": f"q{i:03d}", "text": text, "topic": topic})

    return SyntheticData(doc_records=doc_records, query_records=query_records,
                         topic_pools=pools, n_topics=n_topics)


def generate_topic_queries(
    synth: SyntheticData, topics: list[int], n: int, seed: int, id_prefix: str = "x"
) -> list[dict]:
    """Sample additional queries restricted to the given topics."""
    rng = np.random.default_rng(seed)
    used = set()
    for d in synth.doc_records:
        used.update(normalize_words(d["text"]))
    records = []
    for i in range(n):
        topic = int(topics[int(rng.integers(len(topics)))])
        pool = [w for w in synth.topic_pools[topic] if w in used]
        if len(pool) < 4:
            pool = synth.topic_pools[topic]
        weights = _zipf_weights(len(pool))
        n_terms = int(rng.integers(2, 5))
        picks = rng.choice(len(pool), size=min(n_terms, len(pool)), replace=False, p=weights)
        records.append({"id": f"{id_prefix}{i:03d}",
                        "text": " ".join(pool[j] for j in picks),
                        "topic": topic})
    return records
