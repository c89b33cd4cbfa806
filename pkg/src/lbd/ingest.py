"""Corpus loading, sentence splitting, and typed tokenization.

Raw documents become sentences, and each sentence becomes a multiset of
typed tokens: controlled-vocabulary codes (``m:``), entity phrases
(``e:``), frequent n-grams (``n:``), and lemmas (``l:``). Coded and
entity matches never suppress the lemmas of their constituent words;
both token layers coexist.
"""

import json
import re
from collections import Counter
from dataclasses import dataclass, field

from .errors import DuplicateDocId, IoFailure, MalformedRecord

# ~150 English function words. Constituents of n-grams and lemma
# candidates are filtered against this list.
STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because
been before being below between both but by can cannot could did do does
doing down during each few for from further had has have having he her
here hers herself him himself his how i if in into is it its itself just
me more most my myself no nor not now of off on once only or other our
ours ourselves out over own same she should so some such than that the
their theirs them themselves then there these they this those through to
too under until up upon very was we were what when where which while who
whom why will with within without would you your yours yourself yourselves
also among amongst another anyone anything around became become becomes
beside besides beyond done due either else elsewhere enough
even ever every everyone everything except get gets give goes got hence
however instead latter least less many may meanwhile might much must
neither never nevertheless next none nonetheless nothing often otherwise
per perhaps rather same several shall since somehow something sometimes
somewhere still take than therefore thus toward towards unless unlike
us used using various via well whatever whenever whereas wherever whether
yet
""".split())

_ABBREVIATIONS = ("e.g.", "i.e.", "et al.", "Dr.", "vs.")

_WORD_RE = re.compile(r"[a-z0-9]+")

_TOKEN_KEY_RE = re.compile(
    r"^(?:"
    r"l:[a-z]+:[a-z0-9]+"
    r"|n:[a-z0-9]+_[a-z0-9]+(?:_[a-z0-9]+)?"
    r"|e:[a-z0-9]+(?:_[a-z0-9]+)*"
    r"|m:[a-z0-9]+"
    r")$"
)


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    body: str


@dataclass(frozen=True)
class Sentence:
    sent_id: str
    text: str
    doc_id: str


@dataclass(frozen=True)
class VocabEntry:
    code: str
    canonical_name: str
    synonyms: tuple


@dataclass
class Vocabulary:
    entries: list

    def __post_init__(self):
        self._by_code = {e.code: e for e in self.entries}

    def label_of(self, code):
        entry = self._by_code.get(code)
        return entry.canonical_name if entry is not None else code

    def codes(self):
        return sorted(self._by_code)

    def __contains__(self, code):
        return code in self._by_code


@dataclass(frozen=True)
class Token:
    key: str
    type: str
    surface: str


@dataclass
class TokenSet:
    sent_id: str
    counts: Counter = field(default_factory=Counter)

    def add(self, key, n=1):
        self.counts[key] += n

    def __len__(self):
        return len(self.counts)

    def __eq__(self, other):
        return (self.sent_id, self.counts) == (other.sent_id, other.counts)


def token_type_of(key):
    """Token class from the key prefix."""
    prefix = key.split(":", 1)[0]
    return {"l": "lemma", "n": "ngram", "e": "entity", "m": "coded"}[prefix]


def is_valid_token_key(key):
    return _TOKEN_KEY_RE.match(key) is not None


def load_corpus(path):
    """Read a JSON-lines corpus: one document object per line."""
    docs = []
    seen = set()
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    doc = Document(rec["doc_id"], rec.get("title", ""), rec.get("body", ""))
                except (ValueError, KeyError, TypeError) as exc:
                    raise MalformedRecord(line_no, str(exc)) from exc
                if not doc.doc_id:
                    raise MalformedRecord(line_no, "empty doc_id")
                if doc.doc_id in seen:
                    raise DuplicateDocId(doc.doc_id)
                seen.add(doc.doc_id)
                docs.append(doc)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return docs


def load_vocabulary(path):
    """Read a tab-separated vocabulary: code, canonical_name, synonym."""
    rows = {}
    order = []
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise MalformedRecord(line_no, "expected 3 tab-separated columns")
                code, name, synonym = (p.strip() for p in parts)
                if code not in rows:
                    rows[code] = (name, [])
                    order.append(code)
                rows[code][1].append(synonym)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return Vocabulary([
        VocabEntry(code, rows[code][0], tuple(rows[code][1])) for code in order
    ])


def load_lexicon(path):
    """Read a one-phrase-per-line lexicon file."""
    try:
        with open(path, encoding="utf-8") as fh:
            return [line.strip().lower() for line in fh if line.strip()]
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def split_sentences(body):
    """Split text into sentence fragments.

    A sentence ends at '.', '!' or '?' followed by whitespace and an
    uppercase letter (or end of text). A fixed abbreviation list never
    terminates a sentence.
    """
    if not body or not body.strip():
        return []
    fragments = []
    start = 0
    i = 0
    n = len(body)
    while i < n:
        ch = body[i]
        if ch in ".!?":
            if _ends_with_abbreviation(body, i):
                i += 1
                continue
            # terminal iff followed by whitespace + uppercase, or end of text
            j = i + 1
            while j < n and body[j] in ".!?":
                j += 1
            k = j
            while k < n and body[k].isspace():
                k += 1
            if k >= n or (k > j and body[k].isupper()):
                frag = body[start:j].strip()
                if frag:
                    fragments.append(frag)
                start = k
                i = k
                continue
        i += 1
    tail = body[start:].strip()
    if tail:
        fragments.append(tail)
    return fragments


def _ends_with_abbreviation(text, dot_index):
    head = text[: dot_index + 1]
    return any(head.endswith(abbr) for abbr in _ABBREVIATIONS)


def sentences_of(doc):
    """Sentence records for one document, ids ``s:<doc_id>:<index>``."""
    text = doc.title.strip()
    fragments = split_sentences(doc.title) + split_sentences(doc.body)
    return [
        Sentence(f"s:{doc.doc_id}:{idx}", frag, doc.doc_id)
        for idx, frag in enumerate(fragments)
    ]


def normalize_words(text):
    """Lowercase and strip punctuation; returns the word sequence."""
    return _WORD_RE.findall(text.lower())


def lemmatize(word):
    """Rule-based suffix stripping: -s, -es, -ing, -ed."""
    stem = None
    if word.endswith("ing") and len(word) > 5:
        stem = word[:-3]
    elif word.endswith("ed") and len(word) > 4:
        stem = word[:-2]
    elif (len(word) > 4
          and word[-4:] in ("sses", "ches", "shes")
          or len(word) > 3 and word[-3:] in ("xes", "zes")):
        stem = word[:-2]
    elif word.endswith("s") and len(word) > 3 and not word.endswith("ss"):
        stem = word[:-1]
    if stem is None:
        return word
    if (
        len(stem) >= 3
        and stem[-1] == stem[-2]
        and stem[-1] not in "aeiouls"
    ):
        stem = stem[:-1]
    return stem if len(stem) >= 3 else word


def _phrase_index(phrases):
    """Map first word -> list of word tuples, longest first."""
    index = {}
    for phrase in phrases:
        words = tuple(normalize_words(phrase))
        if not words:
            continue
        index.setdefault(words[0], []).append(words)
    for head in index:
        index[head].sort(key=len, reverse=True)
    return index


def _longest_matches(words, index):
    """Non-overlapping longest matches of indexed phrases in a word list.

    Yields (position, matched word tuple); scanning resumes after each
    match so a longer phrase suppresses shorter ones within its span.
    """
    i = 0
    n = len(words)
    while i < n:
        hit = None
        for cand in index.get(words[i], ()):
            if tuple(words[i : i + len(cand)]) == cand:
                hit = cand
                break
        if hit is not None:
            yield i, hit
            i += len(hit)
        else:
            i += 1


def tokenize(sentence, vocab, entity_lexicon=(), ngram_list=(), pos_lexicon=None):
    """Typed token multiset for one sentence.

    Vocabulary synonyms (longest match) emit ``m:<code>``; entity
    phrases emit ``e:``; adjacent pairs/triples found in ngram_list emit
    ``n:``; every word of length >= 3 outside the stopword list emits a
    lemma token. Span matches do not suppress constituent lemmas.
    """
    pos_lexicon = pos_lexicon or {}
    ts = TokenSet(sentence.sent_id)
    words = normalize_words(sentence.text)
    if not words:
        return ts

    synonym_to_code = {}
    for entry in vocab.entries:
        for syn in entry.synonyms:
            synonym_to_code[tuple(normalize_words(syn))] = entry.code
    vocab_index = _phrase_index(
        [" ".join(k) for k in synonym_to_code]
    )
    for _, match in _longest_matches(words, vocab_index):
        ts.add(f"m:{synonym_to_code[match]}")

    entity_index = _phrase_index(entity_lexicon)
    for _, match in _longest_matches(words, entity_index):
        ts.add("e:" + "_".join(match))

    ngram_set = set(ngram_list)
    for size in (2, 3):
        for i in range(len(words) - size + 1):
            joined = "_".join(words[i : i + size])
            if joined in ngram_set:
                ts.add(f"n:{joined}")

    for word in words:
        if len(word) < 3 or word in STOPWORDS:
            continue
        lemma = lemmatize(word)
        pos = pos_lexicon.get(word) or pos_lexicon.get(lemma) or "noun"
        ts.add(f"l:{pos}:{lemma}")

    return ts


def build_ngram_list(word_sequences, min_count=2):
    """Underscore-joined bigrams/trigrams occurring >= min_count times.

    Stopwords are excluded as constituents; sequences are typically the
    normalized words of each corpus sentence.
    """
    if min_count < 2:
        raise ValueError("min_count must be >= 2")
    counts = Counter()
    for words in word_sequences:
        for size in (2, 3):
            for i in range(len(words) - size + 1):
                gram = words[i : i + size]
                if any(w in STOPWORDS for w in gram):
                    continue
                counts["_".join(gram)] += 1
    return sorted(g for g, c in counts.items() if c >= min_count)
