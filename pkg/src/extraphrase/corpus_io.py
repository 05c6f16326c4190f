"""Reading CoNLL-U parses and JSONL pair corpora; writing pair corpora."""

import json
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, TextIO

logger = logging.getLogger(__name__)

GENUINE = "genuine"
PSEUDO = "pseudo"
ORIGINS = (GENUINE, PSEUDO)


class ConlluError(ValueError):
    def __init__(self, message, lineno=None, sent_id=None):
        self.lineno = lineno
        self.sent_id = sent_id
        where = []
        if sent_id is not None:
            where.append(f"sentence {sent_id!r}")
        if lineno is not None:
            where.append(f"line {lineno}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class MalformedLine(ConlluError):
    pass


class InvalidTree(ConlluError):
    pass


class MalformedRecord(ValueError):
    def __init__(self, message, lineno):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    lemma: str
    upos: str
    head: int
    deprel: str

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"token index must be >= 1, got {self.index}")
        if self.head < 0:
            raise ValueError(f"token head must be >= 0, got {self.head}")
        if not self.form or any(c.isspace() for c in self.form):
            raise ValueError(f"token form must be non-empty without whitespace: {self.form!r}")


@dataclass
class Sentence:
    tokens: List[Token]
    text: Optional[str] = None
    sent_id: Optional[str] = None

    @property
    def raw_text(self) -> str:
        if self.text is not None:
            return self.text
        return " ".join(t.form for t in self.tokens)

    @property
    def forms(self) -> List[str]:
        return [t.form for t in self.tokens]

    def validate(self):
        """Raise InvalidTree unless indices are 1..n, there is one root and
        the head array is acyclic."""
        n = len(self.tokens)
        if n == 0:
            raise InvalidTree("empty sentence", sent_id=self.sent_id)
        for i, tok in enumerate(self.tokens, start=1):
            if tok.index != i:
                raise InvalidTree(f"token indices not contiguous at position {i} (found {tok.index})",
                                  sent_id=self.sent_id)
        roots = [t.index for t in self.tokens if t.head == 0]
        if len(roots) != 1:
            raise InvalidTree(f"expected exactly one root, found {len(roots)}", sent_id=self.sent_id)
        heads = [0] + [t.head for t in self.tokens]
        for tok in self.tokens:
            if tok.head == tok.index:
                raise InvalidTree(f"token {tok.index} is its own head", sent_id=self.sent_id)
            if tok.head > n:
                raise InvalidTree(f"token {tok.index} has out-of-range head {tok.head}",
                                  sent_id=self.sent_id)
        # 0 = unvisited, 1 = on current path, 2 = known to reach the root
        state = [0] * (n + 1)
        for start in range(1, n + 1):
            path = []
            node = start
            while node != 0 and state[node] == 0:
                state[node] = 1
                path.append(node)
                node = heads[node]
            if node != 0 and state[node] == 1:
                raise InvalidTree(f"cycle through token {node}", sent_id=self.sent_id)
            for p in path:
                state[p] = 2


@dataclass
class Document:
    id: str
    sentences: List[Sentence] = field(default_factory=list)

    @property
    def text(self) -> str:
        return " ".join(s.raw_text for s in self.sentences)


@dataclass(frozen=True)
class ParallelPair:
    id: str
    source: str
    target: str
    origin: str = GENUINE

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValueError(f"origin must be one of {ORIGINS}, got {self.origin!r}")
        if not self.source.strip():
            raise ValueError("source is empty")
        if not self.target.strip():
            raise ValueError("target is empty")


# -- CoNLL-U -----------------------------------------------------------------

_SENT_ID_SUFFIX = re.compile(r"[-_.:/]s?\d+$")


def sent_id_group(sent_id: str) -> str:
    """Document key for a sentence id: the id with a trailing numeric
    sentence counter removed ("doc7-s3" -> "doc7", "ab_0004" -> "ab")."""
    key = _SENT_ID_SUFFIX.sub("", sent_id)
    return key or sent_id


def _blocks(stream: TextIO) -> Iterator[tuple]:
    """Yield (first_line_number, [(lineno, line), ...]) per blank-line block."""
    block = []
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if line.strip() == "":
            if block:
                yield block[0][0], block
                block = []
        else:
            block.append((lineno, line))
    if block:
        yield block[0][0], block


def _parse_token(lineno, line):
    cols = line.split("\t")
    if len(cols) != 10:
        raise MalformedLine(f"expected 10 tab-separated columns, found {len(cols)}", lineno=lineno)
    idx = cols[0]
    if "-" in idx or "." in idx:
        return None
    try:
        index = int(idx)
    except ValueError:
        raise MalformedLine(f"non-integer token index {idx!r}", lineno=lineno) from None
    try:
        head = int(cols[6])
    except ValueError:
        raise MalformedLine(f"non-integer head {cols[6]!r}", lineno=lineno) from None
    try:
        return Token(index=index, form=cols[1], lemma=cols[2], upos=cols[3], head=head,
                     deprel=cols[7])
    except ValueError as exc:
        raise MalformedLine(str(exc), lineno=lineno) from None


def _parse_block(block):
    """Return (newdoc_id or None, Sentence). Raises ConlluError."""
    newdoc = None
    sent_id = None
    text = None
    tokens = []
    for lineno, line in block:
        if line.startswith("#"):
            body = line[1:].strip()
            key, eq, value = body.partition("=")
            key = key.strip()
            if key == "newdoc id" and eq:
                newdoc = value.strip()
            elif key == "newdoc":
                newdoc = value.strip() if eq else ""
            elif key == "sent_id" and eq:
                sent_id = value.strip()
            elif key == "text" and eq:
                text = value.strip()
            continue
        tok = _parse_token(lineno, line)
        if tok is not None:
            tokens.append(tok)
    sentence = Sentence(tokens=tokens, text=text, sent_id=sent_id)
    try:
        sentence.validate()
    except InvalidTree as exc:
        exc.lineno = block[0][0]
        raise
    return newdoc, sentence


def parse_conllu(stream: Iterable[str], *, strict: bool = False, group_by: str = "sentence",
                 rejected: Optional[list] = None) -> List[Document]:
    """Parse a CoNLL-U stream into documents.

    ``# newdoc`` markers always start a new document. Sentences not covered
    by a marker are grouped according to ``group_by``: ``"sentence"`` makes
    each one its own document, ``"sent_id"`` groups consecutive sentences
    sharing :func:`sent_id_group` of their ``sent_id``.

    Invalid sentences raise in strict mode. Otherwise they are skipped and the
    exception is appended to ``rejected`` when a list is given.
    """
    if group_by not in ("sentence", "sent_id"):
        raise ValueError(f"unknown group_by {group_by!r}")
    documents: List[Document] = []
    current: Optional[Document] = None
    in_newdoc = False
    current_group = None
    count = 0

    for first_lineno, block in _blocks(stream):
        count += 1
        newdoc_id = None
        try:
            newdoc_id, sentence = _parse_block(block)
        except ConlluError as exc:
            if strict:
                raise
            logger.warning("skipping sentence: %s", exc)
            if rejected is not None:
                rejected.append(exc)
            # a rejected sentence can still open a document
            for _, line in block:
                if line.startswith("# newdoc"):
                    _, eq, value = line.partition("=")
                    current = Document(id=value.strip() if eq else f"d{count}")
                    documents.append(current)
                    in_newdoc = True
            continue

        if newdoc_id is not None:
            current = Document(id=newdoc_id or sentence.sent_id or f"d{count}")
            documents.append(current)
            in_newdoc = True
        elif not in_newdoc:
            if group_by == "sent_id" and sentence.sent_id is not None:
                group = sent_id_group(sentence.sent_id)
                if current is None or group != current_group:
                    current = Document(id=group)
                    documents.append(current)
                    current_group = group
            else:
                current = Document(id=sentence.sent_id or f"s{count}")
                documents.append(current)
        current.sentences.append(sentence)

    return [d for d in documents if d.sentences]


def format_conllu(sentences: Iterable[Sentence], doc_id: Optional[str] = None) -> str:
    """Render sentences as CoNLL-U; unused columns are written as ``_``."""
    out = []
    for i, sent in enumerate(sentences):
        if doc_id is not None and i == 0:
            out.append(f"# newdoc id = {doc_id}")
        if sent.sent_id is not None:
            out.append(f"# sent_id = {sent.sent_id}")
        out.append(f"# text = {sent.raw_text}")
        for t in sent.tokens:
            out.append("\t".join([str(t.index), t.form, t.lemma, t.upos, "_", "_",
                                  str(t.head), t.deprel, "_", "_"]))
        out.append("")
    return "\n".join(out) + ("\n" if out else "")


# -- JSONL pairs ---------------------------------------------------------------

def read_pairs(stream: Iterable[str], *, strict: bool = True,
               rejected: Optional[list] = None) -> List[ParallelPair]:
    """Read one JSON object per line into pairs, in file order.

    Blank lines are ignored, as are unknown fields. A bad record raises
    :class:`MalformedRecord` when ``strict``; otherwise it is skipped and
    appended to ``rejected``.
    """
    pairs = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            pairs.append(_pair_from_line(line, lineno))
        except MalformedRecord as exc:
            if strict:
                raise
            logger.warning("skipping record: %s", exc)
            if rejected is not None:
                rejected.append(exc)
    return pairs


def _pair_from_line(line, lineno):
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"invalid JSON: {exc.msg}", lineno) from None
    if not isinstance(obj, dict):
        raise MalformedRecord("record is not a JSON object", lineno)
    for key in ("id", "source", "target"):
        if not isinstance(obj.get(key), str):
            raise MalformedRecord(f"field {key!r} missing or not a string", lineno)
    origin = obj.get("origin", GENUINE)
    try:
        return ParallelPair(id=obj["id"], source=obj["source"], target=obj["target"],
                            origin=origin)
    except ValueError as exc:
        raise MalformedRecord(str(exc), lineno) from None


def pair_to_json(pair: ParallelPair) -> str:
    return json.dumps({"id": pair.id, "source": pair.source, "target": pair.target,
                       "origin": pair.origin}, ensure_ascii=False)


def write_pairs(pairs: Iterable[ParallelPair], stream: TextIO) -> None:
    for pair in pairs:
        stream.write(pair_to_json(pair))
        stream.write("\n")
