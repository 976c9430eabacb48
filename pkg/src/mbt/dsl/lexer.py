"""Tokenizer shared by all textual notations."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..diagnostics import DslError, Span, error

PUNCT = ("->", "::", ":=", "<>", "<=", ">=", "{", "}", "(", ")", "[", "]", ",", ";", ":", ".",
         "=", "<", ">", "+", "-", "*", "|", "@")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | INT | TIME | STRING | PUNCT | EOF
    value: object
    span: Span

    def is_punct(self, value: str) -> bool:
        return self.kind == "PUNCT" and self.value == value

    def is_word(self, value: str) -> bool:
        return self.kind == "IDENT" and self.value == value


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)"
    r"|(?P<nl>\n)"
    r"|(?P<comment>--[^\n]*|//[^\n]*|\#[^\n]*)"
    r"|(?P<time>\d+t(?![A-Za-z0-9_]))"
    r"|(?P<int>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<string>\"(?:[^\"\\\n]|\\.)*\")"
    r"|(?P<punct>" + "|".join(re.escape(p) for p in PUNCT) + r")"
)

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f", '"': '"', "\\": "\\"}


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), body)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            ch = text[pos]
            if ch == '"':
                raise DslError([error(Span(line, col, 1), "P003", "unterminated string literal")])
            raise DslError([error(Span(line, col, 1), "P004", f"invalid character {ch!r}")])
        kind = m.lastgroup
        raw = m.group()
        span = Span(line, col, len(raw))
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "time":
            tokens.append(Token("TIME", int(raw[:-1]), span))
        elif kind == "int":
            tokens.append(Token("INT", int(raw), span))
        elif kind == "ident":
            tokens.append(Token("IDENT", raw, span))
        elif kind == "string":
            tokens.append(Token("STRING", _unescape(raw[1:-1]), span))
        elif kind == "punct":
            tokens.append(Token("PUNCT", raw, span))
        pos = m.end()
    tokens.append(Token("EOF", None, Span(line, pos - line_start + 1, 0)))
    return tokens
