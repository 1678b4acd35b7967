"""Tokenizer for the Verilog/SVA subset, plus Unicode-operator repair."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import HdlSyntaxError, NonAsciiOperator, UnsupportedConstruct

# Unicode look-alikes seen in generated lemmas, mapped to their SVA spelling.
ASCII_REPAIRS: dict[str, str] = {
    "\u21d4": "<->",  # double arrow left-right
    "\u2194": "<->",
    "\u27fa": "<->",
    "\u21d2": "->",
    "\u2192": "->",
    "\u27f9": "->",
    "\u2227": "&&",
    "\u2228": "||",
    "\u00ac": "!",
    "\u2260": "!=",
    "\u2264": "<=",
    "\u2265": ">=",
    "\u2261": "==",
    "\u2295": "^",
    "\u2212": "-",
    "\u2018": "'",
    "\u2019": "'",
    "\u201c": '"',
    "\u201d": '"',
    "\u00a0": " ",
    "\u2002": " ",
    "\u2003": " ",
    "\u2009": " ",
    "\u200b": "",
    "\ufeff": "",
}


@dataclass(frozen=True)
class Repair:
    char: str
    replacement: str
    position: tuple[int, int]


def repair_ascii(text: str) -> tuple[str, list[Repair]]:
    """Replace known Unicode operators by ASCII; report each substitution."""
    out: list[str] = []
    repairs: list[Repair] = []
    line, col = 1, 1
    for ch in text:
        if ord(ch) > 127 and ch in ASCII_REPAIRS:
            rep = ASCII_REPAIRS[ch]
            repairs.append(Repair(ch, rep, (line, col)))
            out.append(rep)
        else:
            out.append(ch)
        if ch == "\n":
            line, col = line + 1, 1
        else:
            col += 1
    return "".join(out), repairs


@dataclass(frozen=True)
class Token:
    kind: str  # "id" | "sys" | "num" | "op" | "str" | "eof"
    text: str
    pos: tuple[int, int]

    def __repr__(self) -> str:
        return f"{self.kind}:{self.text!r}@{self.pos[0]}:{self.pos[1]}"


OPERATORS = [
    "|->", "|=>", "<->", "===", "!==", "<<<", ">>>",
    "##", "->", "<=", ">=", "==", "!=", "&&", "||", "<<", ">>",
    "~&", "~|", "~^", "^~", "**",
    "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "=",
    "?", ":", ";", ",", ".", "(", ")", "[", "]", "{", "}", "@", "#",
]

_NUM = re.compile(
    r"(?P<size>\d[\d_]*)?\s*'(?P<signed>[sS])?(?P<base>[bBoOdDhH])\s*(?P<digits>[0-9a-fA-FxXzZ?_]+)"
    r"|(?P<dec>\d[\d_]*)"
)
_ID = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")
_SYS = re.compile(r"\$[A-Za-z_][A-Za-z0-9_$]*")
_WS = re.compile(r"[ \t\r\f\v]+")


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, lstart = 0, 1, 0
    n = len(text)

    def pos(k: int) -> tuple[int, int]:
        return (line, k - lstart + 1)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            lstart = i
            continue
        m = _WS.match(text, i)
        if m:
            i = m.end()
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                raise HdlSyntaxError("unterminated block comment", pos(i))
            for k in range(i, j):
                if text[k] == "\n":
                    line += 1
                    lstart = k + 1
            i = j + 2
            continue
        if ord(ch) > 127:
            hint = ASCII_REPAIRS.get(ch)
            raise NonAsciiOperator(ch, pos(i), hint)
        if ch == "`":
            m = _ID.match(text, i + 1)
            name = m.group(0) if m else ""
            if name in ("timescale", "default_nettype", "resetall"):
                j = text.find("\n", i)
                i = n if j < 0 else j
                continue
            raise UnsupportedConstruct(f"compiler directive `{name}", pos(i))
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 2 if text[j] == "\\" else 1
            toks.append(Token("str", text[i:j + 1], pos(i)))
            i = j + 1
            continue
        if ch.isdigit() or ch == "'":
            m = _NUM.match(text, i)
            if m:
                toks.append(Token("num", m.group(0), pos(i)))
                i = m.end()
                continue
            if ch == "'":
                raise HdlSyntaxError("stray apostrophe", pos(i), "expression")
        m = _ID.match(text, i)
        if m:
            toks.append(Token("id", m.group(0), pos(i)))
            i = m.end()
            continue
        m = _SYS.match(text, i)
        if m:
            toks.append(Token("sys", m.group(0), pos(i)))
            i = m.end()
            continue
        for op in OPERATORS:
            if text.startswith(op, i):
                toks.append(Token("op", op, pos(i)))
                i += len(op)
                break
        else:
            raise HdlSyntaxError(f"unexpected character {ch!r}", pos(i))
    toks.append(Token("eof", "", pos(i)))
    return toks


def parse_number(text: str) -> tuple[int, int | None]:
    """Value and width (``None`` for unsized) of a numeric literal."""
    m = _NUM.fullmatch(text)
    if m is None:
        raise ValueError(text)
    if m.group("dec") is not None:
        return int(m.group("dec").replace("_", "")), None
    digits = m.group("digits").replace("_", "")
    if any(c in "xXzZ?" for c in digits):
        raise ValueError("x/z digits")
    base = {"b": 2, "o": 8, "d": 10, "h": 16}[m.group("base").lower()]
    value = int(digits, base)
    size = m.group("size")
    if size is None:
        return value, None
    width = int(size.replace("_", ""))
    return value & ((1 << width) - 1), width
