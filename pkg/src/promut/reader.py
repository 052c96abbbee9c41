"""Tokenizer and operator-precedence reader for the supported Prolog subset."""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

from . import optable
from .errors import ParseError, UnsupportedConstruct
from .terms import Atom, Clause, Compound, Float, Int, NIL, Program, Term, TRUE, Var

SYMBOL_CHARS = "+-*/\\^<>=~:.?@#&$"
LAYOUT = " \t\r\n\f\v"

_NUMBER = re.compile(r"\d+(?:\.\d+(?:[eE][+-]?\d+)?)?")
_NAME = re.compile(r"[a-z][A-Za-z0-9_]*")
_VAR = re.compile(r"[A-Z_][A-Za-z0-9_]*")

TERM_START = frozenset({"atom", "number", "variable", "(", "["})


@dataclass(frozen=True)
class Token:
    kind: str  # name, var, int, float, punct, end, eof
    value: object
    start: int
    end: int
    layout_before: bool
    quoted: bool = False


class Source:
    def __init__(self, text: str):
        self.text = text
        self._line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def linecol(self, offset: int) -> Tuple[int, int]:
        line = bisect.bisect_right(self._line_starts, offset) - 1
        return line + 1, offset - self._line_starts[line] + 1

    def error(self, offset, message, expected=(), cls=ParseError):
        line, col = self.linecol(offset)
        return cls(message, line, col, expected)


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "a": "\a", "b": "\b", "f": "\f", "v": "\v",
            "0": "\0", "\\": "\\", "'": "'", '"': '"', "`": "`", "e": "\x1b", "s": " "}


def tokenize(text: str) -> List[Token]:
    src = Source(text)
    tokens: List[Token] = []
    i, n = 0, len(text)
    while True:
        start_layout = i
        # layout and comments
        while i < n:
            c = text[i]
            if c in LAYOUT:
                i += 1
            elif c == "%":
                j = text.find("\n", i)
                i = n if j < 0 else j + 1
            elif text.startswith("/*", i):
                j = text.find("*/", i + 2)
                if j < 0:
                    raise src.error(i, "unterminated block comment")
                i = j + 2
            else:
                break
        layout = i > start_layout or not tokens
        if i >= n:
            tokens.append(Token("eof", None, n, n, layout))
            return tokens
        c = text[i]
        start = i
        if c.isdigit():
            if text.startswith("0'", i):
                raise src.error(i, "character code literals (0'c) are not supported",
                                cls=UnsupportedConstruct)
            m = _NUMBER.match(text, i)
            lexeme = m.group()
            i = m.end()
            if "." in lexeme:
                tokens.append(Token("float", float(lexeme), start, i, layout))
            else:
                tokens.append(Token("int", int(lexeme), start, i, layout))
        elif c == "_" or c.isupper():
            m = _VAR.match(text, i)
            i = m.end()
            tokens.append(Token("var", m.group(), start, i, layout))
        elif c.isalpha():
            m = _NAME.match(text, i)
            if m is None:
                raise src.error(i, f"unexpected character {c!r}")
            i = m.end()
            tokens.append(Token("name", m.group(), start, i, layout))
        elif c == "'":
            value, i = _quoted(text, i, src)
            tokens.append(Token("name", value, start, i, layout, quoted=True))
        elif c == '"' or c == "`":
            raise src.error(i, "string and back-quoted literals are not supported",
                            cls=UnsupportedConstruct)
        elif c in "{}":
            raise src.error(i, "curly-brace terms are not supported", cls=UnsupportedConstruct)
        elif c in "()[],|":
            i += 1
            tokens.append(Token("punct", c, start, i, layout))
        elif c in "!;":
            i += 1
            tokens.append(Token("name", c, start, i, layout))
        elif c in SYMBOL_CHARS:
            j = i
            while j < n and text[j] in SYMBOL_CHARS and not text.startswith("/*", j):
                j += 1
            lexeme = text[i:j]
            if lexeme == "." and (j >= n or text[j] in LAYOUT or text[j] == "%"):
                tokens.append(Token("end", ".", start, j, layout))
            else:
                tokens.append(Token("name", lexeme, start, j, layout))
            i = j
        else:
            raise src.error(i, f"unexpected character {c!r}")


def _quoted(text: str, i: int, src: Source):
    out = []
    j = i + 1
    n = len(text)
    while True:
        if j >= n:
            raise src.error(i, "unterminated quoted atom")
        c = text[j]
        if c == "'":
            if j + 1 < n and text[j + 1] == "'":
                out.append("'")
                j += 2
                continue
            return "".join(out), j + 1
        if c == "\\":
            if j + 1 >= n:
                raise src.error(j, "unterminated escape sequence")
            e = text[j + 1]
            if e == "\n":
                j += 2
                continue
            if e == "x":
                m = re.match(r"([0-9a-fA-F]+)\\", text[j + 2:])
                if not m:
                    raise src.error(j, "malformed \\x escape")
                out.append(chr(int(m.group(1), 16)))
                j += 2 + m.end()
                continue
            if e not in _ESCAPES:
                raise src.error(j, f"unknown escape sequence \\{e}")
            out.append(_ESCAPES[e])
            j += 2
            continue
        if c == "\n":
            raise src.error(j, "newline in quoted atom")
        out.append(c)
        j += 1


class _Parser:
    def __init__(self, text: str):
        self.src = Source(text)
        self.tokens = tokenize(text)
        self.pos = 0
        self.varmap: dict = {}
        self.anon = 0

    # -- token helpers
    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, tok: Token, message: str, expected=()):
        return self.src.error(tok.start, message, expected)

    def expect_punct(self, value: str, expected) -> Token:
        tok = self.peek()
        if tok.kind != "punct" or tok.value != value:
            raise self.fail(tok, f"unexpected {_describe(tok)}", expected)
        return self.advance()

    # -- grammar
    def read_item(self) -> Optional[Tuple[str, Term, Tuple[int, int]]]:
        """Read one clause or directive. Returns None at end of input."""
        self.varmap = {}
        self.anon = 0
        tok = self.peek()
        if tok.kind == "eof":
            return None
        start = tok.start
        if tok.kind == "name" and tok.value in (":-", "?-") and not tok.quoted:
            nxt = self.peek(1)
            if not (nxt.kind == "punct" and nxt.value == "(" and not nxt.layout_before):
                self.advance()
                if tok.value == "?-":
                    raise self.fail(tok, "queries (?-) are not supported in source files")
                term, _ = self.parse(1199)
                end = self._expect_end()
                if type(term) is Compound and term.name == "op" and len(term.args) == 3:
                    raise self.src.error(start, "user-defined operators (op/3) are not supported",
                                         cls=UnsupportedConstruct)
                return ("directive", term, (start, end))
        term, _ = self.parse(1200)
        end = self._expect_end()
        return ("clause", term, (start, end))

    def _expect_end(self) -> int:
        tok = self.peek()
        if tok.kind != "end":
            if tok.kind == "name" and tok.value == "-->":
                raise self.src.error(tok.start, "DCG rules (-->) are not supported",
                                     cls=UnsupportedConstruct)
            raise self.fail(tok, f"unexpected {_describe(tok)}", {"operator", "."})
        self.advance()
        return tok.end

    def parse(self, max_prec: int) -> Tuple[Term, int]:
        left, left_prec = self.parse_primary(max_prec)
        return self.parse_infix(left, left_prec, max_prec)

    def parse_infix(self, left: Term, left_prec: int, max_prec: int) -> Tuple[Term, int]:
        while True:
            tok = self.peek()
            if tok.kind == "name":
                name = tok.value
            elif tok.kind == "punct" and tok.value == ",":
                name = ","
            else:
                return left, left_prec
            if name == "-->":
                raise self.src.error(tok.start, "DCG rules (-->) are not supported",
                                     cls=UnsupportedConstruct)
            if name not in optable.INFIX:
                return left, left_prec
            prio, lmax, rmax = optable.infix_args(name)
            if prio > max_prec:
                return left, left_prec
            if left_prec > lmax:
                raise self.fail(tok, "operator priority clash")
            self.advance()
            right, _ = self.parse(rmax)
            left = Compound(name, (left, right), _span(left, right, tok))
            left_prec = prio

    def parse_primary(self, max_prec: int) -> Tuple[Term, int]:
        tok = self.advance()
        kind = tok.kind
        if kind == "int":
            return Int(tok.value, (tok.start, tok.end)), 0
        if kind == "float":
            return Float(tok.value, (tok.start, tok.end)), 0
        if kind == "var":
            return self._variable(tok), 0
        if kind == "punct":
            if tok.value == "(":
                inner, _ = self.parse(1200)
                self.expect_punct(")", {")", "operator"})
                return inner, 0
            if tok.value == "[":
                return self._list(tok), 0
            raise self.fail(tok, f"unexpected {_describe(tok)}", TERM_START)
        if kind == "name":
            return self._name(tok, max_prec)
        raise self.fail(tok, f"unexpected {_describe(tok)}", TERM_START)

    def _variable(self, tok: Token) -> Var:
        span = (tok.start, tok.end)
        if tok.value == "_":
            v = Var(f"_#{self.anon}", True, span)
            self.anon += 1
            return v
        return Var(tok.value, False, span)

    def _name(self, tok: Token, max_prec: int) -> Tuple[Term, int]:
        name = tok.value
        nxt = self.peek()
        if nxt.kind == "punct" and nxt.value == "(" and not nxt.layout_before:
            self.advance()
            args = [self.parse(999)[0]]
            while True:
                t = self.peek()
                if t.kind == "punct" and t.value == ",":
                    self.advance()
                    args.append(self.parse(999)[0])
                elif t.kind == "punct" and t.value == ")":
                    end = self.advance().end
                    return Compound(name, tuple(args), (tok.start, end)), 0
                else:
                    raise self.fail(t, f"unexpected {_describe(t)}", {",", ")"})
        if name == "-" and not tok.quoted and nxt.kind in ("int", "float"):
            self.advance()
            cls = Int if nxt.kind == "int" else Float
            return cls(-nxt.value, (tok.start, nxt.end)), 0
        if name in optable.PREFIX and not tok.quoted and self._starts_operand(nxt):
            prio, amax = optable.prefix_arg(name)
            if prio > max_prec:
                raise self.fail(tok, "operator priority clash")
            arg, _ = self.parse(amax)
            return Compound(name, (arg,), _span(tok, arg, tok)), prio
        return Atom(name, (tok.start, tok.end)), 0

    @staticmethod
    def _starts_operand(tok: Token) -> bool:
        if tok.kind in ("int", "float", "var"):
            return True
        if tok.kind == "punct":
            return tok.value in "(["
        if tok.kind == "name":
            # an infix-only operator cannot begin an operand
            return tok.quoted or tok.value in optable.PREFIX or tok.value not in optable.INFIX
        return False

    def _list(self, open_tok: Token) -> Term:
        t = self.peek()
        if t.kind == "punct" and t.value == "]":
            end = self.advance().end
            return Atom("[]", (open_tok.start, end))
        items = [self.parse(999)[0]]
        tail: Term = None
        while True:
            t = self.advance()
            if t.kind == "punct" and t.value == ",":
                items.append(self.parse(999)[0])
            elif t.kind == "punct" and t.value == "|":
                tail = self.parse(999)[0]
                close = self.expect_punct("]", {"]"})
                end = close.end
                break
            elif t.kind == "punct" and t.value == "]":
                end = t.end
                tail = NIL
                break
            else:
                raise self.fail(t, f"unexpected {_describe(t)}", {",", "|", "]"})
        out = tail
        for item in reversed(items):
            out = Compound(".", (item, out), (item.span[0] if item.span else open_tok.start, end))
        return out


def _span(first, last, tok) -> Tuple[int, int]:
    a = first.span[0] if isinstance(first, Term) and first.span else getattr(first, "start", tok.start)
    b = last.span[1] if isinstance(last, Term) and last.span else tok.end
    return (a, b)


def _describe(tok: Token) -> str:
    if tok.kind == "eof":
        return "end of input"
    if tok.kind == "end":
        return "end of clause"
    return f"{tok.value!r}"


def read_items(source: str) -> List[Tuple[str, Term, Tuple[int, int]]]:
    """Read every clause and directive in order as (kind, term, span)."""
    parser = _Parser(source)
    items = []
    while True:
        item = parser.read_item()
        if item is None:
            return items
        items.append(item)


def parse_term(source: str) -> Term:
    """Parse a single term; a trailing end token is optional."""
    text = source.rstrip()
    tokens = tokenize(text)
    if len(tokens) < 2 or tokens[-2].kind != "end":
        text += " ."
    parser = _Parser(text)
    term, _ = parser.parse(1200)
    parser._expect_end()
    tok = parser.peek()
    if tok.kind != "eof":
        raise parser.fail(tok, f"unexpected {_describe(tok)}", {"end of input"})
    return term


def split_clause(term: Term, span=None, source: Optional[Source] = None) -> Clause:
    if type(term) is Compound and term.name == ":-" and len(term.args) == 2:
        head, body = term.args
    else:
        head, body = term, TRUE
    if not (type(head) is Atom or type(head) is Compound):
        raise _clause_error(source, span, f"clause head must be callable, got {type(head).__name__}")
    _check_body(body, source, span)
    return Clause(head, body, 1, span)


def _check_body(body: Term, source, span):
    stack = [body]
    while stack:
        g = stack.pop()
        if type(g) is Compound and g.name in (",", ";", "->") and len(g.args) == 2:
            stack.extend(g.args)
        elif type(g) in (Int, Float):
            raise _clause_error(source, span, "numbers are not callable goals")


def _clause_error(source, span, message):
    if source is not None and span is not None:
        return source.error(span[0], message)
    return ParseError(message)


def parse_program(source: str) -> Program:
    """Parse source text into a Program; directives are kept separately."""
    src = Source(source)
    clauses = []
    directives = []
    for kind, term, span in read_items(source):
        if kind == "directive":
            directives.append(term)
        else:
            clauses.append(split_clause(term, span, src))
    loc = sum(1 for line in source.splitlines() if line.strip())
    return Program(tuple(clauses), tuple(directives), loc)
