"""Concrete syntax: tokenizer, parsers and printers for terms, .brs and .rdha files."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .brs import RESERVED_LABELS, Brs, Rule
from .terms import RESERVED_VARIABLES, Term, normalize

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<comment>//[^\n]*)"
    r"|(?P<par>\|\|)"
    r"|(?P<arrow>->)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<reserved>@acc|@nacc|[#$])"
    r"|(?P<punct>[.(){};:,\-/])"
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    out: list[Token] = []
    pos, line, col = 0, 1, 1
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, col)
        text = m.group()
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            out.append(Token(kind, text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


class _Stream:
    def __init__(self, src: str) -> None:
        self.toks = tokenize(src)
        self.i = 0

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(msg, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind != "eof"

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            got = self.peek().text or "end of input"
            raise self.error(f"expected {text!r}, found {got!r}")
        return self.next()

    def ident(self, what: str = "identifier") -> Token:
        t = self.peek()
        if t.kind != "ident":
            raise self.error(f"expected {what}, found {t.text or 'end of input'!r}")
        return self.next()

    def label(self, allow_reserved: bool) -> Token:
        t = self.peek()
        if t.kind == "ident" or (t.kind == "reserved" and allow_reserved):
            return self.next()
        if t.kind == "reserved":
            raise self.error(f"reserved action {t.text!r} not allowed here")
        raise self.error(f"expected action, found {t.text or 'end of input'!r}")

    def ident_list(self, allow_reserved: bool = False, what: str = "identifier") -> list[Token]:
        out = []
        if self.at(";"):
            return out
        out.append(self.label(allow_reserved) if allow_reserved else self.ident(what))
        while self.accept(","):
            out.append(self.label(allow_reserved) if allow_reserved else self.ident(what))
        return out

    def done(self) -> None:
        if self.peek().kind != "eof":
            raise self.error(f"unexpected {self.peek().text!r} after end of model")


# -- terms ----------------------------------------------------------------------


def _term_raw(s: _Stream):
    left = _factor_raw(s)
    while s.accept("||"):
        left = ("par", left, _factor_raw(s))
    return left


def _factor_raw(s: _Stream):
    if s.accept("("):
        inner = _term_raw(s)
        s.expect(")")
        return inner
    tok = s.ident("term")
    if tok.text == "eps":
        return ("eps",)
    if s.accept("."):
        s.expect("(")
        inner = _term_raw(s)
        s.expect(")")
        return ("seq", tok.text, inner)
    return ("var", tok.text)


def parse_raw_term(src: str):
    s = _Stream(src)
    raw = _term_raw(s)
    s.done()
    return raw


def parse_term(src: str) -> Term:
    return normalize(parse_raw_term(src))


def _vars_of_raw(raw, out: list) -> None:
    if raw[0] == "var":
        out.append(raw[1])
    elif raw[0] == "seq":
        out.append(raw[1])
        _vars_of_raw(raw[2], out)
    elif raw[0] == "par":
        _vars_of_raw(raw[1], out)
        _vars_of_raw(raw[2], out)


# -- .brs -------------------------------------------------------------------------


def parse_brs(src: str, allow_reserved: bool = False) -> Brs:
    """Parse a ``brs { ... }`` model.

    Reserved actions (``# $ @acc @nacc``) and variables (``Z_ACC``,
    ``Z_NOT_ACC``) are accepted only with ``allow_reserved``.
    """
    s = _Stream(src)
    s.expect("brs")
    s.expect("{")
    s.expect("vars")
    s.expect(":")
    var_toks = s.ident_list(what="variable")
    s.expect(";")
    s.expect("alphabet")
    s.expect(":")
    act_toks = s.ident_list(allow_reserved=allow_reserved)
    s.expect(";")
    declared_vars: set[str] = set()
    for t in var_toks:
        if t.text == "eps":
            raise s.error("'eps' cannot be a variable", t)
        if t.text in RESERVED_VARIABLES and not allow_reserved:
            raise s.error(f"reserved variable {t.text!r}", t)
        declared_vars.add(t.text)
    alphabet: set[str] = set()
    for t in act_toks:
        if t.text in RESERVED_LABELS and not allow_reserved:
            raise s.error(f"reserved action {t.text!r}", t)
        alphabet.add(t.text)
    rules: list[Rule] = []
    ids: set[str] = set()
    while not s.at("}"):
        accepting = s.accept("accepting")
        s.expect("rule")
        if s.peek().kind == "ident" and s.peek(1).text == ":":
            id_tok = s.next()
            s.next()
            rid = id_tok.text
        else:
            id_tok = s.peek()
            rid = f"r{len(rules) + 1}"
        if rid in ids:
            raise s.error(f"duplicate rule id {rid!r}", id_tok)
        ids.add(rid)
        lhs_tok = s.peek()
        lhs = _term_raw(s)
        s.expect("-")
        lab = s.label(allow_reserved)
        s.expect("->")
        rhs_tok = s.peek()
        rhs = _term_raw(s)
        s.expect(";")
        for raw, tok in ((lhs, lhs_tok), (rhs, rhs_tok)):
            names: list[str] = []
            _vars_of_raw(raw, names)
            for v in names:
                if v not in declared_vars:
                    raise s.error(f"undeclared variable {v!r}", tok)
        if lab.text not in alphabet:
            raise s.error(f"undeclared action {lab.text!r}", lab)
        lhs_t = normalize(lhs)
        if lhs_t.key == (0,):
            raise s.error("rule lhs must not be eps", lhs_tok)
        rules.append(Rule(rid, lhs_t, lab.text, normalize(rhs), accepting))
    s.expect("}")
    s.done()
    return Brs(declared_vars, alphabet, rules)


def print_brs(b: Brs) -> str:
    lines = ["brs {"]
    lines.append("  vars: " + ", ".join(sorted(b.vars)) + ";")
    lines.append("  alphabet: " + ", ".join(sorted(b.alphabet)) + ";")
    for r in b.rules:
        lines.append("  " + str(r))
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- .rdha ------------------------------------------------------------------------


def _endpoint(s: _Stream):
    if s.accept("("):
        box = s.ident("box").text
        s.expect(",")
        node = s.ident("node").text
        s.expect(")")
        return (box, node)
    return s.ident("node").text


def parse_rdha(src: str):
    from .rdha import Chan, Halt, Machine, New, Nil, Rdha, Transition

    s = _Stream(src)
    s.expect("rdha")
    s.expect("{")
    s.expect("inputs")
    s.expect(":")
    inputs = [t.text for t in s.ident_list(what="input symbol")]
    s.expect(";")
    s.expect("channels")
    s.expect(":")
    channels = [t.text for t in s.ident_list(what="channel")]
    s.expect(";")
    raw_machines = []
    while s.accept("machine"):
        name = s.ident("machine name").text
        s.expect("{")
        fields: dict[str, list[str]] = {}
        for key in ("nodes", "boxes", "init", "exit"):
            s.expect(key)
            s.expect(":")
            fields[key] = [t.text for t in s.ident_list()]
            s.expect(";")
        boxes: dict[str, tuple[str, Token]] = {}
        trans = []
        while not s.at("}"):
            if s.accept("box"):
                b = s.ident("box").text
                s.expect("->")
                target = s.ident("machine name")
                s.expect(";")
                boxes[b] = (target.text, target)
                continue
            s.expect("trans")
            u = _endpoint(s)
            s.expect("-")
            a = s.ident("input symbol")
            s.expect("/")
            act = s.ident("NIL, HALT, chan or NEW")
            if act.text == "NIL":
                sy = ("nil",)
            elif act.text == "HALT":
                sy = ("halt",)
            elif act.text == "chan":
                s.expect("(")
                sy = ("chan", s.ident("channel").text)
                s.expect(")")
            elif act.text == "NEW":
                s.expect("(")
                m = s.ident("machine name")
                s.expect(",")
                p = s.ident("node").text
                s.expect(")")
                sy = ("new", m.text, p, m)
            else:
                raise s.error(f"unknown synchronization action {act.text!r}", act)
            s.expect("->")
            v = _endpoint(s)
            s.expect(";")
            trans.append((u, a.text, sy, v))
        s.expect("}")
        raw_machines.append((name, fields, boxes, trans))
    s.expect("}")
    s.done()
    names = {m[0]: i for i, m in enumerate(raw_machines)}

    def index_of(name: str, tok: Token) -> int:
        if name not in names:
            raise s.error(f"unknown machine {name!r}", tok)
        return names[name]

    machines = []
    for name, fields, boxes, trans in raw_machines:
        hierarchy = {b: index_of(mn, tok) for b, (mn, tok) in boxes.items()}
        delta = []
        for u, a, sy, v in trans:
            if sy[0] == "nil":
                act = Nil()
            elif sy[0] == "halt":
                act = Halt()
            elif sy[0] == "chan":
                act = Chan(sy[1])
            else:
                act = New(index_of(sy[1], sy[3]), sy[2])
            delta.append(Transition(u, a, act, v))
        machines.append(Machine(name, frozenset(fields["nodes"]), frozenset(fields["boxes"]),
                                frozenset(fields["init"]), frozenset(fields["exit"]),
                                hierarchy, tuple(delta)))
    return Rdha(tuple(machines), frozenset(inputs), frozenset(channels))


def parse_model(src: str, allow_reserved: bool = False):
    """Dispatch on the top-level keyword."""
    head = _Stream(src).peek()
    if head.text == "brs":
        return parse_brs(src, allow_reserved=allow_reserved)
    if head.text == "rdha":
        return parse_rdha(src)
    raise ParseError("expected 'brs' or 'rdha'", head.line, head.col)
