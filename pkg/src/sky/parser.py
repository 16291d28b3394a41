"""Tokenizer and recursive-descent parser for SKY source text.

Grammar::

    program    := statement* ;
    statement  := fact | rule | constraint | directive ;
    fact       := atom "." ;
    rule       := atom ":-" body "." ;
    constraint := ":-" body "." ;
    directive  := "#guess" atom (":-" body)? "."
                | "#minimize" predlist "." | "#fix" predlist "." | "#show" predlist "." ;
    body       := literal ("," literal)* ;
    literal    := ["not"] atom ;
    atom       := ident ["(" term ("," term)* ")"] ;
    term       := ident | VARIABLE | INTEGER ;

``%`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import Atom, Literal, Program, Rule, RuleKind, Term, make_program

DIRECTIVES = ("#guess", "#minimize", "#fix", "#show")
PUNCTUATION = ("(", ")", ",", ".", ":-")


@dataclass(frozen=True)
class Token:
    kind: str  # identifier | variable | integer | punctuation | directive
    text: str
    line: int
    column: int


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int, expected=frozenset()):
        self.message = message
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        super().__init__(f"line {line}, column {column}: {message}")


def tokenize(text: str) -> list[Token]:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start = i
        if ch.isascii() and (ch.isalpha() or ch.isdigit()):
            while i < n and text[i].isascii() and (text[i].isalnum() or text[i] == "_"):
                i += 1
            lexeme = text[start:i]
            if ch.isdigit():
                if not lexeme.isdigit():
                    raise ParseError(f"malformed integer {lexeme!r}", line, col, {"integer"})
                kind = "integer"
            elif ch.isupper():
                kind = "variable"
            else:
                kind = "identifier"
            tokens.append(Token(kind, lexeme, line, col))
        elif ch == "#":
            i += 1
            while i < n and text[i].isascii() and text[i].isalpha():
                i += 1
            lexeme = text[start:i]
            if lexeme not in DIRECTIVES:
                raise ParseError(f"unknown directive {lexeme!r}", line, col, {"directive"})
            tokens.append(Token("directive", lexeme, line, col))
        elif text.startswith(":-", i):
            i += 2
            tokens.append(Token("punctuation", ":-", line, col))
        elif ch in "(),.":
            i += 1
            tokens.append(Token("punctuation", ch, line, col))
        else:
            raise ParseError(f"illegal character {ch!r}", line, col)
        col += i - start
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def fail(self, expected: set[str], what: str):
        tok = self.peek()
        if tok is None:
            # input ended mid-statement: point at the last character of the last token
            last = self.tokens[-1]
            line, col = last.line, last.column + len(last.text) - 1
            raise ParseError(f"unexpected end of input, expected {what}", line, col, expected)
        raise ParseError(f"unexpected {tok.text!r}, expected {what}", tok.line, tok.column, expected)

    def accept(self, text: str) -> Token | None:
        tok = self.peek()
        if tok is not None and tok.kind in ("punctuation", "directive") and tok.text == text:
            self.pos += 1
            return tok
        return None

    def expect(self, text: str) -> Token:
        tok = self.accept(text)
        if tok is None:
            self.fail({text}, f"'{text}'")
        return tok

    def expect_kind(self, *kinds: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind not in kinds:
            self.fail(set(kinds), " or ".join(kinds))
        self.pos += 1
        return tok

    def atom(self) -> Atom:
        name = self.expect_kind("identifier").text
        args = []
        if self.accept("("):
            args.append(self.term())
            while self.accept(","):
                args.append(self.term())
            self.expect(")")
        return Atom(name, tuple(args))

    def term(self) -> Term:
        tok = self.expect_kind("identifier", "variable", "integer")
        if tok.kind == "variable":
            return Term.var(tok.text)
        return Term.const(tok.text)

    def literal(self) -> Literal:
        tok = self.peek()
        nxt = self.tokens[self.pos + 1] if self.pos + 1 < len(self.tokens) else None
        if (tok is not None and tok.kind == "identifier" and tok.text == "not"
                and nxt is not None and nxt.kind == "identifier"):
            self.pos += 1
            return Literal(self.atom(), False)
        return Literal(self.atom(), True)

    def body(self) -> tuple[Literal, ...]:
        lits = [self.literal()]
        while self.accept(","):
            lits.append(self.literal())
        return tuple(lits)

    def predlist(self) -> list[str]:
        names = [self.expect_kind("identifier").text]
        while self.accept(","):
            names.append(self.expect_kind("identifier").text)
        return names

    def statements(self) -> tuple[list[Rule], set[str] | None, set[str], set[str] | None]:
        rules: list[Rule] = []
        minimize: set[str] | None = None
        fix: set[str] = set()
        show: set[str] | None = None
        while self.peek() is not None:
            tok = self.peek()
            line = tok.line
            if self.accept(":-"):
                body = self.body()
                self.expect(".")
                rules.append(Rule(None, body, RuleKind.CONSTRAINT, line))
            elif self.accept("#guess"):
                head = self.atom()
                body = self.body() if self.accept(":-") else ()
                self.expect(".")
                rules.append(Rule(head, body, RuleKind.GUESS, line))
            elif tok.kind == "directive":
                self.pos += 1
                names = self.predlist()
                self.expect(".")
                if tok.text == "#minimize":
                    minimize = (minimize or set()) | set(names)
                elif tok.text == "#fix":
                    fix |= set(names)
                else:
                    show = (show or set()) | set(names)
            elif tok.kind == "identifier":
                head = self.atom()
                if self.accept(":-"):
                    body = self.body()
                    self.expect(".")
                    rules.append(Rule(head, body, RuleKind.RULE, line))
                else:
                    if self.peek() is None or self.peek().text != ".":
                        self.fail({".", ":-"}, "'.' or ':-'")
                    self.pos += 1
                    kind = RuleKind.FACT if head.is_ground() else RuleKind.RULE
                    rules.append(Rule(head, (), kind, line))
            else:
                self.fail({"identifier", ":-", "directive"}, "a statement")
        return rules, minimize, fix, show


def parse_rules(text: str) -> list[Rule]:
    """Statements of ``text`` as rules, without any validation; directives are dropped."""
    return _Parser(text).statements()[0]


def parse_program(text: str) -> Program:
    """Parse and validate SKY source.

    Raises :class:`ParseError` on the first syntax error and
    :class:`sky.syntax.ValidityError` with every semantic violation.
    """
    rules, minimize, fix, show = _Parser(text).statements()
    return make_program(rules, minimize, fix, show)
