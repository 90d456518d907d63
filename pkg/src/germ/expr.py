"""Recursive-descent parser for polynomial-style expressions.

The grammar is deliberately small: integer literals, names, ``+ - * / ^``,
and parentheses.  ``^`` takes a non-negative integer exponent.  There is no
implicit multiplication: ``2x`` is a syntax error, ``2*x`` is not.

Parsing produces a tiny AST (nested tuples) which is then evaluated against
an environment mapping names to arbitrary Python objects; all arithmetic is
delegated to the objects' operators.  The same parser therefore serves for
scalars, truncated jets and multivariate polynomials.
"""

from __future__ import annotations

from typing import Any, Callable


class ExprError(ValueError):
    """Syntax or evaluation error, with 1-based line/column position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


_SYMBOLS = "+-*/^(),"


def tokenize(text: str, line: int = 1, col: int = 1):
    """Split ``text`` into (kind, value, line, col) tuples.

    Kinds: ``int``, ``name``, one of the symbol characters, ``end``.
    """
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("int", int(text[i:j]), line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in _SYMBOLS:
            tokens.append((ch, ch, line, col))
            col += 1
            i += 1
            continue
        raise ExprError(f"unexpected character {ch!r}", line, col)
    tokens.append(("end", None, line, col))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok[0] != kind:
            raise ExprError(f"expected {kind!r}, found {tok[1]!r}", tok[2], tok[3])
        return tok

    def parse_expr(self):
        node = self.parse_term()
        while self.peek()[0] in ("+", "-"):
            op = self.next()[0]
            rhs = self.parse_term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def parse_term(self):
        node = self.parse_factor()
        while self.peek()[0] in ("*", "/"):
            op = self.next()[0]
            rhs = self.parse_factor()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def parse_factor(self):
        tok = self.peek()
        if tok[0] in ("+", "-"):
            self.next()
            inner = self.parse_factor()
            return inner if tok[0] == "+" else ("neg", inner)
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        while self.peek()[0] == "^":
            caret = self.next()
            tok = self.next()
            if tok[0] != "int":
                raise ExprError("exponent must be a non-negative integer", tok[2], tok[3])
            base = ("pow", base, tok[1])
            del caret
        return base

    def parse_atom(self):
        tok = self.next()
        if tok[0] == "int":
            return ("int", tok[1])
        if tok[0] == "name":
            return ("name", tok[1], tok[2], tok[3])
        if tok[0] == "(":
            node = self.parse_expr()
            self.expect(")")
            return node
        raise ExprError(f"unexpected token {tok[1]!r}", tok[2], tok[3])


def parse(text: str, line: int = 1, col: int = 1):
    """Parse ``text`` into an AST, raising ExprError on bad syntax."""
    parser = _Parser(tokenize(text, line, col))
    node = parser.parse_expr()
    tail = parser.peek()
    if tail[0] != "end":
        raise ExprError(f"unexpected trailing token {tail[1]!r}", tail[2], tail[3])
    return node


def parse_tuple(text: str, line: int = 1, col: int = 1):
    """Parse a comma-separated list of expressions, with or without parens."""
    tokens = tokenize(text, line, col)
    parser = _Parser(tokens)
    wrapped = parser.peek()[0] == "("
    # A leading '(' is ambiguous: grouping or tuple syntax.  Try the tuple
    # reading first and fall back to a single parenthesized expression.
    if wrapped:
        save = parser.pos
        parser.next()
        items = [parser.parse_expr()]
        if parser.peek()[0] == ",":
            while parser.peek()[0] == ",":
                parser.next()
                items.append(parser.parse_expr())
            parser.expect(")")
            tail = parser.peek()
            if tail[0] != "end":
                raise ExprError(f"unexpected trailing token {tail[1]!r}", tail[2], tail[3])
            return items
        parser.pos = save
    items = [parser.parse_expr()]
    while parser.peek()[0] == ",":
        parser.next()
        items.append(parser.parse_expr())
    tail = parser.peek()
    if tail[0] != "end":
        raise ExprError(f"unexpected trailing token {tail[1]!r}", tail[2], tail[3])
    return items


def evaluate(node, env: dict, make_int: Callable[[int], Any]):
    """Evaluate an AST against ``env``; integer literals go through make_int."""
    kind = node[0]
    if kind == "int":
        return make_int(node[1])
    if kind == "name":
        name = node[1]
        if name not in env:
            raise ExprError(f"unknown name {name!r}", node[2], node[3])
        return env[name]
    if kind == "neg":
        return -evaluate(node[1], env, make_int)
    if kind == "add":
        return evaluate(node[1], env, make_int) + evaluate(node[2], env, make_int)
    if kind == "sub":
        return evaluate(node[1], env, make_int) - evaluate(node[2], env, make_int)
    if kind == "mul":
        return evaluate(node[1], env, make_int) * evaluate(node[2], env, make_int)
    if kind == "div":
        num = evaluate(node[1], env, make_int)
        den = evaluate(node[2], env, make_int)
        try:
            return num / den
        except (TypeError, ZeroDivisionError) as exc:
            raise ExprError(f"division not available here: {exc}", 0, 0) from exc
    if kind == "pow":
        return evaluate(node[1], env, make_int) ** node[2]
    raise AssertionError(f"bad node {kind}")


def names_in(node, acc=None):
    """Collect the variable names appearing in an AST."""
    if acc is None:
        acc = []
    if node[0] == "name":
        if node[1] not in acc:
            acc.append(node[1])
    elif node[0] in ("neg",):
        names_in(node[1], acc)
    elif node[0] in ("add", "sub", "mul", "div"):
        names_in(node[1], acc)
        names_in(node[2], acc)
    elif node[0] == "pow":
        names_in(node[1], acc)
    return acc


def eval_str(text: str, env: dict, make_int: Callable[[int], Any]):
    return evaluate(parse(text), env, make_int)
