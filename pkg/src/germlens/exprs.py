"""Tiny arithmetic expression grammar for germ configuration files.

Supported ops are exactly: +, -, *, /, pow (written ^ or pow(a,b)),
sin, ln, exp, abs. One free variable (typically t for curves, m for
sequences). Expressions compile to vectorized numpy callables.

Grammar (recursive descent):
    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'
"""

from __future__ import annotations

import re

import numpy as np

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[()+\-*/^,]))"
)

_FUNCS = {
    "sin": np.sin,
    "ln": np.log,
    "exp": np.exp,
    "abs": np.abs,
}


class ExprError(ValueError):
    pass


def _tokenize(src: str):
    pos, out = 0, []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            if src[pos:].strip() == "":
                break
            raise ExprError(f"bad token at {pos}: {src[pos:pos + 12]!r}")
        pos = m.end()
        if m.lastgroup == "num":
            out.append(("num", float(m.group("num"))))
        elif m.lastgroup == "name":
            out.append(("name", m.group("name")))
        else:
            out.append(("op", m.group("op")))
    out.append(("end", None))
    return out


class _Parser:
    def __init__(self, tokens, var):
        self.toks = tokens
        self.i = 0
        self.var = var

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, val=None):
        k, v = self.toks[self.i]
        if (kind and k != kind) or (val is not None and v != val):
            raise ExprError(f"expected {val or kind}, got {v!r}")
        self.i += 1
        return v

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            op = self.take("op")
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            op = self.take("op")
            rhs = self.unary()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take("op")
            return ("neg", self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek() == ("op", "^"):
            self.take("op")
            return ("pow", node, self.unary())
        return node

    def atom(self):
        k, v = self.peek()
        if k == "num":
            self.take()
            return ("const", v)
        if k == "name":
            self.take()
            if self.peek() == ("op", "("):
                self.take("op", "(")
                args = [self.expr()]
                while self.peek() == ("op", ","):
                    self.take("op", ",")
                    args.append(self.expr())
                self.take("op", ")")
                if v == "pow":
                    if len(args) != 2:
                        raise ExprError("pow takes 2 arguments")
                    return ("pow", args[0], args[1])
                if v not in _FUNCS:
                    raise ExprError(f"unknown function {v!r}")
                if len(args) != 1:
                    raise ExprError(f"{v} takes 1 argument")
                return (v, args[0])
            if v != self.var:
                raise ExprError(f"unknown name {v!r} (variable is {self.var!r})")
            return ("var",)
        if (k, v) == ("op", "("):
            self.take("op", "(")
            node = self.expr()
            self.take("op", ")")
            return node
        raise ExprError(f"unexpected {v!r}")


def _eval(node, x):
    op = node[0]
    if op == "const":
        return np.full_like(np.asarray(x, dtype=float), node[1]) if np.ndim(x) else node[1]
    if op == "var":
        return x
    if op == "neg":
        return -_eval(node[1], x)
    if op in ("add", "sub", "mul", "div", "pow"):
        a, b = _eval(node[1], x), _eval(node[2], x)
        if op == "add":
            return a + b
        if op == "sub":
            return a - b
        if op == "mul":
            return a * b
        if op == "div":
            return a / b
        return np.power(a, b)
    return _FUNCS[op](_eval(node[1], x))


def compile_expr(src: str, var: str = "t"):
    """Compile an expression string into f(x) acting elementwise."""
    parser = _Parser(_tokenize(src), var)
    ast = parser.expr()
    parser.take("end")

    def fn(x):
        return _eval(ast, np.asarray(x, dtype=float))

    fn.source = src
    return fn
