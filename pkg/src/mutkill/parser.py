"""MiniImp front end: tokenizer, recursive-descent parser, semantic checks
and a pretty printer.

MiniImp is a small deterministic imperative language over exact integers:

    input x: int in [-8, 7];

    fn main() {
        var n;
        n = x + 1;
        if (n < 0) { output -n; } else { output n; }
        while (n > 0) { n = n - 1; }
        call helper(n);
    }

Every construct is annotated with a 1-based (line, column) position.  Input
domains are inclusive and default to [-128, 127] when omitted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

DEFAULT_DOMAIN = (-128, 127)

KEYWORDS = {"input", "int", "in", "fn", "var", "if", "else", "while", "output", "call", "main"}
RESERVED_NAMES = {"mutId"}


class MiniImpError(Exception):
    """Base class for front-end errors; carries a 1-based position."""

    def __init__(self, message: str, pos: Tuple[int, int] = (0, 0)):
        super().__init__(f"{pos[0]}:{pos[1]}: {message}" if pos != (0, 0) else message)
        self.message = message
        self.pos = pos


class MiniImpSyntaxError(MiniImpError):
    pass


class SemanticError(MiniImpError):
    pass


# ---------------------------------------------------------------------------
# Source and AST types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SourceProgram:
    text: str
    origin: str = "<inline>"

    def __post_init__(self):
        if not self.text:
            raise ValueError("empty source program")


Pos = Tuple[int, int]


def _pos_field():
    return field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class EInt:
    value: int
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class EVar:
    name: str
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class ENeg:
    operand: "Expr"
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class EBin:
    op: str  # + - * / %
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class ECmp:
    op: str  # < <= > >= == !=
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class EAnd:
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class EOr:
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class ENot:
    operand: "Expr"
    pos: Pos = _pos_field()


Expr = (EInt, EVar, ENeg, EBin, ECmp, EAnd, EOr, ENot)


@dataclass(frozen=True)
class SVarDecl:
    name: str
    init: Optional["Expr"]
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class SAssign:
    name: str
    expr: "Expr"
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class SIf:
    cond: "Expr"
    then: tuple
    els: tuple
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class SWhile:
    cond: "Expr"
    body: tuple
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class SOutput:
    expr: "Expr"
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class SCall:
    fn: str
    args: tuple
    pos: Pos = _pos_field()


Stmt = (SVarDecl, SAssign, SIf, SWhile, SOutput, SCall)


@dataclass(frozen=True)
class InputDecl:
    name: str
    lo: int
    hi: int
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class FnDef:
    name: str
    params: tuple
    body: tuple
    pos: Pos = _pos_field()


@dataclass(frozen=True)
class Ast:
    inputs: tuple  # InputDecl, in declaration order
    functions: tuple  # FnDef, in declaration order
    entry: str = "main"

    def function(self, name: str) -> FnDef:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def input_domains(self) -> dict:
        return {d.name: (d.lo, d.hi) for d in self.inputs}


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|==|!=|&&|\|\||[-+*/%<>=!(){}\[\],;:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'int' | 'name' | 'op' | 'eof'
    text: str
    pos: Pos


def _tokenize(src: str) -> List[_Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(src):
        m = _TOKEN_RE.match(src, i)
        if m is None:
            raise MiniImpSyntaxError(f"unexpected character {src[i]!r}", (line, col))
        text = m.group(0)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, text, (line, col)))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        i = m.end()
    tokens.append(_Token("eof", "", (line, col)))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: List[_Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.cur
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        if self.cur.text != text:
            raise MiniImpSyntaxError(
                f"expected {text!r}, found {self.cur.text or 'end of input'!r}", self.cur.pos
            )
        return self.advance()

    def expect_name(self) -> _Token:
        tok = self.cur
        if tok.kind != "name" or tok.text in KEYWORDS - {"main"}:
            raise MiniImpSyntaxError(
                f"expected identifier, found {tok.text or 'end of input'!r}", tok.pos
            )
        if tok.text in RESERVED_NAMES:
            raise MiniImpSyntaxError(f"{tok.text!r} is a reserved name", tok.pos)
        return self.advance()

    def parse_program(self) -> Ast:
        inputs, functions = [], []
        while self.cur.kind != "eof":
            if self.cur.text == "input":
                inputs.append(self.parse_input())
            elif self.cur.text == "fn":
                functions.append(self.parse_fn())
            else:
                raise MiniImpSyntaxError(
                    f"expected 'input' or 'fn', found {self.cur.text!r}", self.cur.pos
                )
        return Ast(inputs=tuple(inputs), functions=tuple(functions))

    def parse_input(self) -> InputDecl:
        pos = self.expect("input").pos
        name = self.expect_name().text
        self.expect(":")
        self.expect("int")
        lo, hi = DEFAULT_DOMAIN
        if self.cur.text == "in":
            self.advance()
            self.expect("[")
            lo = self.parse_signed_int()
            self.expect(",")
            hi = self.parse_signed_int()
            self.expect("]")
        self.expect(";")
        if lo > hi:
            raise SemanticError(f"empty domain [{lo},{hi}] for input {name!r}", pos)
        return InputDecl(name, lo, hi, pos)

    def parse_signed_int(self) -> int:
        sign = 1
        if self.cur.text == "-":
            self.advance()
            sign = -1
        tok = self.cur
        if tok.kind != "int":
            raise MiniImpSyntaxError(f"expected integer, found {tok.text!r}", tok.pos)
        self.advance()
        return sign * int(tok.text)

    def parse_fn(self) -> FnDef:
        pos = self.expect("fn").pos
        name = self.advance()
        if name.kind != "name":
            raise MiniImpSyntaxError(f"expected function name, found {name.text!r}", name.pos)
        self.expect("(")
        params = []
        if self.cur.text != ")":
            params.append(self.expect_name().text)
            while self.cur.text == ",":
                self.advance()
                params.append(self.expect_name().text)
        self.expect(")")
        body = self.parse_block()
        return FnDef(name.text, tuple(params), body, pos)

    def parse_block(self) -> tuple:
        self.expect("{")
        stmts = []
        while self.cur.text != "}":
            if self.cur.kind == "eof":
                raise MiniImpSyntaxError("unterminated block", self.cur.pos)
            stmts.append(self.parse_stmt())
        self.expect("}")
        return tuple(stmts)

    def parse_stmt(self):
        tok = self.cur
        if tok.text == "var":
            self.advance()
            name = self.expect_name()
            init = None
            if self.cur.text == "=":
                self.advance()
                init = self.parse_expr()
            self.expect(";")
            return SVarDecl(name.text, init, tok.pos)
        if tok.text == "if":
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_block()
            els: tuple = ()
            if self.cur.text == "else":
                self.advance()
                if self.cur.text == "if":
                    els = (self.parse_stmt(),)
                else:
                    els = self.parse_block()
            return SIf(cond, then, els, tok.pos)
        if tok.text == "while":
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            body = self.parse_block()
            return SWhile(cond, body, tok.pos)
        if tok.text == "output":
            self.advance()
            expr = self.parse_expr()
            self.expect(";")
            return SOutput(expr, tok.pos)
        if tok.text == "call":
            self.advance()
            name = self.advance()
            if name.kind != "name":
                raise MiniImpSyntaxError(f"expected function name, found {name.text!r}", name.pos)
            self.expect("(")
            args = []
            if self.cur.text != ")":
                args.append(self.parse_expr())
                while self.cur.text == ",":
                    self.advance()
                    args.append(self.parse_expr())
            self.expect(")")
            self.expect(";")
            return SCall(name.text, tuple(args), tok.pos)
        if tok.kind == "name":
            name = self.expect_name()
            self.expect("=")
            expr = self.parse_expr()
            self.expect(";")
            return SAssign(name.text, expr, tok.pos)
        raise MiniImpSyntaxError(f"expected statement, found {tok.text or 'end of input'!r}", tok.pos)

    # expression precedence: || < && < ! < comparison < additive < multiplicative < unary
    def parse_expr(self):
        return self.parse_or()

    def parse_or(self):
        left = self.parse_and()
        while self.cur.text == "||":
            pos = self.advance().pos
            left = EOr(left, self.parse_and(), pos)
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.cur.text == "&&":
            pos = self.advance().pos
            left = EAnd(left, self.parse_not(), pos)
        return left

    def parse_not(self):
        if self.cur.text == "!":
            pos = self.advance().pos
            return ENot(self.parse_not(), pos)
        return self.parse_cmp()

    def parse_cmp(self):
        left = self.parse_additive()
        if self.cur.text in ("<", "<=", ">", ">=", "==", "!="):
            op = self.advance()
            right = self.parse_additive()
            return ECmp(op.text, left, right, op.pos)
        return left

    def parse_additive(self):
        left = self.parse_multiplicative()
        while self.cur.text in ("+", "-"):
            op = self.advance()
            left = EBin(op.text, left, self.parse_multiplicative(), op.pos)
        return left

    def parse_multiplicative(self):
        left = self.parse_unary()
        while self.cur.text in ("*", "/", "%"):
            op = self.advance()
            left = EBin(op.text, left, self.parse_unary(), op.pos)
        return left

    def parse_unary(self):
        tok = self.cur
        if tok.text == "-":
            self.advance()
            return ENeg(self.parse_unary(), tok.pos)
        if tok.text == "(":
            self.advance()
            expr = self.parse_expr()
            self.expect(")")
            return expr
        if tok.kind == "int":
            self.advance()
            return EInt(int(tok.text), tok.pos)
        if tok.kind == "name":
            name = self.expect_name()
            return EVar(name.text, name.pos)
        raise MiniImpSyntaxError(f"expected expression, found {tok.text or 'end of input'!r}", tok.pos)


# ---------------------------------------------------------------------------
# Semantic checks
# ---------------------------------------------------------------------------


def _expr_type(e, scope: set, pos_of_use=None) -> str:
    """'int' or 'bool'; raises SemanticError on undeclared names or type mix."""
    if isinstance(e, EInt):
        return "int"
    if isinstance(e, EVar):
        if e.name not in scope:
            raise SemanticError(f"undeclared variable {e.name!r}", e.pos)
        return "int"
    if isinstance(e, ENeg):
        _require(e.operand, "int", scope)
        return "int"
    if isinstance(e, EBin):
        _require(e.left, "int", scope)
        _require(e.right, "int", scope)
        return "int"
    if isinstance(e, ECmp):
        _require(e.left, "int", scope)
        _require(e.right, "int", scope)
        return "bool"
    if isinstance(e, (EAnd, EOr)):
        _require(e.left, "bool", scope)
        _require(e.right, "bool", scope)
        return "bool"
    if isinstance(e, ENot):
        _require(e.operand, "bool", scope)
        return "bool"
    raise TypeError(f"not an expression: {e!r}")


def _require(e, ty: str, scope: set):
    actual = _expr_type(e, scope)
    if actual != ty:
        pos = getattr(e, "pos", (0, 0))
        raise SemanticError(f"expected {ty} expression, found {actual}", pos)


def _check_block(stmts, scope: set, fn_names: dict, ast: Ast, checked: set):
    for s in stmts:
        if isinstance(s, SVarDecl):
            if s.name in scope:
                raise SemanticError(f"duplicate declaration of {s.name!r}", s.pos)
            if s.init is not None:
                _require(s.init, "int", scope)
            scope.add(s.name)
        elif isinstance(s, SAssign):
            if s.name not in scope:
                raise SemanticError(f"undeclared variable {s.name!r}", s.pos)
            _require(s.expr, "int", scope)
        elif isinstance(s, SIf):
            _require(s.cond, "bool", scope)
            _check_block(s.then, scope, fn_names, ast, checked)
            _check_block(s.els, scope, fn_names, ast, checked)
        elif isinstance(s, SWhile):
            _require(s.cond, "bool", scope)
            _check_block(s.body, scope, fn_names, ast, checked)
        elif isinstance(s, SOutput):
            _require(s.expr, "int", scope)
        elif isinstance(s, SCall):
            if s.fn not in fn_names:
                raise SemanticError(f"call to undefined function {s.fn!r}", s.pos)
            if len(s.args) != len(fn_names[s.fn].params):
                raise SemanticError(
                    f"function {s.fn!r} takes {len(fn_names[s.fn].params)} argument(s), "
                    f"got {len(s.args)}",
                    s.pos,
                )
            for a in s.args:
                _require(a, "int", scope)
        else:
            raise TypeError(f"not a statement: {s!r}")


def check_ast(ast: Ast) -> None:
    seen_inputs = set()
    for d in ast.inputs:
        if d.name in seen_inputs:
            raise SemanticError(f"duplicate input {d.name!r}", d.pos)
        seen_inputs.add(d.name)
    fn_names = {}
    for f in ast.functions:
        if f.name in fn_names:
            raise SemanticError(f"duplicate function {f.name!r}", f.pos)
        fn_names[f.name] = f
    if ast.entry not in fn_names:
        raise SemanticError(f"missing entry function {ast.entry!r}")
    if fn_names[ast.entry].params:
        raise SemanticError(f"entry function {ast.entry!r} must take no parameters")
    for f in ast.functions:
        # a function sees the program inputs plus its own parameters/locals
        scope = set(seen_inputs) | set(f.params)
        dup = set(f.params) & seen_inputs
        if dup:
            raise SemanticError(f"parameter shadows input: {sorted(dup)[0]!r}", f.pos)
        _check_block(f.body, scope, fn_names, ast, set())


def parse_program(src: SourceProgram) -> Ast:
    """Parse MiniImp source into a checked Ast.

    Raises MiniImpSyntaxError on grammatical errors and SemanticError on
    undeclared variables, missing main, duplicate inputs and arity errors.
    """
    ast = _Parser(_tokenize(src.text)).parse_program()
    check_ast(ast)
    return ast


def parse_text(text: str, origin: str = "<inline>") -> Ast:
    return parse_program(SourceProgram(text, origin))


# ---------------------------------------------------------------------------
# Pretty printer (round-trips through parse_program)
# ---------------------------------------------------------------------------

_EPREC = {"||": 1, "&&": 2, "!": 3, "cmp": 4, "+": 5, "-": 5, "*": 6, "/": 6, "%": 6, "neg": 7}


def render_expr(e, parent=0) -> str:
    if isinstance(e, EInt):
        return str(e.value)
    if isinstance(e, EVar):
        return e.name
    if isinstance(e, ENeg):
        return f"-{render_expr(e.operand, _EPREC['neg'])}"
    if isinstance(e, ENot):
        return f"!{render_expr(e.operand, _EPREC['!'])}"
    if isinstance(e, EBin):
        p = _EPREC[e.op]
        s = f"{render_expr(e.left, p)} {e.op} {render_expr(e.right, p + 1)}"
        return f"({s})" if p < parent else s
    if isinstance(e, ECmp):
        p = _EPREC["cmp"]
        s = f"{render_expr(e.left, p + 1)} {e.op} {render_expr(e.right, p + 1)}"
        return f"({s})" if p < parent else s
    if isinstance(e, EAnd):
        p = _EPREC["&&"]
        s = f"{render_expr(e.left, p)} && {render_expr(e.right, p + 1)}"
        return f"({s})" if p < parent else s
    if isinstance(e, EOr):
        p = _EPREC["||"]
        s = f"{render_expr(e.left, p)} || {render_expr(e.right, p + 1)}"
        return f"({s})" if p < parent else s
    raise TypeError(f"not an expression: {e!r}")


def _render_stmt(s, indent: str, out: list):
    if isinstance(s, SVarDecl):
        if s.init is None:
            out.append(f"{indent}var {s.name};")
        else:
            out.append(f"{indent}var {s.name} = {render_expr(s.init)};")
    elif isinstance(s, SAssign):
        out.append(f"{indent}{s.name} = {render_expr(s.expr)};")
    elif isinstance(s, SOutput):
        out.append(f"{indent}output {render_expr(s.expr)};")
    elif isinstance(s, SCall):
        args = ", ".join(render_expr(a) for a in s.args)
        out.append(f"{indent}call {s.fn}({args});")
    elif isinstance(s, SIf):
        out.append(f"{indent}if ({render_expr(s.cond)}) {{")
        for t in s.then:
            _render_stmt(t, indent + "    ", out)
        if s.els:
            out.append(f"{indent}}} else {{")
            for t in s.els:
                _render_stmt(t, indent + "    ", out)
        out.append(f"{indent}}}")
    elif isinstance(s, SWhile):
        out.append(f"{indent}while ({render_expr(s.cond)}) {{")
        for t in s.body:
            _render_stmt(t, indent + "    ", out)
        out.append(f"{indent}}}")
    else:
        raise TypeError(f"not a statement: {s!r}")


def render_program(ast: Ast) -> str:
    out: list = []
    for d in ast.inputs:
        out.append(f"input {d.name}: int in [{d.lo}, {d.hi}];")
    for f in ast.functions:
        if out:
            out.append("")
        params = ", ".join(f.params)
        out.append(f"fn {f.name}({params}) {{")
        for s in f.body:
            _render_stmt(s, "    ", out)
        out.append("}")
    return "\n".join(out) + "\n"
