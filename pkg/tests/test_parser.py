import pytest
from hypothesis import given, settings, strategies as st

from mutkill import parser as P

MINIMAL = "input x: int in [-8,7];\nfn main() { output x; }\n"


class TestParse:
    def test_minimal_program(self):
        ast = P.parse_program(P.SourceProgram(MINIMAL))
        assert len(ast.inputs) == 1
        assert len(ast.functions) == 1
        assert ast.inputs[0].name == "x"
        assert ast.input_domains == {"x": (-8, 7)}

    def test_undeclared_variable(self):
        with pytest.raises(P.SemanticError, match="y"):
            P.parse_text("fn main() { output y; }")

    def test_missing_main(self):
        with pytest.raises(P.SemanticError, match="main"):
            P.parse_text("input x: int in [0,1];\nfn helper() { output x; }")

    def test_duplicate_input(self):
        with pytest.raises(P.SemanticError):
            P.parse_text("input x: int in [0,1];\ninput x: int in [0,1];\n"
                         "fn main() { output x; }")

    def test_default_domain(self):
        ast = P.parse_text("input x: int;\nfn main() { output x; }")
        assert ast.input_domains == {"x": P.DEFAULT_DOMAIN}

    def test_syntax_error_position(self):
        with pytest.raises(P.MiniImpSyntaxError) as exc:
            P.parse_text("fn main() { output ; }")
        assert exc.value.pos[0] == 1

    def test_empty_source_rejected(self):
        with pytest.raises(ValueError):
            P.SourceProgram("")

    def test_reserved_selector_name(self):
        with pytest.raises(P.MiniImpError):
            P.parse_text("fn main() { var mutId; output 0; }")

    def test_type_confusion_rejected(self):
        with pytest.raises(P.SemanticError):
            P.parse_text("input x: int in [0,1];\n"
                         "fn main() { output x < 1; }")

    def test_call_arity_checked(self):
        with pytest.raises(P.SemanticError):
            P.parse_text("input x: int in [0,1];\n"
                         "fn f(a) { output a; }\n"
                         "fn main() { call f(x, x); }")

    def test_else_if_chain(self):
        ast = P.parse_text(
            "input x: int in [-4,3];\n"
            "fn main() { if (x > 0) { output 1; } else if (x < 0) "
            "{ output -1; } else { output 0; } }")
        body = ast.function("main").body
        assert isinstance(body[0], P.SIf)

    def test_comments_ignored(self):
        ast = P.parse_text("// leading\ninput x: int in [0,1]; // trailing\n"
                           "fn main() { output x; }\n")
        assert len(ast.inputs) == 1


# random program generator for the round-trip property

_names = st.sampled_from(["a", "b", "c"])


def _exprs(scope):
    # the tokenizer has no negative literals; -1 parses as negation of 1
    base = st.one_of(st.integers(0, 9).map(P.EInt),
                     st.sampled_from(scope).map(P.EVar))
    return st.recursive(
        base,
        lambda kids: st.one_of(
            st.tuples(st.sampled_from("+-*"), kids, kids).map(
                lambda t: P.EBin(t[0], t[1], t[2])),
            kids.map(P.ENeg),
        ),
        max_leaves=5,
    )


def _stmts(scope, depth=2):
    expr = _exprs(scope)
    cond = st.tuples(st.sampled_from(P.CMP_OPS if hasattr(P, "CMP_OPS")
                                     else ["<", "<=", ">", ">=", "==", "!="]),
                     expr, expr).map(lambda t: P.ECmp(t[0], t[1], t[2]))
    assign = st.tuples(st.sampled_from(scope), expr).map(
        lambda t: P.SAssign(t[0], t[1]))
    output = expr.map(P.SOutput)
    if depth == 0:
        return st.lists(st.one_of(assign, output), min_size=1, max_size=3)
    inner = _stmts(scope, depth - 1)
    sif = st.tuples(cond, inner, inner).map(
        lambda t: P.SIf(t[0], tuple(t[1]), tuple(t[2])))
    return st.lists(st.one_of(assign, output, sif), min_size=1, max_size=3)


@given(_stmts(["a", "b", "c"]))
@settings(max_examples=100)
def test_render_reparse_roundtrip(stmts):
    decls = tuple(P.SVarDecl(n, None) for n in ["b", "c"])
    ast = P.Ast(
        inputs=(P.InputDecl("a", -8, 7),),
        functions=(P.FnDef("main", (), decls + tuple(stmts)),),
    )
    text = P.render_program(ast)
    again = P.parse_text(text)
    assert again == ast
