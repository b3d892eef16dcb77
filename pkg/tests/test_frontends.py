from __future__ import annotations

import glob
import os
from collections import Counter

import pytest

from support import CORPUS, DESUGAR_PAIRS, compile_js, compile_py, dedent, desugar_pair
from uast_taint.frontends import ParseError, compile_source, detect_language, module_name, parse
from uast_taint.frontends.lower import RULES, MiniJsLowerer, MiniPyLowerer
from uast_taint.uast import ALL_KINDS, SPECIFIC_KINDS, structural_key, validate, walk

PY_FEATURES = [
    ("def", "def f(a, b=1):\n    return a\n", "def f(a b):\n    return a\n"),
    ("class-single", "class A(B):\n    pass\n", "class A(B:\n    pass\n"),
    ("class-multi", "class C(A, B):\n    x = 1\n", "class C(A,, B):\n    x = 1\n"),
    ("decorator", "@route\ndef f():\n    pass\n", "@route\nx = 1\n"),
    ("if-elif-else", "if a:\n    x = 1\nelif b:\n    x = 2\nelse:\n    x = 3\n", "if a\n    x = 1\n"),
    ("while", "while x:\n    x = x - 1\n", "while x\n    pass\n"),
    ("for", "for x in xs:\n    print(x)\n", "for x xs:\n    pass\n"),
    ("listcomp", "ys = [x + 1 for x in xs]\n", "ys = [x for x xs]\n"),
    ("lambda", "f = lambda a: a + 1\n", "f = lambda a a\n"),
    ("f-string", 'm = f"hi {name}!"\n', 'm = f"hi {name"\n'),
    ("tuple", "t = (1, 2)\n", "t = (1, 2\n"),
    ("list-dict", 'd = {"k": [1, 2]}\n', 'd = {"k" [1]}\n'),
    ("return", "def f():\n    return\n", "def f():\nreturn 1\n"),
    ("yield", "def g():\n    yield 1\n", "def g():\n    yield )\n"),
    ("try-except", "try:\n    f()\nexcept E as e:\n    g(e)\n", "try:\n    f()\nexcept E as:\n    pass\n"),
    ("import", "import os\n", "import\n"),
    ("assign", "a = b = 3\n", "a = = 3\n"),
    ("call-attr-index", "x = o.f(a)[0]\n", "x = o.(a)\n"),
    ("operators", "x = not a and b or c < d + e * 2 == f\n", "x = a + * b\n"),
    ("literals", 'x = ["s", 1, 2.5, True, None]\n', 'x = "unterminated\n'),
]

JS_FEATURES = [
    ("function-decl", "function f(a) { return a; }", "function (a) { return a; }"),
    ("function-expr", "var f = function (a) { return a; };", "var f = function (a { return a; };"),
    ("arrow-expr", "let f = (a) => a + 1;", "let f = (a) => ;"),
    ("arrow-block", "let f = (a) => { return a; };", "let f = (a) => { return a; ;"),
    ("class-extends", "class B extends A { m(x) { return x; } }", "class B extends { }"),
    ("prototype", "F.prototype.m = function () { return 1; };", "F.prototype. = 1;"),
    ("new", "var o = new F(1);", "var o = new ;"),
    ("var-let-const", "var a = 1; let b = 2; const c = 3;", "let = 2;"),
    ("if-else", "if (a) { x = 1; } else { x = 2; }", "if a { x = 1; }"),
    ("while", "while (x) { x = x - 1; }", "while (x { }"),
    ("for-of", "for (const x of xs) { f(x); }", "for (const x in xs) { f(x); }"),
    ("template", "var s = `u=${u}&p=${p}`;", "var s = `u=${u`;"),
    ("object-array", "var o = {a: 1, b: [1, 2]};", "var o = {a 1};"),
    ("member-index", "var v = o.a[0];", "var v = o.[0];"),
    ("promise", "var p = Promise.resolve(1).then((x) => x);", "var p = Promise.resolve(1).then((x) => );"),
    ("async-await", "async function f() { var v = await g(); }", "async function f() { var v = await ; }"),
    ("return", "function f() { return; }", "function f() { return return; }"),
    ("try-catch", "try { f(); } catch (e) { g(e); }", "try { f(); } catch (e { }"),
    ("throw", "throw new Error('x');", "throw ;"),
    ("require", 'const m = require("mod");', 'const m = require("mod";'),
]


@pytest.mark.parametrize("feature,good,bad", PY_FEATURES, ids=[f[0] for f in PY_FEATURES])
def test_minipy_feature(feature, good, bad):
    tree = compile_source(good, "minipy", "f.mpy")
    assert validate(tree) == []
    with pytest.raises(ParseError) as info:
        parse(bad, "minipy", "f.mpy")
    assert info.value.line >= 1 and info.value.col >= 1


@pytest.mark.parametrize("feature,good,bad", JS_FEATURES, ids=[f[0] for f in JS_FEATURES])
def test_minijs_feature(feature, good, bad):
    tree = compile_source(good, "minijs", "f.mjs.txt")
    assert validate(tree) == []
    with pytest.raises(ParseError):
        parse(bad, "minijs", "f.mjs.txt")


def test_parse_minipy_assignment():
    tree = parse("x = 1\n", "minipy")
    (stmt,) = tree.body
    assert stmt.kind == "Assign"
    assert [t.kind for t in stmt.targets] == ["Name"]
    assert stmt.value.kind == "Num" and stmt.value.n == 1


def test_parse_minijs_arrow_declaration():
    tree = parse("let f = (a) => a + 1", "minijs")
    (decl,) = tree.body
    assert decl.kind == "VarDecl"
    assert decl.decls[0][1].kind == "Arrow"


def test_syntax_error_names_expected_token():
    with pytest.raises(ParseError) as info:
        parse("def f(:", "minipy", "bad.mpy")
    err = info.value
    assert (err.line, err.file) == (1, "bad.mpy")
    assert err.expected
    assert "expected" in str(err)


def test_reserved_fresh_name_prefix_rejected():
    with pytest.raises(ParseError):
        parse("__lc0 = 1\n", "minipy")
    with pytest.raises(ParseError):
        parse("var __lcx = 1;", "minijs")


def test_if_lowers_directly():
    (stmt,) = compile_py("if c:\n    a\n").body
    assert stmt.kind == "IfStatement" and stmt.test.name == "c"


def test_yield_lowers_to_yield_expression():
    fn = compile_py("def g():\n    yield x\n").body[0]
    expr = fn.body[0].expression
    assert expr.kind == "YieldExpression" and expr.argument.name == "x"
    assert fn.generator is True


def _shape(node):
    """Structure with locations and language tags dropped."""
    return structural_key(node)


def test_for_loops_share_range_shape():
    py = compile_py("for x in xs:\n    f(x)\n").body[0]
    js = compile_js("for (x of xs) { f(x); }").body[0]
    assert py.kind == js.kind == "RangeStatement"
    assert _shape(py) == _shape(js)


def test_listcomp_desugars_to_sequence():
    value = compile_py("ys = [x for x in src]\n").body[0].expression.right
    assert value.kind == "Sequence" and value.synthetic
    decl, loop, result = value.expressions
    assert decl.kind == "VariableDeclaration" and decl.id.name == "__lc0" and decl.init.kind == "ArrayLiteral"
    assert loop.kind == "RangeStatement" and loop.right.name == "src"
    append = loop.body[0].expression
    assert append.callee.property == "append" and append.callee.object.name == "__lc0"
    assert append.arguments[0].kind == "Identifier"
    assert result.kind == "Identifier" and result.name == "__lc0"


def test_listcomp_call_in_append_position():
    loop = compile_py("ys = [f(x) for x in src]\n").body[0].expression.right.expressions[1]
    arg = loop.body[0].expression.arguments[0]
    assert arg.kind == "CallExpression" and arg.callee.name == "f"


def test_listcomp_counter_is_per_unit():
    unit = compile_py("a = [x for x in s]\nb = [y for y in t]\n")
    names = [s.expression.right.expressions[0].id.name for s in unit.body]
    assert names == ["__lc0", "__lc1"]
    again = compile_py("c = [z for z in u]\n")
    assert again.body[0].expression.right.expressions[0].id.name == "__lc0"


def test_listcomp_golden_matches_manual_expansion():
    sugar = compile_py("ys = [f(x) for x in src]\n").body[0].expression.right
    manual = compile_py(
        """
        __tmp = []
        for x in src:
            __tmp.append(f(x))
        """.replace("__tmp", "acc")
    )
    decl, loop, _ = sugar.expressions
    assert _shape(loop.body) == _shape(
        [s.replace(expression=s.expression.replace(callee=s.expression.callee.replace(object=s.expression.callee.object.replace(name="__lc0")))) for s in manual.body[1].body]
    )


def test_lambda_desugars_to_function():
    fn = compile_py("f = lambda a: a + 1\n").body[0].expression.right
    assert fn.kind == "FunctionDefinition" and fn.synthetic and fn.name is None
    assert [p.id.name for p in fn.params] == ["a"]
    (ret,) = fn.body
    assert ret.kind == "ReturnStatement" and ret.argument.operator == "+"
    assert fn.lexicalThis is False


def test_arrow_same_shape_with_lexical_this():
    py = compile_py("f = lambda a: a + 1\n").body[0].expression.right
    js = compile_js("f = (a) => a + 1;").body[0].expression.right
    assert js.lexicalThis is True
    assert _shape(py.replace(lexicalThis=True)) == _shape(js)


def test_block_arrow_has_single_return():
    fn = compile_js("f = () => { return 0 };").body[0].expression.right
    assert [s.kind for s in fn.body] == ["ReturnStatement"]
    assert fn.body[0].argument.kind == "Literal"


def _chain(node):
    if node.kind == "BinaryExpression":
        return (_chain(node.left), node.operator, _chain(node.right))
    return node.value if node.kind == "Literal" else node.name


def test_fstring_left_associated_chain():
    expr = compile_py('m = f"a{x}b"\n').body[0].expression.right
    assert _chain(expr) == (("a", "+", "x"), "+", "b")
    assert expr.synthetic


def test_fstring_single_expression_is_bare():
    expr = compile_py('m = f"{x}"\n').body[0].expression.right
    assert expr.kind == "Identifier" and expr.name == "x"


def test_template_literal_chain():
    expr = compile_js("var s = `u=${u}&p=${p}`;").body[0].init
    assert _chain(expr) == ((("u=", "+", "u"), "+", "&p="), "+", "p")


def test_decorator_lowers_to_rebinding():
    unit = compile_py("@app.route('/u')\ndef h(name):\n    return name\n")
    fn, rebind = unit.body
    assert fn.kind == "FunctionDefinition" and fn.name == "h"
    assign = rebind.expression
    assert assign.kind == "AssignmentExpression" and assign.left.name == "h"
    call = assign.right
    assert call.callee.kind == "CallExpression" and call.arguments[0].name == "h"
    assert rebind.synthetic


def test_require_and_import_lower_to_import_statement():
    py = compile_py("import os\n").body[0]
    js = compile_js('const m = require("mod");').body[0]
    assert py.kind == js.kind == "ImportStatement"
    assert (py.moduleName, js.moduleName, js.localName) == ("os", "mod", "m")


def _corpus_units():
    for path in sorted(glob.glob(os.path.join(CORPUS, "*", "*", "prog.*"))):
        lang = detect_language(path)
        if lang is None:
            continue
        with open(path, encoding="utf-8") as fh:
            yield path, lang, fh.read()


def test_corpus_rule_totality_and_language_partition():
    for path, lang, text in _corpus_units():
        tree = compile_source(text, lang, path)
        assert validate(tree) == [], path
        kinds = {n.kind for n, _, _ in walk(tree)}
        assert kinds <= set(ALL_KINDS)
        foreign = {k for k in kinds if k in SPECIFIC_KINDS and SPECIFIC_KINDS[k] != lang}
        assert not foreign, (path, foreign)


def test_every_native_node_consumed_by_one_rule():
    for path, lang, text in _corpus_units():
        native = parse(text, lang, path)
        lowerer = MiniPyLowerer() if lang == "minipy" else MiniJsLowerer()
        lowerer.lower_unit(native)
        assert Counter(k for k, _ in lowerer.applied) == Counter(n.kind for n in native.iter_native()), path
        assert {k for k, _ in lowerer.applied} <= set(RULES[lang])


def test_rule_table_classes():
    assert {r.rule_class for rules in RULES.values() for r in rules.values()} == {"Direct", "Structural", "Desugar"}
    assert RULES["minipy"]["ListComp"].rule_class == "Desugar"
    assert RULES["minipy"]["If"].rule_class == "Direct"
    assert RULES["minipy"]["For"].rule_class == "Structural"


def test_synthetic_nodes_inherit_replaced_loc():
    src = "x = 1\nys = [v for v in xs]\n"
    native = parse(src, "minipy", "t.mpy")
    comp = native.body[1].value
    tree = compile_py(src)
    seq = tree.body[1].expression.right
    for node, _, _ in walk(seq):
        if node.synthetic:
            assert node.loc == comp.loc


def test_no_reducible_constructs_survive():
    src = dedent(
        """
        f = lambda a: [x for x in a]
        m = f"{f(1)} items"
        """
    )
    kinds = {n.kind for n, _, _ in walk(compile_py(src))}
    assert kinds <= set(ALL_KINDS)
    assert "Sequence" in kinds and "FunctionDefinition" in kinds


def test_language_detection():
    assert detect_language("a/b.mpy") == "minipy"
    assert detect_language("x.mjs.txt") == "minijs"
    assert detect_language("x.js") is None
    assert module_name("dir/app.mjs.txt") == "app"


@pytest.mark.parametrize("name", DESUGAR_PAIRS)
def test_desugaring_preserves_findings(name):
    sugar, manual = desugar_pair(name)
    assert sugar
    assert sugar == manual
