"""Native parse trees to UAST.

Each native kind is handled by exactly one rule class:

* ``Direct``     - one native node becomes one UAST node of the same meaning;
* ``Structural`` - the node is reshaped into a shared UAST form
                   (``for`` loops into ``RangeStatement``, blocks flattened, ...);
* ``Desugar``    - reducible sugar is rewritten into core nodes and the
                   synthesized nodes are flagged ``synthetic``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from ..uast.nodes import SourceLocation, UastNode, make
from .base import NativeNode

DIRECT, STRUCTURAL, DESUGAR = "Direct", "Structural", "Desugar"


class UnsupportedConstruct(Exception):
    pass


@dataclass(frozen=True)
class LoweringRule:
    rule_class: str
    source_kind: str
    description: str


def _rules(lang: str, table: dict[str, tuple[str, str]]) -> dict[str, LoweringRule]:
    return {kind: LoweringRule(cls, kind, desc) for kind, (cls, desc) in table.items()}


MINIPY_RULES = _rules(
    "minipy",
    {
        "Module": (STRUCTURAL, "module body -> PackageDeclaration"),
        "FunctionDef": (DIRECT, "def -> FunctionDefinition"),
        "Param": (STRUCTURAL, "parameter -> VariableDeclaration(declKind=param)"),
        "Decorated": (DESUGAR, "@d def f -> FunctionDefinition f; f = d(f)"),
        "ClassDef": (DIRECT, "class -> ClassDefinition"),
        "If": (DIRECT, "if/elif/else -> nested IfStatement"),
        "While": (DIRECT, "while -> WhileStatement"),
        "For": (STRUCTURAL, "for x in e -> RangeStatement"),
        "Try": (DIRECT, "try/except -> TryStatement (exception type discarded)"),
        "Return": (DIRECT, "return -> ReturnStatement"),
        "Pass": (DIRECT, "pass -> Noop"),
        "Break": (DIRECT, "break -> BreakStatement"),
        "Continue": (DIRECT, "continue -> ContinueStatement"),
        "Raise": (DIRECT, "raise -> ThrowStatement"),
        "Import": (STRUCTURAL, "import m -> ImportStatement"),
        "Assign": (STRUCTURAL, "a = b = v -> ExpressionStatement(AssignmentExpression)"),
        "AugAssign": (DIRECT, "a += v -> AssignmentExpression(operator=+=)"),
        "ExprStmt": (DIRECT, "expression statement -> ExpressionStatement"),
        "Name": (DIRECT, "name -> Identifier"),
        "Num": (DIRECT, "number -> Literal"),
        "Str": (DIRECT, "string -> Literal"),
        "Bool": (DIRECT, "True/False -> Literal"),
        "NoneLit": (DIRECT, "None -> Literal(null)"),
        "BinOp": (DIRECT, "arithmetic -> BinaryExpression"),
        "BoolOp": (DIRECT, "and/or -> BinaryExpression"),
        "Compare": (DIRECT, "comparison -> BinaryExpression"),
        "UnaryOp": (DIRECT, "unary -> UnaryExpression"),
        "Call": (DIRECT, "call -> CallExpression"),
        "Attribute": (DIRECT, "a.b -> MemberAccess"),
        "Subscript": (DIRECT, "a[i] -> IndexAccess"),
        "List": (DIRECT, "list display -> ArrayLiteral"),
        "Tuple": (STRUCTURAL, "tuple -> ArrayLiteral(tuple=true)"),
        "Dict": (DIRECT, "dict display -> ObjectLiteral"),
        "IfExp": (DIRECT, "a if c else b -> ConditionalExpression"),
        "Yield": (DIRECT, "yield -> YieldExpression"),
        "ListComp": (DESUGAR, "[e for x in it] -> Sequence(VariableDeclaration, RangeStatement, Identifier)"),
        "Lambda": (DESUGAR, "lambda -> FunctionDefinition with implicit return"),
        "JoinedStr": (DESUGAR, "f-string -> left-associated '+' chain"),
        "FormattedValue": (DESUGAR, "f-string hole -> its expression"),
    },
)

MINIJS_RULES = _rules(
    "minijs",
    {
        "Program": (STRUCTURAL, "program -> PackageDeclaration"),
        "FunctionDecl": (DIRECT, "function declaration -> FunctionDefinition"),
        "Function": (DIRECT, "function expression -> FunctionDefinition"),
        "Arrow": (DESUGAR, "(a) => e -> FunctionDefinition(lexicalThis) with implicit return"),
        "ClassDecl": (DIRECT, "class -> ClassDefinition"),
        "Method": (STRUCTURAL, "class method -> FunctionDefinition(isMethod)"),
        "Param": (STRUCTURAL, "parameter -> VariableDeclaration(declKind=param)"),
        "VarDecl": (STRUCTURAL, "var/let/const list -> one VariableDeclaration per name; require -> ImportStatement"),
        "If": (DIRECT, "if/else -> IfStatement"),
        "While": (DIRECT, "while -> WhileStatement"),
        "ForOf": (STRUCTURAL, "for (x of e) -> RangeStatement"),
        "Return": (DIRECT, "return -> ReturnStatement"),
        "Try": (DIRECT, "try/catch -> TryStatement"),
        "Throw": (DIRECT, "throw -> ThrowStatement"),
        "Break": (DIRECT, "break -> BreakStatement"),
        "Continue": (DIRECT, "continue -> ContinueStatement"),
        "Block": (STRUCTURAL, "block -> flattened statement list"),
        "Empty": (DIRECT, "; -> Noop"),
        "ExprStmt": (DIRECT, "expression statement -> ExpressionStatement; require -> ImportStatement"),
        "Assign": (DIRECT, "assignment -> AssignmentExpression"),
        "Update": (DESUGAR, "x++ -> x += 1"),
        "Binary": (DIRECT, "binary -> BinaryExpression"),
        "Logical": (DIRECT, "&& / || -> BinaryExpression"),
        "Unary": (DIRECT, "unary -> UnaryExpression"),
        "Await": (DIRECT, "await -> AwaitExpression"),
        "Call": (DIRECT, "call -> CallExpression"),
        "New": (DIRECT, "new -> NewExpression"),
        "Member": (DIRECT, "a.b -> MemberAccess"),
        "Index": (DIRECT, "a[i] -> IndexAccess"),
        "Name": (DIRECT, "name -> Identifier"),
        "This": (DIRECT, "this -> Identifier(this)"),
        "Num": (DIRECT, "number -> Literal"),
        "Str": (DIRECT, "string -> Literal"),
        "Bool": (DIRECT, "true/false -> Literal"),
        "Null": (DIRECT, "null -> Literal(null)"),
        "Undefined": (DIRECT, "undefined -> Literal(null)"),
        "Array": (DIRECT, "array literal -> ArrayLiteral"),
        "Object": (DIRECT, "object literal -> ObjectLiteral"),
        "Conditional": (DIRECT, "c ? a : b -> ConditionalExpression"),
        "Template": (DESUGAR, "template literal -> left-associated '+' chain"),
        "Substitution": (DESUGAR, "template hole -> its expression"),
    },
)

RULES: dict[str, dict[str, LoweringRule]] = {"minipy": MINIPY_RULES, "minijs": MINIJS_RULES}


class Lowerer:
    """One lowering pass over one compilation unit."""

    def __init__(self, lang: str):
        self.lang = lang
        self.rules = RULES[lang]
        self._lc_counter = 0
        self.applied: list[tuple[str, str]] = []

    # helpers -----------------------------------------------------------------

    def n(self, kind: str, loc: SourceLocation, synthetic: bool = False, **fields: Any) -> UastNode:
        return make(kind, loc, lang=self.lang, synthetic=synthetic, **fields)

    def _rule(self, native: NativeNode) -> LoweringRule:
        rule = self.rules.get(native.kind)
        if rule is None:
            raise UnsupportedConstruct(f"no lowering rule for {self.lang} {native.kind} at {native.loc}")
        self.applied.append((native.kind, rule.rule_class))
        return rule

    def fresh_tmp(self) -> str:
        name = f"__lc{self._lc_counter}"
        self._lc_counter += 1
        return name

    def lower_unit(self, native: NativeNode) -> UastNode:
        self._rule(native)
        body = self.stmts(native.body)
        return self.n("PackageDeclaration", native.loc, name=native.name, body=body)

    def stmts(self, natives, in_class: bool = False) -> list[UastNode]:
        out: list[UastNode] = []
        for s in natives:
            out.extend(self.stmt(s, in_class))
        return out

    def stmt(self, native: NativeNode, in_class: bool = False) -> list[UastNode]:
        self._rule(native)
        handler: Callable = getattr(self, f"s_{native.kind}", None)
        if handler is None:
            raise UnsupportedConstruct(f"{native.kind} is not a statement")
        if native.kind in ("FunctionDef", "Decorated"):
            return handler(native, in_class)
        return handler(native)

    def expr(self, native: NativeNode) -> UastNode:
        self._rule(native)
        handler = getattr(self, f"e_{native.kind}", None)
        if handler is None:
            raise UnsupportedConstruct(f"{native.kind} is not an expression")
        return handler(native)

    def body_of(self, native) -> list[UastNode]:
        """MiniJS statement bodies may be a Block or a single statement."""
        if native is None:
            return []
        if isinstance(native, list):
            return self.stmts(native)
        return self.stmt(native)

    def param(self, p: NativeNode) -> UastNode:
        self._rule(p)
        ident = self.n("Identifier", p.loc, name=p.name)
        default = self.expr(p.default) if p.default is not None else None
        return self.n("VariableDeclaration", p.loc, id=ident, init=default, declKind="param")

    def literal(self, loc: SourceLocation, value: Any, synthetic: bool = False) -> UastNode:
        if value is None:
            lit = "null"
        elif isinstance(value, bool):
            lit = "boolean"
        elif isinstance(value, (int, float)):
            lit = "number"
        else:
            lit = "string"
        return self.n("Literal", loc, synthetic=synthetic, value=value, litType=lit)

    # Rule #3 -----------------------------------------------------------------

    def desugar_listcomp(self, native: NativeNode) -> UastNode:
        loc = native.loc
        tmp = self.fresh_tmp()
        iterable = self.expr(native.iter)
        target = self.expr(native.target)
        elt = self.expr(native.elt)
        decl = self.n(
            "VariableDeclaration",
            loc,
            True,
            id=self.n("Identifier", loc, True, name=tmp),
            init=self.n("ArrayLiteral", loc, True, elements=[]),
            declKind="var",
        )
        append = self.n(
            "ExpressionStatement",
            loc,
            True,
            expression=self.n(
                "CallExpression",
                loc,
                True,
                callee=self.n("MemberAccess", loc, True, object=self.n("Identifier", loc, True, name=tmp), property="append"),
                arguments=[elt],
            ),
        )
        loop = self.n("RangeStatement", loc, True, left=target, right=iterable, body=[append])
        result = self.n("Identifier", loc, True, name=tmp)
        return self.n("Sequence", loc, True, expressions=[decl, loop, result])

    def desugar_lambda(self, native: NativeNode, lexical_this: bool, is_async: bool = False) -> UastNode:
        params = [self.param(p) for p in native.params]
        body_native = native.body
        if isinstance(body_native, NativeNode) and body_native.kind == "Block":
            self._rule(body_native)
            body = self.stmts(body_native.body)
        else:
            value = self.expr(body_native)
            body = [self.n("ReturnStatement", native.loc, True, argument=value)]
        return self.n(
            "FunctionDefinition",
            native.loc,
            True,
            name=None,
            params=params,
            body=body,
            lexicalThis=lexical_this,
            **{"async": is_async},
        )

    def desugar_fstring(self, native: NativeNode) -> UastNode:
        loc = native.loc
        parts: list[UastNode] = []
        for piece in native.values:
            self._rule(piece)
            if piece.kind == "Str":
                if piece.s:
                    parts.append(self.literal(loc, piece.s, synthetic=True))
            else:
                parts.append(self.expr(piece.value))
        if not parts:
            return self.literal(loc, "", synthetic=True)
        acc = parts[0]
        for part in parts[1:]:
            acc = self.n("BinaryExpression", loc, True, operator="+", left=acc, right=part)
        return acc


def _contains_yield(body) -> bool:
    stack = list(body)
    while stack:
        node = stack.pop()
        if not isinstance(node, NativeNode):
            continue
        if node.kind == "Yield":
            return True
        if node.kind in ("FunctionDef", "Lambda", "ClassDef", "Decorated"):
            continue
        for value in node.fields.values():
            if isinstance(value, NativeNode):
                stack.append(value)
            elif isinstance(value, list):
                stack.extend(value)
    return False


class MiniPyLowerer(Lowerer):
    def __init__(self):
        super().__init__("minipy")

    def s_FunctionDef(self, node, in_class=False):
        params = [self.param(p) for p in node.params]
        body = self.stmts(node.body)
        return [
            self.n(
                "FunctionDefinition",
                node.loc,
                name=node.name,
                params=params,
                body=body,
                isMethod=in_class,
                generator=_contains_yield(node.body),
            )
        ]

    def s_Decorated(self, node, in_class=False):
        self._rule(node.func)
        out = self.s_FunctionDef(node.func, in_class)
        name = node.func.name
        for deco in reversed(node.decorators):
            loc = deco.loc
            call = self.n(
                "CallExpression",
                loc,
                True,
                callee=self.expr(deco),
                arguments=[self.n("Identifier", loc, True, name=name)],
            )
            assign = self.n(
                "AssignmentExpression", loc, True, left=self.n("Identifier", loc, True, name=name), right=call
            )
            out.append(self.n("ExpressionStatement", loc, True, expression=assign))
        return out

    def s_ClassDef(self, node):
        supers = [self.expr(b) for b in node.bases]
        body = self.stmts(node.body, in_class=True)
        return [self.n("ClassDefinition", node.loc, name=node.name, supers=supers, body=body)]

    def s_If(self, node):
        alternate = self.stmts(node.orelse)
        return [
            self.n("IfStatement", node.loc, test=self.expr(node.test), consequent=self.stmts(node.body), alternate=alternate)
        ]

    def s_While(self, node):
        return [self.n("WhileStatement", node.loc, test=self.expr(node.test), body=self.stmts(node.body))]

    def s_For(self, node):
        return [
            self.n(
                "RangeStatement",
                node.loc,
                left=self.expr(node.target),
                right=self.expr(node.iter),
                body=self.stmts(node.body),
            )
        ]

    def s_Try(self, node):
        if node.type is not None:
            # exception types are not modeled; consumed here
            for sub in node.type.iter_native():
                self.applied.append((sub.kind, "Direct"))
        param = self.expr(node.name) if node.name is not None else None
        return [
            self.n(
                "TryStatement",
                node.loc,
                body=self.stmts(node.body),
                param=param,
                handler=self.stmts(node.handler),
                finalizer=self.stmts(node.finalbody),
            )
        ]

    def s_Return(self, node):
        value = self.expr(node.value) if node.value is not None else None
        return [self.n("ReturnStatement", node.loc, argument=value)]

    def s_Pass(self, node):
        return [self.n("Noop", node.loc)]

    def s_Break(self, node):
        return [self.n("BreakStatement", node.loc)]

    def s_Continue(self, node):
        return [self.n("ContinueStatement", node.loc)]

    def s_Raise(self, node):
        return [self.n("ThrowStatement", node.loc, argument=self.expr(node.exc))]

    def s_Import(self, node):
        local = node.alias or node.module.split(".")[0]
        module = node.module if node.alias else node.module.split(".")[0]
        return [self.n("ImportStatement", node.loc, moduleName=module, localName=local)]

    def s_Assign(self, node):
        value = self.expr(node.value)
        for target in reversed(node.targets):
            value = self.n("AssignmentExpression", node.loc, left=self.expr(target), right=value)
        return [self.n("ExpressionStatement", node.loc, expression=value)]

    def s_AugAssign(self, node):
        assign = self.n(
            "AssignmentExpression", node.loc, left=self.expr(node.target), right=self.expr(node.value), operator=node.op
        )
        return [self.n("ExpressionStatement", node.loc, expression=assign)]

    def s_ExprStmt(self, node):
        return [self.n("ExpressionStatement", node.loc, expression=self.expr(node.value))]

    # expressions

    def e_Name(self, node):
        return self.n("Identifier", node.loc, name=node.id)

    def e_Num(self, node):
        return self.literal(node.loc, node.n)

    def e_Str(self, node):
        return self.literal(node.loc, node.s)

    def e_Bool(self, node):
        return self.literal(node.loc, node.value)

    def e_NoneLit(self, node):
        return self.literal(node.loc, None)

    def e_BinOp(self, node):
        return self.n("BinaryExpression", node.loc, operator=node.op, left=self.expr(node.left), right=self.expr(node.right))

    e_BoolOp = e_BinOp
    e_Compare = e_BinOp

    def e_UnaryOp(self, node):
        return self.n("UnaryExpression", node.loc, operator=node.op, argument=self.expr(node.operand))

    def e_Call(self, node):
        return self.n(
            "CallExpression", node.loc, callee=self.expr(node.func), arguments=[self.expr(a) for a in node.args]
        )

    def e_Attribute(self, node):
        return self.n("MemberAccess", node.loc, object=self.expr(node.value), property=node.attr)

    def e_Subscript(self, node):
        return self.n("IndexAccess", node.loc, object=self.expr(node.value), index=self.expr(node.index))

    def e_List(self, node):
        return self.n("ArrayLiteral", node.loc, elements=[self.expr(e) for e in node.elts])

    def e_Tuple(self, node):
        return self.n("ArrayLiteral", node.loc, elements=[self.expr(e) for e in node.elts], tuple=True)

    def e_Dict(self, node):
        return self.n(
            "ObjectLiteral", node.loc, keys=[self.expr(k) for k in node.keys], values=[self.expr(v) for v in node.values]
        )

    def e_IfExp(self, node):
        return self.n(
            "ConditionalExpression",
            node.loc,
            test=self.expr(node.test),
            consequent=self.expr(node.body),
            alternate=self.expr(node.orelse),
        )

    def e_Yield(self, node):
        value = self.expr(node.value) if node.value is not None else None
        return self.n("YieldExpression", node.loc, argument=value)

    def e_ListComp(self, node):
        return self.desugar_listcomp(node)

    def e_Lambda(self, node):
        return self.desugar_lambda(node, lexical_this=False)

    def e_JoinedStr(self, node):
        return self.desugar_fstring(node)


def _is_require(node) -> bool:
    return (
        isinstance(node, NativeNode)
        and node.kind == "Call"
        and node.func.kind == "Name"
        and node.func.id == "require"
        and len(node.args) == 1
        and node.args[0].kind == "Str"
    )


class MiniJsLowerer(Lowerer):
    def __init__(self):
        super().__init__("minijs")

    def _function(self, node, name, is_method=False):
        params = [self.param(p) for p in node.params]
        self._rule(node.body)
        body = self.stmts(node.body.body)
        return self.n(
            "FunctionDefinition",
            node.loc,
            name=name,
            params=params,
            body=body,
            isMethod=is_method,
            **{"async": bool(node.is_async)},
        )

    def _require(self, call, local):
        self._rule(call)
        self._rule(call.func)
        self._rule(call.args[0])
        return self.n("ImportStatement", call.loc, moduleName=call.args[0].s, localName=local)

    def s_FunctionDecl(self, node):
        return [self._function(node, node.name)]

    def s_ClassDecl(self, node):
        supers = [self.expr(node.base)] if node.base is not None else []
        body = []
        for m in node.methods:
            self._rule(m)
            body.append(self._function(m, m.name, is_method=True))
        return [self.n("ClassDefinition", node.loc, name=node.name, supers=supers, body=body)]

    def s_VarDecl(self, node):
        out = []
        for name, init in node.decls:
            self._rule(name)
            if _is_require(init):
                out.append(self._require(init, name.id))
                continue
            ident = self.n("Identifier", name.loc, name=name.id)
            value = self.expr(init) if init is not None else None
            out.append(self.n("VariableDeclaration", node.loc, id=ident, init=value, declKind=node.decl_kind))
        return out

    def s_If(self, node):
        return [
            self.n(
                "IfStatement",
                node.loc,
                test=self.expr(node.test),
                consequent=self.body_of(node.body),
                alternate=self.body_of(node.orelse),
            )
        ]

    def s_While(self, node):
        return [self.n("WhileStatement", node.loc, test=self.expr(node.test), body=self.body_of(node.body))]

    def s_ForOf(self, node):
        return [
            self.n(
                "RangeStatement",
                node.loc,
                left=self.expr(node.target),
                right=self.expr(node.iter),
                body=self.body_of(node.body),
            )
        ]

    def s_Return(self, node):
        value = self.expr(node.value) if node.value is not None else None
        return [self.n("ReturnStatement", node.loc, argument=value)]

    def s_Try(self, node):
        param = self.expr(node.param) if node.param is not None else None
        return [
            self.n(
                "TryStatement",
                node.loc,
                body=self.body_of(node.body),
                param=param,
                handler=self.body_of(node.handler),
                finalizer=self.body_of(node.finalizer),
            )
        ]

    def s_Throw(self, node):
        return [self.n("ThrowStatement", node.loc, argument=self.expr(node.value))]

    def s_Break(self, node):
        return [self.n("BreakStatement", node.loc)]

    def s_Continue(self, node):
        return [self.n("ContinueStatement", node.loc)]

    def s_Block(self, node):
        return self.stmts(node.body)

    def s_Empty(self, node):
        return [self.n("Noop", node.loc)]

    def s_ExprStmt(self, node):
        if _is_require(node.value):
            return [self._require(node.value, None)]
        return [self.n("ExpressionStatement", node.loc, expression=self.expr(node.value))]

    # expressions

    def e_Assign(self, node):
        return self.n(
            "AssignmentExpression", node.loc, left=self.expr(node.target), right=self.expr(node.value), operator=node.op
        )

    def e_Update(self, node):
        one = self.literal(node.loc, 1, synthetic=True)
        op = "+=" if node.op == "++" else "-="
        return self.n("AssignmentExpression", node.loc, True, left=self.expr(node.target), right=one, operator=op)

    def e_Binary(self, node):
        return self.n("BinaryExpression", node.loc, operator=node.op, left=self.expr(node.left), right=self.expr(node.right))

    e_Logical = e_Binary

    def e_Unary(self, node):
        return self.n("UnaryExpression", node.loc, operator=node.op, argument=self.expr(node.operand))

    def e_Await(self, node):
        return self.n("AwaitExpression", node.loc, argument=self.expr(node.value))

    def e_Call(self, node):
        return self.n(
            "CallExpression", node.loc, callee=self.expr(node.func), arguments=[self.expr(a) for a in node.args]
        )

    def e_New(self, node):
        return self.n(
            "NewExpression", node.loc, callee=self.expr(node.callee), arguments=[self.expr(a) for a in node.args]
        )

    def e_Member(self, node):
        return self.n("MemberAccess", node.loc, object=self.expr(node.object), property=node.prop)

    def e_Index(self, node):
        return self.n("IndexAccess", node.loc, object=self.expr(node.object), index=self.expr(node.index))

    def e_Name(self, node):
        return self.n("Identifier", node.loc, name=node.id)

    def e_This(self, node):
        return self.n("Identifier", node.loc, name="this")

    def e_Num(self, node):
        return self.literal(node.loc, node.n)

    def e_Str(self, node):
        return self.literal(node.loc, node.s)

    def e_Bool(self, node):
        return self.literal(node.loc, node.value)

    def e_Null(self, node):
        return self.literal(node.loc, None)

    e_Undefined = e_Null

    def e_Array(self, node):
        return self.n("ArrayLiteral", node.loc, elements=[self.expr(e) for e in node.elts])

    def e_Object(self, node):
        return self.n(
            "ObjectLiteral", node.loc, keys=[self.expr(k) for k in node.keys], values=[self.expr(v) for v in node.values]
        )

    def e_Conditional(self, node):
        return self.n(
            "ConditionalExpression",
            node.loc,
            test=self.expr(node.test),
            consequent=self.expr(node.body),
            alternate=self.expr(node.orelse),
        )

    def e_Function(self, node):
        return self._function(node, node.name)

    def e_Arrow(self, node):
        return self.desugar_lambda(node, lexical_this=True, is_async=bool(node.is_async))

    def e_Template(self, node):
        return self.desugar_fstring(node)


def lower(native: NativeNode, lang: str) -> UastNode:
    lowerer = {"minipy": MiniPyLowerer, "minijs": MiniJsLowerer}[lang]()
    return lowerer.lower_unit(native)
