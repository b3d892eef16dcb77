"""MiniPy: an indentation-sensitive Python subset, lexer and parser."""

from __future__ import annotations

from typing import Optional

from .base import STRING_ESCAPES, NativeNode, ParseError, ParserBase, Token, check_identifier

KEYWORDS = frozenset(
    """def class if elif else while for in return yield try except finally raise import as
    lambda and or not is pass break continue True False None""".split()
)

OPERATORS = sorted(
    """// //= == != <= >= += -= *= ( ) [ ] { } , : . = + - * / % < > @ ;""".split(),
    key=len,
    reverse=True,
)

COMPARE_OPS = ("==", "!=", "<", ">", "<=", ">=")
AUG_OPS = ("+=", "-=", "*=", "//=")


class Lexer:
    def __init__(self, text: str, file: str, line: int = 1, col: int = 1, expression_mode: bool = False):
        self.text = text
        self.file = file
        self.i = 0
        self.line = line
        self.col = col
        self.expression_mode = expression_mode
        self.tokens: list[Token] = []
        self.indents = [0]
        self.depth = 0

    def error(self, msg: str, line: Optional[int] = None, col: Optional[int] = None) -> ParseError:
        return ParseError(msg, self.file, line or self.line, col or self.col)

    def _ch(self, k: int = 0) -> str:
        j = self.i + k
        return self.text[j] if j < len(self.text) else ""

    def _bump(self, n: int = 1) -> str:
        s = self.text[self.i : self.i + n]
        for c in s:
            if c == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.i += n
        return s

    def _emit(self, type_: str, value, line: int, col: int) -> None:
        end_line, end_col = self.line, self.col - 1
        if (end_line, end_col) < (line, col):
            end_line, end_col = line, col
        self.tokens.append(Token(type_, value, line, col, end_line, end_col))

    def tokenize(self) -> list[Token]:
        at_line_start = not self.expression_mode
        while self.i < len(self.text):
            if at_line_start and self.depth == 0:
                # a blank line leaves us at the start of the next one
                at_line_start = self._indentation()
                if at_line_start:
                    continue
            c = self._ch()
            if c == "\n":
                if self.depth == 0 and not self.expression_mode and self.tokens and self.tokens[-1].type not in (
                    "NEWLINE",
                    "INDENT",
                    "DEDENT",
                ):
                    self._emit("NEWLINE", "\n", self.line, self.col)
                self._bump()
                at_line_start = True
                continue
            if c in " \r":
                self._bump()
                continue
            if c == "\t":
                raise self.error("tab characters are not supported")
            if c == "\\" and self._ch(1) == "\n":
                self._bump(2)
                continue
            if c == "#":
                while self.i < len(self.text) and self._ch() != "\n":
                    self._bump()
                continue
            line, col = self.line, self.col
            if c.isalpha() or c == "_":
                if c in "fF" and self._ch(1) in "'\"":
                    self._bump()
                    self._fstring(line, col)
                    continue
                j = self.i
                while j < len(self.text) and (self.text[j].isalnum() or self.text[j] == "_"):
                    j += 1
                word = self._bump(j - self.i)
                if word not in KEYWORDS:
                    check_identifier(word, self.file, line, col)
                self._emit("NAME", word, line, col)
                continue
            if c.isdigit():
                self._number(line, col)
                continue
            if c in "'\"":
                value = self._string_body()
                self._emit("STRING", value, line, col)
                continue
            for op in OPERATORS:
                if self.text.startswith(op, self.i):
                    self._bump(len(op))
                    if op in "([{":
                        self.depth += 1
                    elif op in ")]}":
                        self.depth = max(0, self.depth - 1)
                    self._emit("OP", op, line, col)
                    break
            else:
                raise self.error(f"unexpected character {c!r}")
        if not self.expression_mode:
            if self.tokens and self.tokens[-1].type not in ("NEWLINE", "INDENT", "DEDENT"):
                self._emit("NEWLINE", "\n", self.line, self.col)
            while len(self.indents) > 1:
                self.indents.pop()
                self._emit("DEDENT", None, self.line, self.col)
        self.tokens.append(Token("EOF", None, self.line, self.col, self.line, self.col))
        return self.tokens

    def _indentation(self) -> bool:
        """Handle leading whitespace; return True when the line is blank."""
        j = self.i
        width = 0
        while j < len(self.text) and self.text[j] == " ":
            width += 1
            j += 1
        rest = self.text[j] if j < len(self.text) else "\n"
        if rest in "\n#" or (rest == "\r"):
            self._bump(j - self.i)
            if rest == "#":
                while self.i < len(self.text) and self._ch() != "\n":
                    self._bump()
            if self.i < len(self.text):
                self._bump()  # newline
            return True
        if rest == "\t":
            raise self.error("tab characters are not supported", self.line, width + 1)
        self._bump(j - self.i)
        if width > self.indents[-1]:
            self.indents.append(width)
            self._emit("INDENT", width, self.line, 1)
        else:
            while width < self.indents[-1]:
                self.indents.pop()
                self._emit("DEDENT", None, self.line, self.col)
            if width != self.indents[-1]:
                raise self.error("unindent does not match any outer indentation level")
        return False

    def _number(self, line: int, col: int) -> None:
        j = self.i
        while j < len(self.text) and self.text[j].isdigit():
            j += 1
        is_float = False
        if j < len(self.text) and self.text[j] == "." and j + 1 < len(self.text) and self.text[j + 1].isdigit():
            is_float = True
            j += 1
            while j < len(self.text) and self.text[j].isdigit():
                j += 1
        raw = self._bump(j - self.i)
        self._emit("NUMBER", float(raw) if is_float else int(raw), line, col)

    def _string_body(self) -> str:
        quote = self._ch()
        if self.text.startswith(quote * 3, self.i):
            self._bump(3)
            end = self.text.find(quote * 3, self.i)
            if end < 0:
                raise self.error("unterminated triple-quoted string")
            body = self._bump(end - self.i)
            self._bump(3)
            return body
        self._bump()
        out = []
        while True:
            c = self._ch()
            if c == "" or c == "\n":
                raise self.error("unterminated string literal")
            if c == quote:
                self._bump()
                return "".join(out)
            if c == "\\":
                self._bump()
                e = self._bump()
                out.append(STRING_ESCAPES.get(e, "\\" + e))
                continue
            out.append(self._bump())

    def _fstring(self, line: int, col: int) -> None:
        quote = self._ch()
        self._bump()
        parts: list[tuple] = []
        text: list[str] = []
        while True:
            c = self._ch()
            if c == "" or c == "\n":
                raise self.error("unterminated f-string")
            if c == quote:
                self._bump()
                break
            if c == "\\":
                self._bump()
                e = self._bump()
                text.append(STRING_ESCAPES.get(e, "\\" + e))
                continue
            if c == "{" and self._ch(1) == "{":
                self._bump(2)
                text.append("{")
                continue
            if c == "}" and self._ch(1) == "}":
                self._bump(2)
                text.append("}")
                continue
            if c == "}":
                raise self.error("single '}' is not allowed in an f-string")
            if c == "{":
                if text:
                    parts.append(("text", "".join(text)))
                    text = []
                self._bump()
                eline, ecol = self.line, self.col
                depth = 0
                src = []
                while True:
                    d = self._ch()
                    if d == "" or d == "\n" or d == quote:
                        raise self.error("unterminated expression in f-string")
                    if d in "([{":
                        depth += 1
                    elif d in ")]}":
                        if d == "}" and depth == 0:
                            break
                        depth -= 1
                    src.append(self._bump())
                self._bump()  # closing brace
                if not "".join(src).strip():
                    raise self.error("empty expression in f-string", eline, ecol)
                parts.append(("expr", "".join(src), eline, ecol))
                continue
            text.append(self._bump())
        if text:
            parts.append(("text", "".join(text)))
        self._emit("FSTRING", tuple(parts), line, col)


def tokenize(text: str, file: str = "<minipy>") -> list[Token]:
    return Lexer(text, file).tokenize()


class Parser(ParserBase):
    def parse_module(self, name: str) -> NativeNode:
        start = self.tok
        body = []
        while not self.at_type("EOF"):
            if self.tok.type == "NEWLINE":
                self.advance()
                continue
            body.append(self.statement())
        return NativeNode("Module", self.loc_from(start) if body else _empty_loc(self.file), {"name": name, "body": body})

    # statements ------------------------------------------------------------

    def statement(self) -> NativeNode:
        tok = self.tok
        if tok.type == "INDENT":
            raise self.error("unexpected indent")
        if tok.type == "NAME":
            handler = {
                "def": self.funcdef,
                "class": self.classdef,
                "if": self.if_stmt,
                "while": self.while_stmt,
                "for": self.for_stmt,
                "try": self.try_stmt,
            }.get(tok.value)
            if handler:
                return handler()
        if self.at("@"):
            return self.decorated()
        node = self.simple_statement()
        if self.tok.type != "EOF":
            if not self.at_type("NEWLINE") and not self.at(";"):
                raise self.error(f"unexpected {self.tok.describe()}")
            self.advance()
        return node

    def block(self) -> list[NativeNode]:
        self.expect(":")
        if self.at_type("NEWLINE"):
            self.advance()
            self.expect_type("INDENT")
            body = []
            while not self.at_type("DEDENT"):
                if self.at_type("EOF"):
                    raise self.error("unexpected end of input in block")
                body.append(self.statement())
            self.advance()
            return body
        node = self.simple_statement()
        if not self.at_type("EOF"):
            self.expect_type("NEWLINE")
        return [node]

    def decorated(self) -> NativeNode:
        decorators = []
        while self.at("@"):
            self.advance()
            decorators.append(self.expression())
            self.expect_type("NEWLINE")
        if not self.at("def"):
            raise self.error("decorators must precede a function definition")
        fn = self.funcdef()
        return NativeNode("Decorated", fn.loc, {"decorators": decorators, "func": fn})

    def funcdef(self) -> NativeNode:
        start = self.expect("def")
        name_tok = self.expect_type("NAME")
        if name_tok.value in KEYWORDS:
            raise self.error("expected a function name", name_tok)
        self.expect("(")
        params = self.params(")")
        self.expect(")")
        body = self.block()
        return self.node("FunctionDef", start, name=name_tok.value, params=params, body=body)

    def params(self, closer: str) -> list[NativeNode]:
        params: list[NativeNode] = []
        seen_default = False
        while not self.at(closer):
            ptok = self.expect_type("NAME")
            if ptok.value in KEYWORDS:
                raise self.error("expected a parameter name", ptok)
            default = None
            if self.accept("="):
                default = self.expression()
                seen_default = True
            elif seen_default:
                raise self.error("non-default parameter follows default parameter", ptok)
            params.append(NativeNode("Param", self.loc_from(ptok), {"name": ptok.value, "default": default}))
            if not self.accept(","):
                break
        return params

    def classdef(self) -> NativeNode:
        start = self.expect("class")
        name_tok = self.expect_type("NAME")
        bases = []
        if self.accept("("):
            while not self.at(")"):
                bases.append(self.expression())
                if not self.accept(","):
                    break
            self.expect(")")
        body = self.block()
        return self.node("ClassDef", start, name=name_tok.value, bases=bases, body=body)

    def if_stmt(self) -> NativeNode:
        start = self.advance()  # if / elif
        test = self.expression()
        body = self.block()
        orelse: list[NativeNode] = []
        if self.at("elif"):
            orelse = [self.if_stmt()]
        elif self.accept("else"):
            orelse = self.block()
        return self.node("If", start, test=test, body=body, orelse=orelse)

    def while_stmt(self) -> NativeNode:
        start = self.expect("while")
        test = self.expression()
        body = self.block()
        return self.node("While", start, test=test, body=body)

    def for_stmt(self) -> NativeNode:
        start = self.expect("for")
        target = self.target_list()
        self.expect("in")
        iterable = self.expression()
        body = self.block()
        return self.node("For", start, target=target, iter=iterable, body=body)

    def target_list(self) -> NativeNode:
        start = self.tok
        names = [self.name()]
        while self.accept(","):
            names.append(self.name())
        if len(names) == 1:
            return names[0]
        return self.node("Tuple", start, elts=names)

    def try_stmt(self) -> NativeNode:
        start = self.expect("try")
        body = self.block()
        self.expect("except")
        exc_type = None
        name = None
        if not self.at(":"):
            exc_type = self.expression()
            if self.accept("as"):
                name = self.name()
        handler = self.block()
        finalbody: list[NativeNode] = []
        if self.accept("finally"):
            finalbody = self.block()
        return self.node("Try", start, body=body, type=exc_type, name=name, handler=handler, finalbody=finalbody)

    def simple_statement(self) -> NativeNode:
        start = self.tok
        if self.accept("return"):
            value = None
            if not self._at_statement_end():
                value = self.expression_list()
            return self.node("Return", start, value=value)
        if self.accept("pass"):
            return self.node("Pass", start)
        if self.accept("break"):
            return self.node("Break", start)
        if self.accept("continue"):
            return self.node("Continue", start)
        if self.accept("raise"):
            return self.node("Raise", start, exc=self.expression())
        if self.accept("import"):
            module = self.dotted_name()
            alias = None
            if self.accept("as"):
                alias = self.expect_type("NAME").value
            return self.node("Import", start, module=module, alias=alias)
        if self.at("yield"):
            value = self.yield_expr()
            return self.node("ExprStmt", start, value=value)
        first = self.expression_list()
        if self.tok.type == "OP" and self.tok.value in AUG_OPS:
            op = self.advance().value
            self._check_target(first)
            value = self.expression()
            return self.node("AugAssign", start, target=first, op=op, value=value)
        if self.at("="):
            targets = [first]
            value = None
            while self.accept("="):
                value = self.yield_expr() if self.at("yield") else self.expression_list()
                targets.append(value)
            value = targets.pop()
            for t in targets:
                self._check_target(t)
            return self.node("Assign", start, targets=targets, value=value)
        return self.node("ExprStmt", start, value=first)

    def _at_statement_end(self) -> bool:
        return self.tok.type in ("NEWLINE", "EOF") or (self.tok.type == "OP" and self.tok.value == ";")

    def _check_target(self, node: NativeNode) -> None:
        if node.kind in ("Name", "Attribute", "Subscript"):
            return
        if node.kind == "Tuple" and all(e.kind == "Name" for e in node.elts):
            return
        raise ParseError("cannot assign to expression", self.file, node.loc.start_line, node.loc.start_col)

    def dotted_name(self) -> str:
        parts = [self.expect_type("NAME").value]
        while self.accept("."):
            parts.append(self.expect_type("NAME").value)
        return ".".join(parts)

    def name(self) -> NativeNode:
        tok = self.expect_type("NAME")
        if tok.value in KEYWORDS:
            raise self.error(f"unexpected keyword {tok.value!r}", tok)
        return NativeNode("Name", self.loc_from(tok), {"id": tok.value})

    # expressions -------------------------------------------------------------

    def yield_expr(self) -> NativeNode:
        start = self.expect("yield")
        value = None
        if not self._at_statement_end() and not self.at(")"):
            value = self.expression_list()
        return self.node("Yield", start, value=value)

    def expression_list(self) -> NativeNode:
        start = self.tok
        first = self.expression()
        if not self.at(","):
            return first
        elts = [first]
        while self.accept(","):
            if self._at_statement_end() or self.at("=") or self.at(")"):
                break
            elts.append(self.expression())
        return self.node("Tuple", start, elts=elts)

    def expression(self) -> NativeNode:
        if self.at("lambda"):
            start = self.advance()
            params = self.params(":")
            self.expect(":")
            body = self.expression()
            return self.node("Lambda", start, params=params, body=body)
        start = self.tok
        node = self.or_expr()
        if self.accept("if"):
            test = self.or_expr()
            self.expect("else")
            orelse = self.expression()
            return self.node("IfExp", start, test=test, body=node, orelse=orelse)
        return node

    def or_expr(self) -> NativeNode:
        start = self.tok
        node = self.and_expr()
        while self.accept("or"):
            node = self.node("BoolOp", start, op="or", left=node, right=self.and_expr())
        return node

    def and_expr(self) -> NativeNode:
        start = self.tok
        node = self.not_expr()
        while self.accept("and"):
            node = self.node("BoolOp", start, op="and", left=node, right=self.not_expr())
        return node

    def not_expr(self) -> NativeNode:
        if self.at("not"):
            start = self.advance()
            return self.node("UnaryOp", start, op="not", operand=self.not_expr())
        return self.comparison()

    def comparison(self) -> NativeNode:
        start = self.tok
        node = self.arith()
        while True:
            if self.tok.type == "OP" and self.tok.value in COMPARE_OPS:
                op = self.advance().value
            elif self.at("in"):
                self.advance()
                op = "in"
            elif self.at("not") and self.peek().type == "NAME" and self.peek().value == "in":
                self.advance()
                self.advance()
                op = "not in"
            elif self.at("is"):
                self.advance()
                op = "is not" if self.accept("not") else "is"
            else:
                return node
            node = self.node("Compare", start, op=op, left=node, right=self.arith())

    def arith(self) -> NativeNode:
        start = self.tok
        node = self.term()
        while self.tok.type == "OP" and self.tok.value in ("+", "-"):
            op = self.advance().value
            node = self.node("BinOp", start, op=op, left=node, right=self.term())
        return node

    def term(self) -> NativeNode:
        start = self.tok
        node = self.factor()
        while self.tok.type == "OP" and self.tok.value in ("*", "/", "//", "%"):
            op = self.advance().value
            node = self.node("BinOp", start, op=op, left=node, right=self.factor())
        return node

    def factor(self) -> NativeNode:
        if self.tok.type == "OP" and self.tok.value in ("-", "+"):
            start = self.advance()
            return self.node("UnaryOp", start, op=start.value, operand=self.factor())
        return self.postfix()

    def postfix(self) -> NativeNode:
        start = self.tok
        node = self.atom()
        while True:
            if self.accept("("):
                args = []
                while not self.at(")"):
                    args.append(self.expression())
                    if not self.accept(","):
                        break
                self.expect(")")
                node = self.node("Call", start, func=node, args=args)
            elif self.accept("."):
                attr = self.expect_type("NAME")
                node = self.node("Attribute", start, value=node, attr=attr.value)
            elif self.accept("["):
                index = self.expression()
                self.expect("]")
                node = self.node("Subscript", start, value=node, index=index)
            else:
                return node

    def atom(self) -> NativeNode:
        tok = self.tok
        if tok.type == "NUMBER":
            self.advance()
            return self.node("Num", tok, n=tok.value)
        if tok.type == "STRING":
            parts = [self.advance().value]
            while self.tok.type == "STRING":
                parts.append(self.advance().value)
            return self.node("Str", tok, s="".join(parts))
        if tok.type == "FSTRING":
            self.advance()
            return self._fstring(tok)
        if tok.type == "NAME":
            if tok.value in ("True", "False"):
                self.advance()
                return self.node("Bool", tok, value=tok.value == "True")
            if tok.value == "None":
                self.advance()
                return self.node("NoneLit", tok)
            if tok.value in KEYWORDS:
                raise self.error(f"unexpected keyword {tok.value!r}")
            self.advance()
            return self.node("Name", tok, id=tok.value)
        if self.accept("("):
            if self.accept(")"):
                return self.node("Tuple", tok, elts=[])
            if self.at("yield"):
                inner = self.yield_expr()
                self.expect(")")
                return inner
            first = self.expression()
            if self.at(","):
                elts = [first]
                while self.accept(","):
                    if self.at(")"):
                        break
                    elts.append(self.expression())
                self.expect(")")
                return self.node("Tuple", tok, elts=elts)
            self.expect(")")
            return first
        if self.accept("["):
            if self.accept("]"):
                return self.node("List", tok, elts=[])
            first = self.expression()
            if self.accept("for"):
                target = self.target_list()
                self.expect("in")
                iterable = self.or_expr()
                if self.at("for") or self.at("if"):
                    raise self.error("only one 'for' clause without filters is supported in comprehensions")
                self.expect("]")
                return self.node("ListComp", tok, elt=first, target=target, iter=iterable)
            elts = [first]
            while self.accept(","):
                if self.at("]"):
                    break
                elts.append(self.expression())
            self.expect("]")
            return self.node("List", tok, elts=elts)
        if self.accept("{"):
            keys, values = [], []
            while not self.at("}"):
                keys.append(self.expression())
                self.expect(":")
                values.append(self.expression())
                if not self.accept(","):
                    break
            self.expect("}")
            return self.node("Dict", tok, keys=keys, values=values)
        self._expected.update({"NAME", "NUMBER", "STRING"})
        raise self.error(f"unexpected {tok.describe()}")

    def _fstring(self, tok: Token) -> NativeNode:
        values: list[NativeNode] = []
        for part in tok.value:
            if part[0] == "text":
                values.append(NativeNode("Str", self.loc_from(tok), {"s": part[1]}))
            else:
                _, src, line, col = part
                sub = Lexer(src, self.file, line, col, expression_mode=True).tokenize()
                p = Parser(sub, self.file)
                expr = p.expression()
                if p.tok.type != "EOF":
                    raise p.error(f"unexpected {p.tok.describe()} in f-string expression")
                values.append(NativeNode("FormattedValue", expr.loc, {"value": expr}))
        return NativeNode("JoinedStr", self.loc_from(tok), {"values": values})


def _empty_loc(file: str):
    from ..uast.nodes import SourceLocation

    return SourceLocation(file, 1, 1, 1, 1)


def parse(source: str, file: str = "<minipy>", module: str = "__main__") -> NativeNode:
    tokens = tokenize(source, file)
    return Parser(tokens, file).parse_module(module)
