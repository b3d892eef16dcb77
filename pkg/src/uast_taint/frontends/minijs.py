"""MiniJS: a JavaScript subset, lexer and parser.  Semicolons are optional."""

from __future__ import annotations

from .base import STRING_ESCAPES, NativeNode, ParseError, ParserBase, Token, check_identifier

KEYWORDS = frozenset(
    """function class extends new var let const if else while for of return try catch finally
    throw break continue async await true false null undefined this typeof instanceof in""".split()
)

OPERATORS = sorted(
    """=== !== => == != <= >= && || += -= *= ++ -- ( ) [ ] { } , ; : . = + - * / % < > ! ?""".split(),
    key=len,
    reverse=True,
)

BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("===", "!==", "==", "!="),
    ("<", ">", "<=", ">=", "instanceof", "in"),
    ("+", "-"),
    ("*", "/", "%"),
]


class Lexer:
    def __init__(self, text: str, file: str, line: int = 1, col: int = 1):
        self.text = text
        self.file = file
        self.i = 0
        self.line = line
        self.col = col
        self.tokens: list[Token] = []

    def error(self, msg: str, line=None, col=None) -> ParseError:
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
        while self.i < len(self.text):
            c = self._ch()
            if c in " \t\r\n":
                self._bump()
                continue
            if c == "/" and self._ch(1) == "/":
                while self.i < len(self.text) and self._ch() != "\n":
                    self._bump()
                continue
            if c == "/" and self._ch(1) == "*":
                end = self.text.find("*/", self.i + 2)
                if end < 0:
                    raise self.error("unterminated comment")
                self._bump(end + 2 - self.i)
                continue
            line, col = self.line, self.col
            if c.isalpha() or c in "_$":
                j = self.i
                while j < len(self.text) and (self.text[j].isalnum() or self.text[j] in "_$"):
                    j += 1
                word = self._bump(j - self.i)
                if word not in KEYWORDS:
                    check_identifier(word, self.file, line, col)
                self._emit("NAME", word, line, col)
                continue
            if c.isdigit():
                j = self.i
                while j < len(self.text) and self.text[j].isdigit():
                    j += 1
                is_float = j + 1 < len(self.text) and self.text[j] == "." and self.text[j + 1].isdigit()
                if is_float:
                    j += 1
                    while j < len(self.text) and self.text[j].isdigit():
                        j += 1
                raw = self._bump(j - self.i)
                self._emit("NUMBER", float(raw) if is_float else int(raw), line, col)
                continue
            if c in "'\"":
                self._emit("STRING", self._string(c), line, col)
                continue
            if c == "`":
                self._template(line, col)
                continue
            for op in OPERATORS:
                if self.text.startswith(op, self.i):
                    self._bump(len(op))
                    self._emit("OP", op, line, col)
                    break
            else:
                raise self.error(f"unexpected character {c!r}")
        self.tokens.append(Token("EOF", None, self.line, self.col, self.line, self.col))
        return self.tokens

    def _string(self, quote: str) -> str:
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
                out.append(STRING_ESCAPES.get(e, e))
                continue
            out.append(self._bump())

    def _template(self, line: int, col: int) -> None:
        self._bump()
        parts: list[tuple] = []
        text: list[str] = []
        while True:
            c = self._ch()
            if c == "":
                raise self.error("unterminated template literal", line, col)
            if c == "`":
                self._bump()
                break
            if c == "\\":
                self._bump()
                e = self._bump()
                text.append(STRING_ESCAPES.get(e, e))
                continue
            if c == "$" and self._ch(1) == "{":
                if text:
                    parts.append(("text", "".join(text)))
                    text = []
                self._bump(2)
                eline, ecol = self.line, self.col
                depth = 0
                src = []
                quote = None
                while True:
                    d = self._ch()
                    if d == "":
                        raise self.error("unterminated template expression", eline, ecol)
                    if quote:
                        if d == "\\":
                            src.append(self._bump())
                        elif d == quote:
                            quote = None
                    elif d in "'\"":
                        quote = d
                    elif d == "{":
                        depth += 1
                    elif d == "}":
                        if depth == 0:
                            break
                        depth -= 1
                    src.append(self._bump())
                self._bump()
                if not "".join(src).strip():
                    raise self.error("empty template expression", eline, ecol)
                parts.append(("expr", "".join(src), eline, ecol))
                continue
            text.append(self._bump())
        if text:
            parts.append(("text", "".join(text)))
        self._emit("TEMPLATE", tuple(parts), line, col)


def tokenize(text: str, file: str = "<minijs>") -> list[Token]:
    return Lexer(text, file).tokenize()


class Parser(ParserBase):
    def parse_program(self, name: str) -> NativeNode:
        start = self.tok
        body = []
        while not self.at_type("EOF"):
            body.append(self.statement())
        return NativeNode("Program", self.loc_from(start), {"name": name, "body": body})

    def semi(self) -> None:
        self.accept(";")

    # statements -------------------------------------------------------------

    def statement(self) -> NativeNode:
        tok = self.tok
        if self.at("{"):
            return self.block_stmt()
        if self.at(";"):
            self.advance()
            return self.node("Empty", tok)
        if tok.type == "NAME":
            v = tok.value
            if v == "function" or (v == "async" and self.peek().value == "function"):
                return self.function(declaration=True)
            if v == "class":
                return self.class_decl()
            if v in ("var", "let", "const"):
                node = self.var_decl()
                self.semi()
                return node
            if v == "if":
                return self.if_stmt()
            if v == "while":
                start = self.advance()
                self.expect("(")
                test = self.expression()
                self.expect(")")
                body = self.statement()
                return self.node("While", start, test=test, body=body)
            if v == "for":
                return self.for_of()
            if v == "return":
                start = self.advance()
                value = None
                if not self.at(";") and not self.at("}") and not self.at_type("EOF") and self.tok.line == start.line:
                    value = self.expression()
                self.semi()
                return self.node("Return", start, value=value)
            if v == "try":
                return self.try_stmt()
            if v == "throw":
                start = self.advance()
                value = self.expression()
                self.semi()
                return self.node("Throw", start, value=value)
            if v in ("break", "continue"):
                start = self.advance()
                self.semi()
                return self.node("Break" if v == "break" else "Continue", start)
        start = self.tok
        expr = self.expression()
        self.semi()
        return self.node("ExprStmt", start, value=expr)

    def block_stmt(self) -> NativeNode:
        start = self.expect("{")
        body = []
        while not self.at("}"):
            if self.at_type("EOF"):
                raise self.error("unexpected end of input in block")
            body.append(self.statement())
        self.expect("}")
        return self.node("Block", start, body=body)

    def var_decl(self) -> NativeNode:
        start = self.advance()
        decls = []
        while True:
            name = self.name()
            init = self.assignment() if self.accept("=") else None
            decls.append((name, init))
            if not self.accept(","):
                break
        return self.node("VarDecl", start, decl_kind=start.value, decls=decls)

    def if_stmt(self) -> NativeNode:
        start = self.expect("if")
        self.expect("(")
        test = self.expression()
        self.expect(")")
        body = self.statement()
        orelse = self.statement() if self.accept("else") else None
        return self.node("If", start, test=test, body=body, orelse=orelse)

    def for_of(self) -> NativeNode:
        start = self.expect("for")
        self.expect("(")
        decl_kind = None
        if self.tok.type == "NAME" and self.tok.value in ("var", "let", "const"):
            decl_kind = self.advance().value
        target = self.name()
        self.expect("of")
        iterable = self.expression()
        self.expect(")")
        body = self.statement()
        return self.node("ForOf", start, decl=decl_kind, target=target, iter=iterable, body=body)

    def try_stmt(self) -> NativeNode:
        start = self.expect("try")
        body = self.block_stmt()
        param = None
        self.expect("catch")
        if self.accept("("):
            param = self.name()
            self.expect(")")
        handler = self.block_stmt()
        finalizer = self.block_stmt() if self.accept("finally") else None
        return self.node("Try", start, body=body, param=param, handler=handler, finalizer=finalizer)

    def function(self, declaration: bool = False) -> NativeNode:
        start = self.tok
        is_async = bool(self.accept("async"))
        self.expect("function")
        name = None
        if self.tok.type == "NAME" and self.tok.value not in KEYWORDS:
            name = self.advance().value
        elif declaration:
            raise self.error("function declaration requires a name")
        self.expect("(")
        params = self.params()
        self.expect(")")
        body = self.block_stmt()
        kind = "FunctionDecl" if declaration else "Function"
        return self.node(kind, start, name=name, params=params, body=body, is_async=is_async)

    def params(self) -> list[NativeNode]:
        params = []
        while not self.at(")"):
            ptok = self.tok
            name = self.name()
            default = self.assignment() if self.accept("=") else None
            params.append(NativeNode("Param", self.loc_from(ptok), {"name": name.id, "default": default}))
            if not self.accept(","):
                break
        return params

    def class_decl(self) -> NativeNode:
        start = self.expect("class")
        name = self.name()
        base = None
        if self.accept("extends"):
            base = self.postfix()
        self.expect("{")
        methods = []
        while not self.at("}"):
            if self.accept(";"):
                continue
            mstart = self.tok
            is_async = False
            if self.at("async") and self.peek().type == "NAME":
                self.advance()
                is_async = True
            mname = self.expect_type("NAME").value
            self.expect("(")
            params = self.params()
            self.expect(")")
            body = self.block_stmt()
            methods.append(self.node("Method", mstart, name=mname, params=params, body=body, is_async=is_async))
        self.expect("}")
        return self.node("ClassDecl", start, name=name.id, base=base, methods=methods)

    def name(self) -> NativeNode:
        tok = self.expect_type("NAME")
        if tok.value in KEYWORDS:
            raise self.error(f"unexpected keyword {tok.value!r}", tok)
        return NativeNode("Name", self.loc_from(tok), {"id": tok.value})

    # expressions -------------------------------------------------------------

    def expression(self) -> NativeNode:
        return self.assignment()

    def _arrow_ahead(self) -> bool:
        """At '(' : is the matching ')' followed by '=>'?"""
        depth = 0
        j = self.pos
        while j < len(self.tokens):
            t = self.tokens[j]
            if t.type == "OP" and t.value in "([{":
                depth += 1
            elif t.type == "OP" and t.value in ")]}":
                depth -= 1
                if depth == 0:
                    nxt = self.tokens[j + 1] if j + 1 < len(self.tokens) else t
                    return nxt.type == "OP" and nxt.value == "=>"
            elif t.type == "EOF":
                return False
            j += 1
        return False

    def arrow(self) -> NativeNode:
        start = self.tok
        is_async = bool(self.accept("async"))
        if self.tok.type == "NAME":
            ptok = self.tok
            name = self.name()
            params = [NativeNode("Param", self.loc_from(ptok), {"name": name.id, "default": None})]
        else:
            self.expect("(")
            params = self.params()
            self.expect(")")
        self.expect("=>")
        if self.at("{"):
            body = self.block_stmt()
        else:
            body = self.assignment()
        return self.node("Arrow", start, params=params, body=body, is_async=is_async)

    def _at_arrow(self) -> bool:
        tok = self.tok
        if tok.type == "NAME" and tok.value == "async":
            nxt = self.peek()
            if nxt.type == "NAME" and nxt.value not in KEYWORDS:
                after = self.peek(2)
                return after.type == "OP" and after.value == "=>"
            if nxt.type == "OP" and nxt.value == "(":
                self.pos += 1
                try:
                    return self._arrow_ahead()
                finally:
                    self.pos -= 1
            return False
        if tok.type == "NAME" and tok.value not in KEYWORDS:
            nxt = self.peek()
            return nxt.type == "OP" and nxt.value == "=>"
        if tok.type == "OP" and tok.value == "(":
            return self._arrow_ahead()
        return False

    def assignment(self) -> NativeNode:
        if self._at_arrow():
            return self.arrow()
        start = self.tok
        left = self.conditional()
        if self.tok.type == "OP" and self.tok.value in ("=", "+=", "-=", "*="):
            op_tok = self.advance()
            if left.kind not in ("Name", "Member", "Index"):
                raise ParseError("invalid assignment target", self.file, op_tok.line, op_tok.col)
            value = self.assignment()
            return self.node("Assign", start, op=op_tok.value, target=left, value=value)
        return left

    def conditional(self) -> NativeNode:
        start = self.tok
        test = self.binary(0)
        if self.accept("?"):
            body = self.assignment()
            self.expect(":")
            orelse = self.assignment()
            return self.node("Conditional", start, test=test, body=body, orelse=orelse)
        return test

    def binary(self, level: int) -> NativeNode:
        if level == len(BINARY_LEVELS):
            return self.unary()
        start = self.tok
        node = self.binary(level + 1)
        ops = BINARY_LEVELS[level]
        while self.tok.type in ("OP", "NAME") and self.tok.value in ops:
            op = self.advance().value
            right = self.binary(level + 1)
            kind = "Logical" if op in ("&&", "||") else "Binary"
            node = self.node(kind, start, op=op, left=node, right=right)
        return node

    def unary(self) -> NativeNode:
        tok = self.tok
        if tok.type == "OP" and tok.value in ("!", "-", "+"):
            self.advance()
            return self.node("Unary", tok, op=tok.value, operand=self.unary())
        if tok.type == "OP" and tok.value in ("++", "--"):
            self.advance()
            target = self.unary()
            return self.node("Update", tok, op=tok.value, target=target)
        if tok.type == "NAME" and tok.value == "typeof":
            self.advance()
            return self.node("Unary", tok, op="typeof", operand=self.unary())
        if tok.type == "NAME" and tok.value == "await":
            self.advance()
            return self.node("Await", tok, value=self.unary())
        node = self.postfix()
        if self.tok.type == "OP" and self.tok.value in ("++", "--") and self.tok.line == self.prev.end_line:
            op = self.advance().value
            node = self.node("Update", tok, op=op, target=node)
        return node

    def postfix(self) -> NativeNode:
        start = self.tok
        if self.at("new"):
            self.advance()
            callee = self.member_only()
            args = self.arguments() if self.at("(") else []
            node = self.node("New", start, callee=callee, args=args)
        else:
            node = self.primary()
        return self.trailers(node, start, calls=True)

    def member_only(self) -> NativeNode:
        start = self.tok
        return self.trailers(self.primary(), start, calls=False)

    def trailers(self, node: NativeNode, start: Token, calls: bool) -> NativeNode:
        while True:
            if calls and self.at("("):
                node = self.node("Call", start, func=node, args=self.arguments())
            elif self.accept("."):
                attr = self.expect_type("NAME")
                node = self.node("Member", start, object=node, prop=attr.value)
            elif self.accept("["):
                index = self.expression()
                self.expect("]")
                node = self.node("Index", start, object=node, index=index)
            else:
                return node

    def arguments(self) -> list[NativeNode]:
        self.expect("(")
        args = []
        while not self.at(")"):
            args.append(self.assignment())
            if not self.accept(","):
                break
        self.expect(")")
        return args

    def primary(self) -> NativeNode:
        tok = self.tok
        if tok.type == "NUMBER":
            self.advance()
            return self.node("Num", tok, n=tok.value)
        if tok.type == "STRING":
            self.advance()
            return self.node("Str", tok, s=tok.value)
        if tok.type == "TEMPLATE":
            self.advance()
            return self._template(tok)
        if tok.type == "NAME":
            v = tok.value
            if v in ("true", "false"):
                self.advance()
                return self.node("Bool", tok, value=v == "true")
            if v == "null":
                self.advance()
                return self.node("Null", tok)
            if v == "undefined":
                self.advance()
                return self.node("Undefined", tok)
            if v == "this":
                self.advance()
                return self.node("This", tok)
            if v == "function" or (v == "async" and self.peek().value == "function"):
                return self.function(declaration=False)
            if v in KEYWORDS:
                raise self.error(f"unexpected keyword {v!r}")
            self.advance()
            return self.node("Name", tok, id=v)
        if self.accept("("):
            inner = self.expression()
            self.expect(")")
            return inner
        if self.accept("["):
            elts = []
            while not self.at("]"):
                elts.append(self.assignment())
                if not self.accept(","):
                    break
            self.expect("]")
            return self.node("Array", tok, elts=elts)
        if self.accept("{"):
            return self._object(tok)
        self._expected.update({"NAME", "NUMBER", "STRING"})
        raise self.error(f"unexpected {tok.describe()}")

    def _object(self, start: Token) -> NativeNode:
        keys, values = [], []
        while not self.at("}"):
            ktok = self.tok
            if ktok.type == "STRING":
                self.advance()
                key = ktok.value
            elif ktok.type == "NAME":
                self.advance()
                key = ktok.value
            elif ktok.type == "NUMBER":
                self.advance()
                key = str(ktok.value)
            else:
                raise self.error(f"unexpected {ktok.describe()} in object literal")
            keys.append(NativeNode("Str", self.loc_from(ktok), {"s": key}))
            if self.accept(":"):
                values.append(self.assignment())
            elif self.at("("):
                self.advance()
                params = self.params()
                self.expect(")")
                body = self.block_stmt()
                values.append(self.node("Function", ktok, name=key, params=params, body=body, is_async=False))
            else:
                if ktok.type != "NAME" or key in KEYWORDS:
                    raise self.error("expected ':' after object key")
                check_identifier(key, self.file, ktok.line, ktok.col)
                values.append(NativeNode("Name", self.loc_from(ktok), {"id": key}))
            if not self.accept(","):
                break
        self.expect("}")
        return self.node("Object", start, keys=keys, values=values)

    def _template(self, tok: Token) -> NativeNode:
        values: list[NativeNode] = []
        for part in tok.value:
            if part[0] == "text":
                values.append(NativeNode("Str", self.loc_from(tok), {"s": part[1]}))
            else:
                _, src, line, col = part
                sub = Lexer(src, self.file, line, col).tokenize()
                p = Parser(sub, self.file)
                expr = p.expression()
                if p.tok.type != "EOF":
                    raise p.error(f"unexpected {p.tok.describe()} in template expression")
                values.append(NativeNode("Substitution", expr.loc, {"value": expr}))
        return NativeNode("Template", self.loc_from(tok), {"values": values})


def parse(source: str, file: str = "<minijs>", module: str = "main") -> NativeNode:
    return Parser(tokenize(source, file), file).parse_program(module)
