"""Regenerate bench/corpus from the case table below.

Each case is a small program plus its manifest.  Lines ending in a
``SINK`` marker comment are where a finding is expected; the manifest's
``expected`` list is computed from those markers, never from running the
analyzer.  Channel cases are raw UAST documents (no frontend emits ChanType)
and carry their expected lines explicitly.

    python3 bench/build_corpus.py
"""

from __future__ import annotations

import json
import os
import shutil
import textwrap

from uast_taint.uast import SourceLocation, make, serialize

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "corpus")

RULES = {
    "sources": [
        {"id": "user-input", "kind": "call", "pattern": "source"},
        {"id": "user-input", "kind": "call", "pattern": "input"},
    ],
    "sinks": [
        {"id": "generic-sink", "pattern": "sink", "taintedArgs": []},
        {"id": "command-injection", "pattern": "os.system", "taintedArgs": [0]},
        {"id": "code-injection", "pattern": "eval", "taintedArgs": [0]},
        {"id": "xss", "pattern": "res.send", "taintedArgs": [0]},
    ],
    "sanitizers": [{"id": "sanitize", "pattern": "sanitize"}],
}

RULE_OF = {"sink(": "generic-sink", "os.system(": "command-injection", "eval(": "code-injection", "res.send(": "xss"}

PY, JS = "minipy", "minijs"

# (category, dimension, lang, positive program, negative program, requiresHandlers of the positive, note)
CASES: list[tuple] = []


def case(category, dimension, lang, pos, neg, requires=False, note=""):
    CASES.append((category, dimension, lang, pos, neg, requires, note))


# ---------------------------------------------------------------------------
# context: the same callee reached with tainted and clean arguments

case("completeness", "context", PY, """
def ident(a):
    return a
x = ident(source())
y = ident("clean")
sink(x)  # SINK
""", """
def ident(a):
    return a
x = ident(source())
y = ident("clean")
sink(y)
""", note="identity function called twice")

case("completeness", "context", PY, """
def inner(v):
    return v
def outer(v):
    return inner(v)
a = outer("plain")
b = outer(source())
sink(b)  # SINK
""", """
def inner(v):
    return v
def outer(v):
    return inner(v)
a = outer("plain")
b = outer(source())
sink(a)
""", note="two-level call chain")

case("completeness", "context", PY, """
class Holder:
    pass
def put(o, v):
    o.val = v
h1 = Holder()
h2 = Holder()
put(h1, source())
put(h2, "safe")
sink(h1.val)  # SINK
""", """
class Holder:
    pass
def put(o, v):
    o.val = v
h1 = Holder()
h2 = Holder()
put(h1, source())
put(h2, "safe")
sink(h2.val)
""", note="callee writes into the object it is given")

case("completeness", "context", PY, """
def make(v):
    def get():
        return v
    return get
g1 = make(source())
g2 = make("const")
sink(g1())  # SINK
""", """
def make(v):
    def get():
        return v
    return get
g1 = make(source())
g2 = make("const")
sink(g2())
""", note="closures capture distinct environments")

case("completeness", "context", JS, """
const wrap = (a) => "<" + a + ">";
var t = wrap(source());
var c = wrap("x");
sink(t); // SINK
""", """
const wrap = (a) => "<" + a + ">";
var t = wrap(source());
var c = wrap("x");
sink(c);
""", note="arrow function called twice")

case("completeness", "context", JS, """
var util = {
  pick: function (a, b) { return b; }
};
var r1 = util.pick(source(), "fine");
var r2 = util.pick("fine", source());
eval(r2); // SINK
""", """
var util = {
  pick: function (a, b) { return b; }
};
var r1 = util.pick(source(), "fine");
var r2 = util.pick("fine", source());
eval(r1);
""", note="argument position matters per call site")

# ---------------------------------------------------------------------------
# field: per-field precision

case("completeness", "field", PY, """
class Box:
    pass
b = Box()
b.f = source()
b.g = "clean"
sink(b.f)  # SINK
""", """
class Box:
    pass
b = Box()
b.f = source()
b.g = "clean"
sink(b.g)
""", note="sibling fields")

case("completeness", "field", JS, """
var o = {a: source(), b: "x"};
sink(o.a); // SINK
""", """
var o = {a: source(), b: "x"};
sink(o.b);
""", note="object literal fields")

case("completeness", "field", PY, """
class Node:
    pass
outer = Node()
outer.inner = Node()
outer.inner.f = source()
outer.other = "k"
sink(outer.inner.f)  # SINK
""", """
class Node:
    pass
outer = Node()
outer.inner = Node()
outer.inner.f = source()
outer.other = "k"
sink(outer.inner.g)
""", note="nested field paths")

case("completeness", "field", PY, """
d = {"k": source(), "j": "fine"}
sink(d["k"])  # SINK
""", """
d = {"k": source(), "j": "fine"}
sink(d["j"])
""", note="constant dictionary keys")

case("completeness", "field", PY, """
class Pair:
    def __init__(self, a, b):
        self.a = a
        self.b = b
p = Pair(source(), "c")
sink(p.a)  # SINK
""", """
class Pair:
    def __init__(self, a, b):
        self.a = a
        self.b = b
p = Pair(source(), "c")
sink(p.b)
""", note="fields set by the constructor")

case("completeness", "field", JS, """
var arr = ["a", "b"];
arr[0] = source();
sink(arr[0]); // SINK
""", """
var arr = ["a", "b"];
arr[0] = source();
sink(arr[1]);
""", note="constant array indices")

# ---------------------------------------------------------------------------
# path: branch correlation through reused conditions

case("completeness", "path", PY, """
x = "a"
if c:
    x = source()
if d:
    sink(x)  # SINK
""", """
x = "a"
if c:
    x = source()
if c:
    pass
else:
    sink(x)
""", note="same condition contradicts, independent one does not")

case("completeness", "path", PY, """
if c:
    x = source()
else:
    x = "a"
if c:
    sink(x)  # SINK
""", """
if c:
    x = source()
else:
    x = "a"
if not c:
    sink(x)
""", note="negated condition")

case("completeness", "path", PY, """
flag = True
x = "a"
if flag:
    x = source()
sink(x)  # SINK
""", """
flag = False
x = "a"
if flag:
    x = source()
sink(x)
""", note="concrete condition decides the branch")

case("completeness", "path", PY, """
x = "a"
if a:
    if b:
        x = source()
if a:
    if b:
        sink(x)  # SINK
""", """
x = "a"
if a:
    if b:
        x = source()
if a:
    if not b:
        sink(x)
""", note="nested conditions")

case("completeness", "path", JS, """
var x = "s";
if (c) { x = source(); }
if (c) { sink(x); } // SINK
""", """
var x = "s";
if (c) { x = source(); }
if (!c) { sink(x); }
""", note="JS negation")

case("completeness", "path", PY, """
def choose(v):
    if c:
        return "k"
    return v
r = choose(source())
if not c:
    sink(r)  # SINK
""", """
def choose(v):
    if c:
        return "k"
    return v
r = choose(source())
if c:
    sink(r)
""", note="early return keyed on a condition shared with the caller")

# ---------------------------------------------------------------------------
# flow: statement order and strong updates

case("completeness", "flow", PY, """
x = "a"
x = source()
sink(x)  # SINK
""", """
x = "a"
sink(x)
x = source()
""", note="use before taint")

case("completeness", "flow", PY, """
x = "c"
x = source()
sink(x)  # SINK
""", """
x = source()
x = "c"
sink(x)
""", note="reassignment clears taint")

case("completeness", "flow", PY, """
class O:
    pass
o = O()
o.f = "c"
o.f = source()
sink(o.f)  # SINK
""", """
class O:
    pass
o = O()
o.f = source()
o.f = "c"
sink(o.f)
""", note="field strong update")

case("completeness", "flow", JS, """
let s = "ok";
s = source();
eval(s); // SINK
""", """
let s = source();
s = "ok";
eval(s);
""", note="let reassignment")

case("completeness", "flow", PY, """
a = source()
b = "c"
t = a
a = b
b = t
sink(b)  # SINK
""", """
a = source()
b = "c"
t = a
a = b
b = t
sink(a)
""", note="swap through a temporary")

case("completeness", "flow", JS, """
var o = {};
o.v = "ok";
var alias = o;
alias.v = source();
sink(o.v); // SINK
""", """
var o = {};
o.v = source();
var alias = o;
alias.v = "ok";
sink(o.v);
""", note="strong update through an alias")

# ---------------------------------------------------------------------------
# soundness: language features

case("soundness", "listcomp", PY, """
xs = [source()]
ys = [v + "!" for v in xs]
sink(ys[0])  # SINK
""", """
xs = [source()]
ys = ["k" for v in xs]
sink(ys[0])
""")

case("soundness", "lambda", PY, """
f = lambda a: a
sink(f(source()))  # SINK
""", """
f = lambda a: "k"
sink(f(source()))
""")

case("soundness", "f-string", PY, """
import os
name = source()
msg = f"hello {name}"
os.system(msg)  # SINK
""", """
import os
name = source()
msg = f"hello {len(name)}"
os.system(msg)
""")

case("soundness", "decorator-route", PY, """
import os
import flaskish
app = flaskish.Flask("demo")

@app.route("/run")
def run(cmd):
    os.system(cmd)  # SINK
""", """
import os
import flaskish
app = flaskish.Flask("demo")

@app.route("/run")
def run(cmd):
    os.system("uptime")
""")

case("soundness", "decorator-route", PY, """
import os
import flaskish
app = flaskish.Flask("demo")

@app.route("/q")
def query():
    q = request.args.get("q")
    os.system("grep " + q)  # SINK
""", """
import os
import flaskish
app = flaskish.Flask("demo")

@app.route("/q")
def query():
    q = request.args.get("q")
    os.system("grep " + sanitize(q))
""")

case("soundness", "express-route", JS, """
const express = require("expressish");
const app = express();
app.get("/hello", (req, res) => {
  res.send("hi " + req.query.name); // SINK
});
""", """
const express = require("expressish");
const app = express();
app.get("/hello", (req, res) => {
  res.send("hi there");
});
""")

case("soundness", "inheritance", PY, """
class Base:
    def keep(self, v):
        self.data = v
class Child(Base):
    pass
c = Child()
c.keep(source())
sink(c.data)  # SINK
""", """
class Base:
    def keep(self, v):
        self.data = v
class Child(Base):
    pass
c = Child()
c.keep(source())
sink(c.other)
""", requires=True)

case("soundness", "inheritance", PY, """
class A:
    def put(self, v):
        self.x = v
class B:
    def put(self, v):
        self.x = "safe"
class C(A, B):
    pass
c = C()
c.put(source())
sink(c.x)  # SINK
""", """
class A:
    def put(self, v):
        self.x = v
class B:
    def put(self, v):
        self.x = "safe"
class C(B, A):
    pass
c = C()
c.put(source())
sink(c.x)
""", requires=True, note="first base wins")

case("soundness", "prototype", JS, """
function Store() {}
Store.prototype.keep = function (v) { this.data = v; };
var s = new Store();
s.keep(source());
sink(s.data); // SINK
""", """
function Store() {}
Store.prototype.keep = function (v) { this.data = v; };
var s = new Store();
s.keep(source());
sink(s.other);
""", requires=True)

case("soundness", "class-extends", JS, """
class Base { keep(v) { this.data = v; } }
class Child extends Base {}
var c = new Child();
c.keep(source());
sink(c.data); // SINK
""", """
class Base { keep(v) { this.data = v; } }
class Child extends Base {}
var c = new Child();
c.keep(source());
sink(c.other);
""", requires=True)

case("soundness", "promise-await", JS, """
async function main() {
  var v = await Promise.resolve(source());
  eval(v); // SINK
}
main();
""", """
async function main() {
  var p = Promise.resolve(source());
  var q = p.then(x => "clean");
  var v = await q;
  eval(v);
}
main();
""")

case("soundness", "yield", PY, """
def gen(v):
    yield v
for item in gen(source()):
    sink(item)  # SINK
""", """
def gen(v):
    yield "k"
for item in gen(source()):
    sink(item)
""")

case("soundness", "try-except", PY, """
x = "a"
try:
    x = source()
    risky()
except Exception as e:
    sink(x)  # SINK
""", """
x = source()
try:
    x = "clean"
except Exception:
    x = "fallback"
sink(x)
""")

case("soundness", "try-except", PY, """
def check(v):
    if bad:
        raise ValueError(v)
    return "ok"
try:
    check(source())
except ValueError as e:
    sink(e)  # SINK
""", """
def check(v):
    if bad:
        raise ValueError("bad input")
    return "ok"
try:
    check(source())
except ValueError as e:
    sink(e)
""", note="exception raised in a callee")

case("soundness", "loop", PY, """
acc = ""
for item in [source(), "x"]:
    acc = acc + item
sink(acc)  # SINK
""", """
last = ""
for item in [source(), "x"]:
    last = item
sink(last)
""", note="loop over a known list keeps iteration order; needs two iterations")

case("soundness", "loop", PY, """
prev = "a"
cur = "b"
i = 0
while i < n:
    prev = cur
    cur = source()
    i = i + 1
sink(prev)  # SINK
""", """
prev = "a"
cur = "b"
i = 0
while i < n:
    prev = cur
    cur = "c"
    i = i + 1
sink(prev)
""", note="taint needs two iterations to reach prev")

case("soundness", "sanitizer", PY, """
import os
os.system(source())  # SINK
""", """
import os
os.system(sanitize(source()))
""")


# ---------------------------------------------------------------------------
# channel cases: raw UAST documents


def _raw_unit(file: str, stmts) -> bytes:
    def loc(line):
        return SourceLocation(file, line, 1, line, 40)

    built = [s(loc(i + 1)) for i, s in enumerate(stmts)]
    root = make("PackageDeclaration", SourceLocation(file, 1, 1, len(stmts), 40), "raw", name="chan", body=built)
    return serialize(root)


def _ident(name):
    return lambda l: make("Identifier", l, "raw", name=name)


def _chan_decl(name):
    return lambda l: make(
        "VariableDeclaration", l, "raw", id=make("Identifier", l, "raw", name=name),
        varType=make("ChanType", l, "raw", elementType=make("PrimitiveType", l, "raw", name="string")),
    )


def _call(name, *args):
    return lambda l: make("CallExpression", l, "raw", callee=make("Identifier", l, "raw", name=name), arguments=[a(l) for a in args])


def _send(ch, value):
    return lambda l: make("ExpressionStatement", l, "raw", expression=make(
        "BinaryExpression", l, "raw", operator="<-", left=_ident(ch)(l), right=value(l)))


def _recv(ch):
    return lambda l: make("UnaryExpression", l, "raw", operator="<-", argument=_ident(ch)(l))


def _assign(name, value):
    return lambda l: make("ExpressionStatement", l, "raw", expression=make(
        "AssignmentExpression", l, "raw", operator="=", left=_ident(name)(l), right=value(l)))


def _stmt(expr):
    return lambda l: make("ExpressionStatement", l, "raw", expression=expr(l))


CHANNEL_CASES = [
    ("pos", [_chan_decl("ch"), _send("ch", _call("source")), _assign("v", _recv("ch")), _stmt(_call("sink", _ident("v")))], [4]),
    ("neg", [_chan_decl("ch"), _assign("v", _recv("ch")), _stmt(_call("sink", _ident("v")))], []),
    ("pos", [_chan_decl("a"), _chan_decl("b"), _send("a", _call("source")), _send("b", _recv("a")), _assign("v", _recv("b")), _stmt(_call("sink", _ident("v")))], [6]),
    ("neg", [_chan_decl("a"), _chan_decl("b"), _send("a", _call("source")), _send("b", _call("clean")), _assign("v", _recv("b")), _stmt(_call("sink", _ident("v")))], []),
]


def expected_lines(text: str) -> list[dict]:
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        if line.rstrip().endswith("SINK"):
            code = line.split("#")[0] if "# SINK" in line else line.split("//")[0]
            rule = next(r for call, r in RULE_OF.items() if call in code)
            out.append({"ruleId": rule, "sinkLine": n})
    return out


def write_case(case_id, category, dimension, polarity, requires, expected, files, note=""):
    folder = os.path.join(OUT, category, case_id)
    os.makedirs(folder)
    for name, content in files.items():
        mode = "wb" if isinstance(content, bytes) else "w"
        with open(os.path.join(folder, name), mode) as fh:
            fh.write(content)
    manifest = {
        "caseId": case_id,
        "category": category,
        "dimension": dimension,
        "polarity": polarity,
        "requiresHandlers": requires,
        "expected": expected,
    }
    if note:
        manifest["description"] = note
    with open(os.path.join(folder, "case.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def build() -> int:
    if os.path.isdir(OUT):
        shutil.rmtree(OUT)
    os.makedirs(OUT)
    with open(os.path.join(OUT, "rules.json"), "w") as fh:
        json.dump(RULES, fh, indent=2)
        fh.write("\n")
    counters: dict[str, int] = {}
    count = 0
    for category, dimension, lang, pos, neg, requires, note in CASES:
        counters[dimension] = counters.get(dimension, 0) + 1
        stem = f"{dimension}-{counters[dimension]:02d}"
        fname = "prog.mpy" if lang == PY else "prog.mjs.txt"
        for polarity, src in (("positive", pos), ("negative", neg)):
            text = textwrap.dedent(src).lstrip("\n")
            expected = expected_lines(text)
            assert bool(expected) == (polarity == "positive"), (stem, polarity)
            write_case(f"{stem}-{polarity[:3]}", category, dimension, polarity, requires and polarity == "positive",
                       expected, {fname: text}, note)
            count += 1
    for i, (pol, stmts, lines) in enumerate(CHANNEL_CASES, 1):
        polarity = "positive" if pol == "pos" else "negative"
        stem = f"channel-{(i + 1) // 2:02d}-{pol}"
        doc = _raw_unit("prog.uast.json", stmts)
        write_case(stem, "soundness", "channel", polarity, False,
                   [{"ruleId": "generic-sink", "sinkLine": n} for n in lines], {"prog.uast.json": doc})
        count += 1
    return count


if __name__ == "__main__":
    print(f"wrote {build()} cases to {OUT}")
