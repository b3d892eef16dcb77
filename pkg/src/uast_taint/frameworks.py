"""Toy web-framework models: entry-point discovery and source seeding.

``miniflask`` is a Flask-like API for MiniPy (``import flaskish``), and
``miniexpress`` an Express-like one for MiniJS (``require("expressish")``).
Both are plain call models: the app constructor yields an app object whose
routing methods record the handler function they are given.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .engine.events import CallSite, Plugin
from .engine.state import ObjData
from .engine.values import UNDEFINED, Obj, Prim, Sym, Taint, TraceStep, restrict_path
from .taint import Ruleset, match_pattern
from .uast.nodes import UastNode, walk

FRAMEWORKS = ("miniflask", "miniexpress")
FRAMEWORK_MODULES = {"flaskish": "miniflask", "expressish": "miniexpress"}
DYNAMIC_ROUTE = "<dynamic>"

FLASK_REQUEST_FIELDS = ("args", "form", "json")
EXPRESS_REQUEST_FIELDS = ("query", "body", "params")
PARAM_LABEL = "http-param"
REQUEST_LABEL = "http-request"


@dataclass
class EntryPoint:
    function: UastNode
    framework: str  # miniflask | miniexpress | param-rule id
    route: str
    seeded_params: list = field(default_factory=list)  # (param index or request field path, source id)
    index: int = 0  # order of discovery within its file

    @property
    def label(self) -> str:
        name = self.function.get("name") or "<anonymous>"
        return f"{self.framework}:{self.route}:{name}@{self.function.loc.start_line}"


def detect_framework(unit: UastNode) -> Optional[str]:
    for node, _, _ in walk(unit):
        if node.kind == "ImportStatement" and node.moduleName in FRAMEWORK_MODULES:
            return FRAMEWORK_MODULES[node.moduleName]
    return None


def _builtin(ctx, model: str, name: str, lang: str) -> Obj:
    data = ObjData("builtin", name, lang)
    data.model = model
    return Obj(ctx.store.alloc(data))


def _route_of(value) -> str:
    if isinstance(value, Prim) and value.type == "string":
        return value.value
    return DYNAMIC_ROUTE


class FrameworkModel(Plugin):
    """Call model for one framework; records each handler it sees registered.

    ``captured`` lists ``(function Obj, route, function node)`` in the order
    the top-level code registers them.
    """

    name = "framework"

    def __init__(self, framework: str):
        if framework not in FRAMEWORKS:
            raise ValueError(f"unknown framework {framework!r}")
        self.framework = framework
        self.captured: list[tuple[Obj, str, UastNode]] = []
        self.request: Optional[Obj] = None

    # -- module objects ------------------------------------------------------

    def on_import(self, module: str, ctx):
        if FRAMEWORK_MODULES.get(module) != self.framework:
            return None
        if self.framework == "miniflask":
            data = ObjData("module", module, "minipy")
            data.fields["Flask"] = _builtin(ctx, "flask-app", "flaskish.Flask", "minipy")
            data.fields["request"] = self.flask_request(ctx)
            return Obj(ctx.store.alloc(data))
        return _builtin(ctx, "express-app", "expressish", "minijs")

    def flask_request(self, ctx) -> Obj:
        if self.request is None or self.request.addr not in ctx.store.heap:
            data = ObjData("object", "request", "minipy")
            data.sym_base = Sym("request", "request", ("framework", "request"))
            for name in FLASK_REQUEST_FIELDS:
                data.source_fields[name] = REQUEST_LABEL
            self.request = Obj(ctx.store.alloc(data))
        return self.request

    # -- calls ---------------------------------------------------------------

    def _model(self, value, ctx) -> Optional[ObjData]:
        value = restrict_path(value, ctx.pi)
        if isinstance(value, Obj):
            data = ctx.store.obj(value.addr)
            if data.model and data.model.startswith(("flask-", "express-", "route-")):
                return data
        return None

    def intercept_call(self, site: CallSite, ctx):
        callee = self._model(site.callee, ctx)
        lang = site.node.lang
        if callee is not None and callee.model in ("flask-app", "express-app") and callee.kind == "builtin":
            app = ObjData("object", "app", lang)
            app.model = callee.model + "-instance"
            return Obj(ctx.store.alloc(app))
        if callee is not None and callee.model == "route-decorator":
            route = callee.fields.get("%route")
            fn = restrict_path(site.args[0], ctx.pi) if site.args else None
            if isinstance(fn, Obj) and ctx.store.obj(fn.addr).kind == "function":
                self.captured.append((fn, _route_of(route), ctx.store.obj(fn.addr).func))
            return site.args[0] if site.args else UNDEFINED
        receiver = self._model(site.receiver, ctx) if site.receiver is not None else None
        if receiver is None:
            return None
        method = site.node.callee.property if site.node.callee.kind == "MemberAccess" else None
        if receiver.model == "flask-app-instance" and method == "route":
            deco = ObjData("builtin", "app.route()", lang)
            deco.model = "route-decorator"
            deco.fields["%route"] = site.args[0] if site.args else UNDEFINED
            return Obj(ctx.store.alloc(deco))
        if receiver.model == "express-app-instance" and method in ("get", "post", "put", "delete", "use"):
            if len(site.args) >= 2:
                fn = restrict_path(site.args[-1], ctx.pi)
                if isinstance(fn, Obj) and ctx.store.obj(fn.addr).kind == "function":
                    self.captured.append((fn, _route_of(site.args[0]), ctx.store.obj(fn.addr).func))
            return UNDEFINED
        if receiver.model == "express-app-instance" and method == "listen":
            return UNDEFINED
        return None

    # -- seeding -------------------------------------------------------------

    def seed_args(self, fnode: UastNode, ctx) -> tuple[list, list]:
        """Arguments for one handler invocation, plus the seeded-source record."""
        params = fnode.params
        if self.framework == "miniflask":
            self.flask_request(ctx)
            args = [param_source(p, PARAM_LABEL) for p in params]
            seeded = [(i, PARAM_LABEL) for i in range(len(params))]
            seeded += [(f"request.{f}", REQUEST_LABEL) for f in FLASK_REQUEST_FIELDS]
            return args, seeded
        args: list = []
        seeded: list = []
        for i, p in enumerate(params):
            if i == 0:
                data = ObjData("object", p.id.name, "minijs")
                data.sym_base = Sym("param", p.id.name, ("param", _loc(p)))
                for f in EXPRESS_REQUEST_FIELDS:
                    data.source_fields[f] = REQUEST_LABEL
                    seeded.append((f"{p.id.name}.{f}", REQUEST_LABEL))
                args.append(Obj(ctx.store.alloc(data)))
            else:
                args.append(Sym("param", p.id.name, ("param", _loc(p))))
        return args, seeded


def _loc(node: UastNode) -> tuple:
    loc = node.loc
    return (loc.file, loc.start_line, loc.start_col)


def param_source(param: UastNode, label: str) -> Sym:
    name = param.id.name
    step = TraceStep("source", param.loc, f"parameter {name} [{label}]")
    return Sym("param", name, ("param", _loc(param)), Taint.source(label, step))


def param_rule_entrypoints(unit: UastNode, ruleset: Ruleset) -> list[EntryPoint]:
    """Functions named by ``"kind": "param"`` sources; every parameter is a source."""
    out = []
    rules = ruleset.param_sources()
    if not rules:
        return out
    for node, _, _ in walk(unit):
        if node.kind != "FunctionDefinition" or not node.name:
            continue
        for rule in rules:
            if match_pattern(rule.pattern, node.name):
                seeded = [(i, rule.id) for i in range(len(node.params))]
                out.append(EntryPoint(node, rule.id, node.name, seeded))
                break
    return out


def discover_entrypoints(unit: UastNode, framework: Optional[str], ruleset: Optional[Ruleset] = None, config=None) -> list[EntryPoint]:
    """Entry points of one compilation unit, found by running its top level once."""
    from .engine.interpreter import Interpreter, Task
    from .engine.config import AnalysisConfig

    entries: list[EntryPoint] = []
    if framework is not None:
        model = FrameworkModel(framework)
        task = Task(config or AnalysisConfig(), [model])
        Interpreter(task).run_module(unit)
        entries.extend(entries_from_capture(model, framework))
    if ruleset is not None:
        entries.extend(param_rule_entrypoints(unit, ruleset))
    for i, e in enumerate(entries):
        e.index = i
    return entries


def entries_from_capture(model: FrameworkModel, framework: str) -> list[EntryPoint]:
    return [EntryPoint(fnode, framework, route) for _, route, fnode in model.captured]


__all__ = [
    "DYNAMIC_ROUTE",
    "EntryPoint",
    "FRAMEWORKS",
    "FrameworkModel",
    "detect_framework",
    "discover_entrypoints",
    "param_rule_entrypoints",
    "param_source",
]
