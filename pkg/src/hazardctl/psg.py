"""Processor structure graph: data model, textual format, validation.

The graph is a set of vertices (storages or boolean circuits) connected by
role-tagged edges.  Registers have unit write delay; memory read ports have
zero read delay.  A validated Psg is immutable by convention and safe to
share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import sexpr
from .sexpr import Keyword

PC = "program-counter"
ARCH_REG = "arch-register"
PIPE_REG = "pipe-register"
MEM_READ = "mem-read-port"
MEM_WRITE = "mem-write-port"
LOGIC = "logic"
MUX = "mux"
CONST = "const"

KINDS = {PC, ARCH_REG, PIPE_REG, MEM_READ, MEM_WRITE, LOGIC, MUX, CONST}
REG_KINDS = {PC, ARCH_REG, PIPE_REG}
STORAGE_KINDS = REG_KINDS | {MEM_READ, MEM_WRITE}

ROLES = {"data", "enable", "stall", "clear", "select", "address"}

# Expected edge role per destination port name ("in*" handled separately).
PORT_ROLE = {
    "d": "data",
    "a": "data",
    "b": "data",
    "sel": "select",
    "addr": "address",
    "en": "enable",
    "stall": "stall",
    "clear": "clear",
}

UNARY_OPS = {"not", "inc"}
BINARY_OPS = {"and", "or", "xor", "eq", "lt", "add", "sub", "concat"}


class PsgError(ValueError):
    pass


def parse_op(op: str):
    """Split an op token into (base, params): slice_3_0 -> ("slice", (3, 0))."""
    if op in UNARY_OPS or op in BINARY_OPS:
        return op, ()
    parts = op.split("_")
    if parts[0] == "slice" and len(parts) == 3:
        try:
            return "slice", (int(parts[1]), int(parts[2]))
        except ValueError:
            pass
    if parts[0] == "zext" and len(parts) == 2:
        try:
            return "zext", (int(parts[1]),)
        except ValueError:
            pass
    raise PsgError(f"unknown logic op {op!r}")


@dataclass(frozen=True)
class Vertex:
    id: str
    kind: str
    width: int
    op: str | None = None
    value: int | None = None
    memory: str | None = None

    @property
    def is_storage(self) -> bool:
        return self.kind in STORAGE_KINDS

    @property
    def is_register(self) -> bool:
        return self.kind in REG_KINDS


@dataclass(frozen=True)
class Edge:
    src: tuple[str, str]  # (vertex id, out port)
    dst: tuple[str, str]  # (vertex id, in port)
    role: str


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    elements: tuple = ()

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class Psg:
    """A processor structure graph.  Treat as immutable once validated."""

    def __init__(self, vertices: dict[str, Vertex], edges: list[Edge], arch: frozenset[str]):
        self.vertices = dict(vertices)
        self.edges = list(edges)
        self.arch = frozenset(arch)
        self._index()

    def _index(self) -> None:
        self.in_edges: dict[str, dict[str, Edge]] = {v: {} for v in self.vertices}
        self.out_edges: dict[str, list[Edge]] = {v: [] for v in self.vertices}
        self.memories: dict[str, list[str]] = {}
        for e in self.edges:
            if e.dst[0] in self.in_edges and e.dst[1] not in self.in_edges[e.dst[0]]:
                self.in_edges[e.dst[0]][e.dst[1]] = e
            if e.src[0] in self.out_edges:
                self.out_edges[e.src[0]].append(e)
        for v in self.vertices.values():
            if v.memory is not None:
                self.memories.setdefault(v.memory, []).append(v.id)

    @property
    def pc(self) -> str:
        for v in self.vertices.values():
            if v.kind == PC:
                return v.id
        raise PsgError("no program counter")

    def driver(self, vid: str, port: str) -> Edge | None:
        return self.in_edges.get(vid, {}).get(port)

    def mux_arity(self, vid: str) -> int:
        k = 0
        while self.driver(vid, f"in{k}") is not None:
            k += 1
        return k

    def replaced(self, vertices=None, edges=None, arch=None) -> "Psg":
        return Psg(
            vertices if vertices is not None else self.vertices,
            edges if edges is not None else self.edges,
            arch if arch is not None else self.arch,
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Psg)
            and self.vertices == other.vertices
            and sorted(self.edges, key=repr) == sorted(other.edges, key=repr)
            and self.arch == other.arch
        )

    def __repr__(self) -> str:
        return f"<Psg {len(self.vertices)} vertices, {len(self.edges)} edges>"


def mux_sel_width(k: int) -> int:
    return max(1, math.ceil(math.log2(k)))


def logic_input_ports(v: Vertex) -> list[str]:
    base, _ = parse_op(v.op)
    if base in UNARY_OPS or base in {"slice", "zext"}:
        return ["a"]
    return ["a", "b"]


def input_ports(psg: Psg, v: Vertex) -> list[str]:
    """Declared input ports of a vertex (mux arity from present edges)."""
    if v.kind in REG_KINDS:
        return ["d", "en", "stall", "clear"]
    if v.kind == MEM_READ:
        return ["addr"]
    if v.kind == MEM_WRITE:
        return ["addr", "d", "en"]
    if v.kind == LOGIC:
        return logic_input_ports(v)
    if v.kind == MUX:
        return ["sel"] + [f"in{i}" for i in range(max(2, psg.mux_arity(v.id)))]
    return []


def has_output(v: Vertex) -> bool:
    return v.kind != MEM_WRITE


def out_width(psg: Psg, vid: str) -> int:
    return psg.vertices[vid].width


def _expected_role(port: str) -> str | None:
    if port.startswith("in"):
        return "data"
    return PORT_ROLE.get(port)


def validate(psg: Psg) -> list[Diagnostic]:
    """Check every structural invariant; empty list means well-formed."""
    diags: list[Diagnostic] = []

    def bad(code, message, *elements):
        diags.append(Diagnostic(code, message, tuple(elements)))

    pcs = [v.id for v in psg.vertices.values() if v.kind == PC]
    if len(pcs) != 1:
        bad("pc-count", f"expected exactly one program counter, found {len(pcs)}", *pcs)
    elif pcs[0] not in psg.arch:
        bad("pc-not-arch", f"program counter {pcs[0]} must be architectural", pcs[0])

    for a in sorted(psg.arch):
        if a not in psg.vertices:
            bad("arch-unknown", f"architectural id {a} is not a vertex", a)
        elif not psg.vertices[a].is_storage:
            bad("arch-not-storage", f"architectural vertex {a} is not a storage", a)

    for v in psg.vertices.values():
        if v.kind not in KINDS:
            bad("unknown-kind", f"vertex {v.id} has unknown kind {v.kind}", v.id)
            continue
        if v.width <= 0:
            bad("bad-width", f"vertex {v.id} has non-positive width", v.id)
        if v.kind == LOGIC:
            if v.op is None:
                bad("missing-op", f"logic vertex {v.id} has no op", v.id)
            else:
                try:
                    parse_op(v.op)
                except PsgError as exc:
                    bad("unknown-op", f"vertex {v.id}: {exc}", v.id)
        if v.kind == CONST:
            if v.value is None:
                bad("missing-value", f"const vertex {v.id} has no value", v.id)
            elif not 0 <= v.value < (1 << v.width):
                bad("value-range", f"const {v.id} value {v.value} exceeds width {v.width}", v.id)
        if v.kind in (MEM_READ, MEM_WRITE) and v.memory is None:
            bad("missing-memory", f"memory port {v.id} has no :memory tag", v.id)

    # Edge structural checks; duplicate drivers are detected on the raw list.
    seen_ports: dict[tuple[str, str], Edge] = {}
    for e in psg.edges:
        sv, sp = e.src
        dv, dp = e.dst
        if sv not in psg.vertices:
            bad("unknown-vertex", f"edge source {sv} does not exist", sv)
            continue
        if dv not in psg.vertices:
            bad("unknown-vertex", f"edge target {dv} does not exist", dv)
            continue
        if e.role not in ROLES:
            bad("unknown-role", f"edge {sv}.{sp}->{dv}.{dp} has unknown role {e.role}", sv, dv)
            continue
        if sp != "q" or not has_output(psg.vertices[sv]):
            bad("unknown-port", f"vertex {sv} has no output port {sp}", sv)
            continue
        dst_v = psg.vertices[dv]
        valid_ports = set(input_ports(psg, dst_v))
        if dst_v.kind == MUX and dp.startswith("in") and dp[2:].isdigit():
            valid_ports.add(dp)
        if dp not in valid_ports:
            bad("unknown-port", f"vertex {dv} ({dst_v.kind}) has no input port {dp}", dv)
            continue
        expected = _expected_role(dp)
        if expected is not None and e.role != expected:
            bad("role-mismatch", f"port {dv}.{dp} expects role {expected}, got {e.role}", dv)
        if e.role in ("enable", "stall", "clear"):
            if not dst_v.is_storage:
                bad("control-to-non-storage", f"control edge to non-storage {dv}", dv)
            if psg.vertices[sv].width != 1:
                bad("control-width", f"control edge into {dv}.{dp} must be 1 bit wide", dv)
        key = (dv, dp)
        if key in seen_ports:
            bad(
                "multiple-drivers",
                f"input {dv}.{dp} driven by both {seen_ports[key].src[0]} and {sv}",
                seen_ports[key].src[0],
                sv,
                dv,
            )
        else:
            seen_ports[key] = e

    def drv_width(vid: str, port: str) -> int | None:
        e = psg.driver(vid, port)
        return None if e is None else psg.vertices[e.src[0]].width

    for v in psg.vertices.values():
        if v.kind not in KINDS:
            continue
        if v.is_register:
            dw = drv_width(v.id, "d")
            if dw is None:
                bad("undriven", f"register {v.id} has no data input", v.id)
            elif dw != v.width:
                bad("width-mismatch", f"{v.id}.d expects width {v.width}, got {dw}", v.id)
            if v.kind == PIPE_REG:
                for port in ("stall", "clear"):
                    if psg.driver(v.id, port) is None:
                        bad("missing-control", f"pipeline register {v.id} has no {port} input", v.id)
        if v.kind == MEM_READ and psg.driver(v.id, "addr") is None:
            bad("undriven", f"read port {v.id} has no address input", v.id)
        if v.kind == MEM_WRITE:
            if psg.driver(v.id, "addr") is None:
                bad("undriven", f"write port {v.id} has no address input", v.id)
            dw = drv_width(v.id, "d")
            if dw is None:
                bad("undriven", f"write port {v.id} has no data input", v.id)
            elif dw != v.width:
                bad("width-mismatch", f"{v.id}.d expects width {v.width}, got {dw}", v.id)
        if v.kind == LOGIC and v.op is not None:
            try:
                base, params = parse_op(v.op)
            except PsgError:
                continue
            ports = logic_input_ports(v)
            widths = {}
            for p in ports:
                w = drv_width(v.id, p)
                if w is None:
                    bad("undriven", f"logic {v.id} input {p} is undriven", v.id)
                widths[p] = w
            wa, wb = widths.get("a"), widths.get("b")
            if base in {"not", "and", "or", "xor", "add", "sub", "inc"}:
                for p, w in widths.items():
                    if w is not None and w != v.width:
                        bad("width-mismatch", f"{v.id}.{p} expects width {v.width}, got {w}", v.id)
            elif base in {"eq", "lt"}:
                if v.width != 1:
                    bad("width-mismatch", f"{v.id} ({base}) must have width 1", v.id)
                if wa is not None and wb is not None and wa != wb:
                    bad("width-mismatch", f"{v.id} compares widths {wa} and {wb}", v.id)
            elif base == "slice":
                hi, lo = params
                if not (hi >= lo >= 0):
                    bad("bad-slice", f"{v.id} slice bounds {hi}:{lo} invalid", v.id)
                elif v.width != hi - lo + 1:
                    bad("width-mismatch", f"{v.id} slice width must be {hi - lo + 1}", v.id)
                elif wa is not None and wa <= hi:
                    bad("width-mismatch", f"{v.id} slices bit {hi} of a {wa}-bit input", v.id)
            elif base == "concat":
                if wa is not None and wb is not None and v.width != wa + wb:
                    bad("width-mismatch", f"{v.id} concat width must be {wa + wb}", v.id)
            elif base == "zext":
                (n,) = params
                if n != v.width:
                    bad("width-mismatch", f"{v.id} zext target {n} != width {v.width}", v.id)
                elif wa is not None and wa > n:
                    bad("width-mismatch", f"{v.id} zero-extends a wider input ({wa} > {n})", v.id)
        if v.kind == MUX:
            k = psg.mux_arity(v.id)
            if k < 2:
                bad("mux-arity", f"mux {v.id} needs at least 2 contiguous data inputs", v.id)
            else:
                sw = drv_width(v.id, "sel")
                if sw is None:
                    bad("undriven", f"mux {v.id} has no select input", v.id)
                elif sw != mux_sel_width(k):
                    bad("width-mismatch", f"mux {v.id} select must be {mux_sel_width(k)} bits", v.id)
                for i in range(k):
                    w = drv_width(v.id, f"in{i}")
                    if w is not None and w != v.width:
                        bad("width-mismatch", f"{v.id}.in{i} expects width {v.width}, got {w}", v.id)

    # Ports of one memory must agree on data and address widths.
    for mem, ports in sorted(psg.memories.items()):
        datas = {psg.vertices[p].width for p in ports}
        if len(datas) > 1:
            bad("memory-width", f"memory {mem} ports disagree on data width", *ports)
        addrs = set()
        for p in ports:
            e = psg.driver(p, "addr")
            if e is not None:
                addrs.add(psg.vertices[e.src[0]].width)
        if len(addrs) > 1:
            bad("memory-width", f"memory {mem} ports disagree on address width", *ports)

    return diags


def _parse_vertex(form: list) -> Vertex:
    if len(form) < 2 or not isinstance(form[1], str):
        raise PsgError("vertex form needs an identifier")
    vid = form[1]
    kv: dict[str, object] = {}
    i = 2
    while i < len(form):
        k = form[i]
        if not isinstance(k, Keyword) or i + 1 >= len(form):
            raise PsgError(f"vertex {vid}: malformed attribute list")
        kv[str(k)] = form[i + 1]
        i += 2
    if "kind" not in kv:
        raise PsgError(f"vertex {vid}: missing :kind")
    kind = str(kv.pop("kind"))
    if kind not in KINDS:
        raise PsgError(f"vertex {vid}: unknown kind {kind!r}")
    width = kv.pop("width", 1)
    op = kv.pop("op", None)
    value = kv.pop("value", None)
    memory = kv.pop("memory", None)
    if kv:
        raise PsgError(f"vertex {vid}: unknown attributes {sorted(kv)}")
    if kind == LOGIC:
        if op is None:
            raise PsgError(f"vertex {vid}: logic vertex needs :op")
        parse_op(str(op))
    if kind == CONST and value is None:
        raise PsgError(f"vertex {vid}: const vertex needs :value")
    return Vertex(
        id=vid,
        kind=kind,
        width=int(width),
        op=None if op is None else str(op),
        value=None if value is None else int(value),
        memory=None if memory is None else str(memory),
    )


def _parse_edge(form: list) -> Edge:
    # (edge A . P -> B . P :role ROLE)
    ok = (
        len(form) == 10
        and form[2] == "."
        and form[4] == "->"
        and form[6] == "."
        and isinstance(form[8], Keyword)
        and str(form[8]) == "role"
    )
    if not ok:
        raise PsgError(f"malformed edge form: {sexpr.dumps(form)}")
    role = str(form[9])
    if role not in ROLES:
        raise PsgError(f"unknown edge role {role!r}")
    return Edge(src=(str(form[1]), str(form[3])), dst=(str(form[5]), str(form[7])), role=role)


def parse_psg(text: str) -> Psg:
    """Parse PSG source text; raises PsgError unless the result validates."""
    try:
        forms = sexpr.parse_many(text)
    except sexpr.SexprError as exc:
        raise PsgError(f"syntax error at {exc}") from exc
    if len(forms) != 1 or not forms[0] or forms[0][0] != "psg":
        raise PsgError("expected a single (psg ...) document")
    vertices: dict[str, Vertex] = {}
    edges: list[Edge] = []
    arch: set[str] = set()
    for form in forms[0][1:]:
        if not isinstance(form, list) or not form:
            raise PsgError(f"unexpected form: {sexpr.dumps(form)}")
        head = form[0]
        if head == "vertex":
            v = _parse_vertex(form)
            if v.id in vertices:
                raise PsgError(f"duplicate id {v.id}")
            vertices[v.id] = v
        elif head == "edge":
            edges.append(_parse_edge(form))
        elif head == "arch":
            for vid in form[1:]:
                arch.add(str(vid))
        else:
            raise PsgError(f"unknown form ({head} ...)")
    psg = Psg(vertices, edges, frozenset(arch))
    if not any(v.kind == PC for v in vertices.values()):
        raise PsgError("no program counter")
    diags = validate(psg)
    if diags:
        raise PsgError("; ".join(str(d) for d in diags[:5]))
    return psg


def serialize(psg: Psg) -> str:
    """Canonical text form; parse_psg(serialize(p)) == p for valid graphs."""
    lines = ["(psg"]
    for v in psg.vertices.values():
        parts = [f"  (vertex {v.id} :kind {v.kind} :width {v.width}"]
        if v.op is not None:
            parts.append(f":op {v.op}")
        if v.value is not None:
            parts.append(f":value {v.value}")
        if v.memory is not None:
            parts.append(f":memory {v.memory}")
        lines.append(" ".join(parts) + ")")
    for e in psg.edges:
        lines.append(
            f"  (edge {e.src[0]} . {e.src[1]} -> {e.dst[0]} . {e.dst[1]} :role {e.role})"
        )
    if psg.arch:
        lines.append("  (arch " + " ".join(sorted(psg.arch)) + ")")
    lines.append(")")
    return "\n".join(lines) + "\n"
