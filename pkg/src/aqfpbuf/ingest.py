"""Reading and writing ``.mig`` text, mapped-network dumps, and DOT rendering.

The ``.mig`` format is line oriented; ``#`` starts a comment::

    .inputs a b c
    .outputs f
    n1 = MAJ(a, !b, 0)
    f = !n1

Operands are ``[!]name`` or the constants ``0`` and ``1``.  An output whose
name is also a node name and has no binding line is bound to that node.
Mapped dumps add ``name = BUF(operand)`` lines and a trailing ``.depths``
section of ``name level`` pairs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .core import CONST0, MappedNetwork, Network, NodeId, NodeKind, Signal

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_OPERAND_RE = re.compile(r"\s*(!?)\s*([A-Za-z_][A-Za-z0-9_]*|[01])\s*")
_ARITY = {"MAJ": 3, "BUF": 1}


class MigParseError(ValueError):
    """A diagnostic with a 1-based source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass
class _Operand:
    name: str
    complemented: bool
    line: int
    col: int


@dataclass
class _Def:
    name: str
    op: str  # MAJ, BUF or "=" for a plain binding
    operands: List[_Operand]
    line: int
    col: int


def _parse_operands(body: str, line: int, col0: int) -> List[_Operand]:
    out = []
    pos = 0
    if not body.strip():
        return out
    for piece in body.split(","):
        m = _OPERAND_RE.fullmatch(piece)
        lead = len(piece) - len(piece.lstrip())
        if not m:
            raise MigParseError(f"bad operand {piece.strip()!r}", line, col0 + pos + lead)
        name_col = col0 + pos + piece.index(m.group(2), lead)
        out.append(_Operand(m.group(2), m.group(1) == "!", line, name_col))
        pos += len(piece) + 1
    return out


def _tokenize(text: str):
    inputs: List[Tuple[str, int, int]] = []
    outputs: List[Tuple[str, int, int]] = []
    defs: List[_Def] = []
    depths: List[Tuple[str, str, int, int]] = []
    section = "body"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        stripped = line.strip()
        if stripped.startswith("."):
            word, _, rest = stripped.partition(" ")
            if word == ".depths":
                if rest.strip():
                    raise MigParseError(".depths takes no arguments", lineno, indent + 1)
                section = "depths"
                continue
            if word not in (".inputs", ".outputs"):
                raise MigParseError(f"unknown directive {word}", lineno, indent + 1)
            if section == "depths":
                raise MigParseError(f"{word} after .depths", lineno, indent + 1)
            names = []
            for m in re.finditer(r"\S+", rest):
                tok = m.group(0)
                col = indent + len(word) + 2 + m.start()
                if not NAME_RE.fullmatch(tok):
                    raise MigParseError(f"bad name {tok!r}", lineno, col)
                names.append((tok, lineno, col))
            if not names:
                raise MigParseError(f"{word} needs at least one name", lineno, indent + 1)
            (inputs if word == ".inputs" else outputs).extend(names)
            continue
        if section == "depths":
            parts = stripped.split()
            if len(parts) != 2 or not NAME_RE.fullmatch(parts[0]):
                raise MigParseError("expected 'name level'", lineno, indent + 1)
            depths.append((parts[0], parts[1], lineno, indent + 1))
            continue
        lhs, eq, rhs = line.partition("=")
        if not eq:
            raise MigParseError("expected '='", lineno, indent + 1)
        name = lhs.strip()
        if not NAME_RE.fullmatch(name):
            raise MigParseError(f"bad name {name!r}", lineno, indent + 1)
        rhs_col = len(lhs) + 2
        m = re.fullmatch(r"\s*([A-Z]+)\s*\((.*)\)\s*", rhs)
        if m:
            op = m.group(1)
            if op not in _ARITY:
                raise MigParseError(f"unknown operator {op}", lineno, rhs_col + rhs.index(op))
            body_col = rhs_col + rhs.index("(") + 1
            operands = _parse_operands(m.group(2), lineno, body_col)
            if len(operands) != _ARITY[op]:
                raise MigParseError(
                    f"{op} takes {_ARITY[op]} operands, got {len(operands)}",
                    lineno, rhs_col + rhs.index(op),
                )
            defs.append(_Def(name, op, operands, lineno, indent + 1))
        else:
            if "(" in rhs or "," in rhs:
                raise MigParseError("malformed right-hand side", lineno, rhs_col)
            defs.append(_Def(name, "=", _parse_operands(rhs, lineno, rhs_col), lineno, indent + 1))
            if len(defs[-1].operands) != 1:
                raise MigParseError("binding needs exactly one operand", lineno, rhs_col)
    return inputs, outputs, defs, depths


def _build(text: str) -> Tuple[Network, Dict[str, NodeId], Dict[str, NodeId], list]:
    inputs, outputs, defs, depths = _tokenize(text)
    net = Network()
    names: Dict[str, NodeId] = {}
    for name, line, col in inputs:
        if name in names:
            raise MigParseError(f"duplicate definition of {name!r}", line, col)
        names[name] = net.add_pi(name)
    out_names = {}
    for name, line, col in outputs:
        if name in out_names:
            raise MigParseError(f"duplicate output {name!r}", line, col)
        out_names[name] = (line, col)

    nodes: Dict[str, _Def] = {}
    bindings: Dict[str, _Def] = {}
    for df in defs:
        if df.op == "=":
            if df.name not in out_names:
                raise MigParseError(f"{df.name!r} is not a declared output", df.line, df.col)
            if df.name in bindings:
                raise MigParseError(f"duplicate binding of output {df.name!r}", df.line, df.col)
            bindings[df.name] = df
        else:
            if df.name in names or df.name in nodes:
                raise MigParseError(f"duplicate definition of {df.name!r}", df.line, df.col)
            nodes[df.name] = df
    for po, df in bindings.items():
        if po in nodes or po in names:
            raise MigParseError(f"output {po!r} is both bound and defined", df.line, df.col)

    state: Dict[str, int] = {}

    def signal(op: _Operand) -> Signal:
        if op.name in ("0", "1"):
            return Signal(CONST0, (op.name == "1") ^ op.complemented)
        if op.name not in names:
            if op.name not in nodes:
                raise MigParseError(f"undefined name {op.name!r}", op.line, op.col)
            visit(nodes[op.name])
        return Signal(names[op.name], op.complemented)

    def visit(df: _Def) -> None:
        # explicit stack: long forward-reference chains must not hit the recursion limit
        stack = [(df, False)]
        while stack:
            cur, resumed = stack.pop()
            if cur.name in names:
                continue
            if not resumed:
                if state.get(cur.name) == 1:
                    raise MigParseError(f"cyclic reference through {cur.name!r}", cur.line, cur.col)
                state[cur.name] = 1
            pending = None
            for op in cur.operands:
                if op.name not in ("0", "1") and op.name not in names:
                    if op.name not in nodes:
                        raise MigParseError(f"undefined name {op.name!r}", op.line, op.col)
                    pending = op
                    break
            if pending is not None:
                if state.get(pending.name) == 1:
                    raise MigParseError(
                        f"cyclic reference through {pending.name!r}", pending.line, pending.col
                    )
                stack.append((cur, True))
                stack.append((nodes[pending.name], False))
                continue
            sigs = [signal(op) for op in cur.operands]
            if cur.op == "MAJ":
                names[cur.name] = net.add_gate(sigs, cur.name)
            else:
                names[cur.name] = net.add_buffer(sigs[0], cur.name)
            state[cur.name] = 2

    for df in defs:
        if df.op != "=":
            visit(df)

    po_ids: Dict[str, NodeId] = {}
    for name, (line, col) in out_names.items():
        if name in bindings:
            op = bindings[name].operands[0]
            if op.name in ("0", "1"):
                raise MigParseError("outputs cannot be driven by constants", op.line, op.col)
            s = signal(op)
        elif name in names:
            s = Signal(names[name])
        else:
            raise MigParseError(f"output {name!r} is never bound", line, col)
        po_ids[name] = net.add_po(s, name)
    return net, names, po_ids, depths


def parse_mig(text: str) -> Network:
    """Parse ``.mig`` text into a :class:`Network` (PIs, POs in declaration order).

    Raises
    ------
    MigParseError
        On any syntax or semantic problem, with the line and column.
    """
    net, _, _, depths = _build(text)
    if depths:
        raise MigParseError("unexpected .depths section in an unmapped network", depths[0][2], 1)
    if net.buffers():
        raise MigParseError("BUF lines are only allowed in mapped dumps", 1, 1)
    try:
        net.topological_order()
    except Exception as exc:  # pragma: no cover - the builder never creates cycles
        raise MigParseError(str(exc)) from None
    return net


def read_mapped(text: str) -> MappedNetwork:
    """Parse a mapped dump: ``.mig`` plus ``BUF`` lines and a ``.depths`` section."""
    net, names, po_ids, depths = _build(text)
    d: Dict[NodeId, int] = {}
    for name, level, line, col in depths:
        in_nodes, in_pos = name in names, name in po_ids
        if in_nodes and in_pos and names[name] != po_ids[name]:
            raise MigParseError(f"depth name {name!r} is ambiguous", line, col)
        if not (in_nodes or in_pos):
            raise MigParseError(f"depth for unknown name {name!r}", line, col)
        try:
            value = int(level)
        except ValueError:
            raise MigParseError(f"bad level {level!r}", line, col) from None
        n = po_ids[name] if in_pos else names[name]
        if n in d:
            raise MigParseError(f"duplicate depth for {name!r}", line, col)
        d[n] = value
    return MappedNetwork(net, d)


# -- writing -----------------------------------------------------------------------------


def _assign_names(net: Network) -> Tuple[Dict[NodeId, str], Dict[NodeId, str]]:
    """Valid, unique node names; PO names are kept disjoint from node names."""
    used = set()
    node_names: Dict[NodeId, str] = {}

    def claim(want: Optional[str], fallback: str) -> str:
        base = want if want and NAME_RE.fullmatch(want) else fallback
        name, k = base, 1
        while name in used:
            name = f"{base}_{k}"
            k += 1
        used.add(name)
        return name

    for k, i in enumerate(net.pis):
        node_names[i] = claim(net.name(i), f"i{k}")
    # outputs are part of the interface, so they keep their names ahead of internal nodes
    po_names = {o: claim(net.name(o), f"o{k}") for k, o in enumerate(net.pos)}
    for n in net.topological_order():
        kind = net.kind(n)
        if kind is NodeKind.GATE:
            node_names[n] = claim(net.name(n), f"n{n}")
        elif kind is NodeKind.BUFFER:
            node_names[n] = claim(net.name(n), f"b{n}")
    return node_names, po_names


def _operand(s: Signal, names: Dict[NodeId, str]) -> str:
    if s.node == CONST0:
        return "1" if s.complemented else "0"
    return ("!" if s.complemented else "") + names[s.node]


def _write(net: Network, depth: Optional[Dict[NodeId, int]] = None) -> str:
    names, po_names = _assign_names(net)
    lines = []
    if net.pis:
        lines.append(".inputs " + " ".join(names[i] for i in net.pis))
    if net.pos:
        lines.append(".outputs " + " ".join(po_names[o] for o in net.pos))
    for n in net.topological_order():
        kind = net.kind(n)
        if kind is NodeKind.GATE:
            args = ", ".join(_operand(s, names) for s in net.fanins(n))
            lines.append(f"{names[n]} = MAJ({args})")
        elif kind is NodeKind.BUFFER:
            lines.append(f"{names[n]} = BUF({_operand(net.fanins(n)[0], names)})")
    for o in net.pos:
        lines.append(f"{po_names[o]} = {_operand(net.fanins(o)[0], names)}")
    if depth is not None:
        lines.append(".depths")
        for n in net.nodes():
            if net.is_const(n):
                continue
            label = po_names[n] if net.is_po(n) else names[n]
            lines.append(f"{label} {depth[n]}")
    return "\n".join(lines) + "\n"


def write_mig(net: Network) -> str:
    """Serialize ``net``; ``parse_mig`` of the result is isomorphic to ``net``."""
    if net.buffers():
        raise ValueError("network contains buffers; use write_mapped")
    return _write(net)


def write_mapped(m: MappedNetwork) -> str:
    return _write(m.net, m.depth)


# -- DOT --------------------------------------------------------------------------------------

_SHAPES = {
    NodeKind.GATE: "circle",
    NodeKind.BUFFER: "box",
    NodeKind.PI: "triangle",
    NodeKind.PO: "invtriangle",
}


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(m: MappedNetwork, title: str = "mapped") -> str:
    """Leveled DOT rendering: one ``rank=same`` group per depth, labeled ``l = k``.

    Gates are circles, buffers boxes, inputs triangles and outputs inverted
    triangles; complemented edges are dashed.  Constants are not drawn.
    """
    net, d = m.net, m.depth
    names, po_names = _assign_names(net)
    names.update(po_names)
    drawn = [n for n in net.nodes() if not net.is_const(n)]
    top = max((d[n] for n in drawn), default=0)
    out = [f"digraph {_quote(title)} {{", "  rankdir=BT;", "  node [fontsize=10];"]
    for n in drawn:
        label = names.get(n, str(n))
        out.append(f"  n{n} [shape={_SHAPES[net.kind(n)]}, label={_quote(label)}];")
    by_level: Dict[int, List[NodeId]] = {}
    for n in drawn:
        by_level.setdefault(d[n], []).append(n)
    for level in range(top + 1):
        members = " ".join(f"n{n};" for n in by_level.get(level, []))
        out.append(
            f"  {{ rank=same; l{level} [shape=plaintext, label={_quote(f'l = {level}')}]; {members} }}"
        )
    for level in range(top):
        out.append(f"  l{level} -> l{level + 1} [style=invis];")
    for n in drawn:
        for s in net.fanins(n):
            if net.is_const(s.node):
                continue
            style = " [style=dashed]" if s.complemented else ""
            out.append(f"  n{s.node} -> n{n}{style};")
    out.append("}")
    return "\n".join(out) + "\n"
