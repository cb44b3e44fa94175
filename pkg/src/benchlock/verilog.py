"""Reader for a gate-level structural Verilog subset.

Supported: a single module, non-ANSI header, ``input``/``output``/``wire``
declarations of scalar nets, and primitive instantiations of and/nand/or/
nor/xor/xnor/not/buf with the output terminal first. N-input primitives
stay n-ary gates; nothing is decomposed. ``assign lhs = rhs;`` with a bare
identifier rhs maps to BUFF. Everything else (always blocks, operators,
buses, parameters, multiple modules) raises UnsupportedConstruct — never a
silent skip.
"""

from __future__ import annotations

import re

from .errors import StructuralError, UnsupportedConstruct
from .netlist import Gate, GateKind, Netlist

_PRIMITIVES = {
    "and": GateKind.AND,
    "nand": GateKind.NAND,
    "or": GateKind.OR,
    "nor": GateKind.NOR,
    "xor": GateKind.XOR,
    "xnor": GateKind.XNOR,
    "not": GateKind.NOT,
    "buf": GateKind.BUFF,
}

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_IDENT_RE = re.compile(rf"^{_IDENT}$")
_INSTANCE_RE = re.compile(rf"(?:({_IDENT})\s*)?\(\s*([^()]*?)\s*\)")


def _strip_comments(text: str) -> str:
    """Remove // and /* */ comments, preserving line numbers."""
    text = re.sub(r"//[^\n]*", "", text)

    def blank(m: re.Match) -> str:
        return "\n" * m.group(0).count("\n")

    return re.sub(r"/\*.*?\*/", blank, text, flags=re.S)


def _split_statements(text: str) -> list[tuple[int, str]]:
    """Split on ';', keeping the 1-based line each statement starts on."""
    statements = []
    line = 1
    for chunk in text.split(";"):
        stripped = chunk.strip()
        if stripped:
            start = line + chunk[: chunk.index(stripped[0])].count("\n")
            statements.append((start, re.sub(r"\s+", " ", stripped)))
        line += chunk.count("\n")
    return statements


def _names(listing: str, lineno: int, what: str) -> list[str]:
    names = []
    for item in listing.split(","):
        name = item.strip()
        if "[" in name or "]" in name:
            raise UnsupportedConstruct(f"buses are not supported in {what}", lineno)
        if not _IDENT_RE.match(name):
            raise UnsupportedConstruct(f"bad identifier {name!r} in {what}", lineno)
        names.append(name)
    return names


def parse_verilog_subset(text: str, name: str | None = None) -> Netlist:
    """Parse a structural-primitive Verilog module into a netlist."""
    text = _strip_comments(text)
    if len(re.findall(r"\bmodule\b", text)) > 1:
        raise UnsupportedConstruct("only a single module is supported")

    module_name = name
    seen_module = False
    inputs: list[str] = []
    outputs: list[str] = []
    gates: list[Gate] = []

    for lineno, stmt in _split_statements(text):
        head = stmt.split(None, 1)[0]

        if head == "module":
            m = re.match(rf"module\s+({_IDENT})\s*(?:\((.*)\))?\s*$", stmt)
            if not m:
                raise UnsupportedConstruct("malformed module header", lineno)
            if re.search(r"\b(input|output|inout)\b", m.group(2) or ""):
                raise UnsupportedConstruct(
                    "ANSI-style port declarations are not supported", lineno
                )
            module_name = module_name or m.group(1)
            seen_module = True
            continue

        if stmt == "endmodule":
            continue
        if stmt.startswith("endmodule"):
            # a statement glued after endmodule (no ';' in between)
            raise UnsupportedConstruct("unexpected text after endmodule", lineno)

        if head in ("input", "output", "wire"):
            names = _names(stmt[len(head):], lineno, f"{head} declaration")
            if head == "input":
                inputs.extend(names)
            elif head == "output":
                outputs.extend(names)
            # wires need no bookkeeping: nets exist by being driven
            continue

        if head == "assign":
            m = re.match(rf"assign\s+({_IDENT})\s*=\s*({_IDENT})\s*$", stmt)
            if not m:
                raise UnsupportedConstruct(
                    "assign with operators is not supported", lineno
                )
            gates.append(Gate(m.group(1), GateKind.BUFF, (m.group(2),)))
            continue

        if head in _PRIMITIVES:
            kind = _PRIMITIVES[head]
            rest = stmt[len(head):].strip()
            matched_upto = 0
            instances = []
            for m in _INSTANCE_RE.finditer(rest):
                between = rest[matched_upto : m.start()].strip().strip(",").strip()
                if between:
                    raise UnsupportedConstruct(
                        f"unexpected text {between!r} in gate instantiation", lineno
                    )
                instances.append(m.group(2))
                matched_upto = m.end()
            trailing = rest[matched_upto:].strip()
            if trailing or not instances:
                raise UnsupportedConstruct(
                    f"malformed {head} instantiation", lineno
                )
            for terms in instances:
                ports = _names(terms, lineno, f"{head} instance")
                if len(ports) < 2:
                    raise UnsupportedConstruct(
                        f"{head} instance needs an output and at least one input",
                        lineno,
                    )
                if kind in (GateKind.NOT, GateKind.BUFF) and len(ports) != 2:
                    raise UnsupportedConstruct(
                        f"multi-output {head} instances are not supported", lineno
                    )
                gates.append(Gate(ports[0], kind, ports[1:]))
            continue

        raise UnsupportedConstruct(f"unsupported construct {head!r}", lineno)

    if not seen_module:
        raise UnsupportedConstruct("no module found")

    netlist = Netlist(module_name or "verilog", inputs, outputs, gates)
    diags = netlist.validate()
    if diags:
        raise StructuralError(diags)
    return netlist
