"""Bit-exact reader and writer for the ISCAS-85 .bench netlist format.

Accepted grammar (see docs/formats.md for the EBNF):

    line   := blank | '#' comment | 'INPUT(' net ')' | 'OUTPUT(' net ')'
            | net '=' KIND '(' net {',' net} ')'
    net    := [A-Za-z0-9_]+

Gate kinds are case-insensitive; BUF is an alias of BUFF. MUX(select,
in0, in1) is accepted as a dialect extension. Emission is canonical and
byte-deterministic: header comment, INPUT lines in PI order, OUTPUT lines
in PO order, gates in topological order, one space after commas.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import BenchParseError, DialectError, StructuralError, UnsupportedGate
from .netlist import Gate, GateKind, Netlist

_INPUT_RE = re.compile(r"^\s*(INPUT|OUTPUT)\s*\(\s*([A-Za-z0-9_]+)\s*\)\s*$", re.I)
_GATE_RE = re.compile(
    r"^\s*([A-Za-z0-9_]+)\s*=\s*([A-Za-z][A-Za-z0-9_]*)\s*\(\s*"
    r"([A-Za-z0-9_]+(?:\s*,\s*[A-Za-z0-9_]+)*)\s*\)\s*$"
)

# Common sequential kinds, rejected explicitly so the message is useful.
_SEQUENTIAL = {"DFF", "SDFF", "DFFSR", "LATCH", "FF"}


@dataclass(frozen=True)
class BenchDocument:
    """A parsed .bench file with its leading comment block preserved."""

    comments: tuple[str, ...]
    netlist: Netlist


def _syntax_error(line: str, lineno: int) -> BenchParseError:
    opens, closes = line.count("("), line.count(")")
    if opens > closes:
        return BenchParseError("expected ')'", lineno, len(line.rstrip()) + 1)
    if "=" in line:
        return BenchParseError(
            "malformed gate line", lineno, line.index("=") + 1
        )
    return BenchParseError(f"unrecognized line: {line.strip()!r}", lineno, 1)


def parse_bench_document(text: str, name: str = "bench") -> BenchDocument:
    """Parse .bench text into a validated netlist, keeping leading comments."""
    comments: list[str] = []
    in_header = True
    inputs: list[str] = []
    outputs: list[str] = []
    gates: list[Gate] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if in_header:
                comments.append(line[1:].strip())
            continue
        in_header = False
        m = _INPUT_RE.match(raw)
        if m:
            (inputs if m.group(1).upper() == "INPUT" else outputs).append(m.group(2))
            continue
        m = _GATE_RE.match(raw)
        if m:
            out, kind_token, args = m.groups()
            token = kind_token.upper()
            try:
                kind = GateKind.from_name(token)
            except ValueError:
                what = "sequential" if token in _SEQUENTIAL else "unsupported"
                raise UnsupportedGate(
                    f"{what} gate kind '{kind_token}'",
                    lineno,
                    raw.index(kind_token) + 1,
                ) from None
            gates.append(Gate(out, kind, [a.strip() for a in args.split(",")]))
            continue
        raise _syntax_error(raw, lineno)

    netlist = Netlist(name, inputs, outputs, gates)
    diags = netlist.validate()
    if diags:
        raise StructuralError(diags)
    return BenchDocument(tuple(comments), netlist)


def parse_bench(text: str, name: str = "bench") -> Netlist:
    """Parse .bench text and return the validated netlist."""
    return parse_bench_document(text, name).netlist


def lower_mux_gates(netlist: Netlist) -> Netlist:
    """Replace every MUX with its NOT/AND/AND/OR form.

    Synthesized nets are named ``<base>_nl<counter>`` with one counter
    shared across the whole rewrite; a taken name bumps the counter.
    """
    taken = set(netlist.nets)
    counter = 0

    def fresh(base: str) -> str:
        nonlocal counter
        while f"{base}_nl{counter}" in taken:
            counter += 1
        name = f"{base}_nl{counter}"
        counter += 1
        taken.add(name)
        return name

    gates: list[Gate] = []
    for gate in netlist.gates:
        if gate.kind is not GateKind.MUX:
            gates.append(gate)
            continue
        s, a, b = gate.inputs
        t_not = fresh(gate.output)
        t_a = fresh(gate.output)
        t_b = fresh(gate.output)
        gates.append(Gate(t_not, GateKind.NOT, (s,)))
        gates.append(Gate(t_a, GateKind.AND, (t_not, a)))
        gates.append(Gate(t_b, GateKind.AND, (s, b)))
        gates.append(Gate(gate.output, GateKind.OR, (t_a, t_b)))
    return Netlist(
        netlist.name, netlist.primary_inputs, netlist.primary_outputs, gates
    )


def emit_bench(
    netlist: Netlist, dialect: str = "extended", lower_mux: bool = False
) -> str:
    """Emit canonical .bench text.

    dialect 'extended' keeps MUX lines; 'strict' restricts output to the
    classic ISCAS alphabet and requires ``lower_mux=True`` if any MUX is
    present.
    """
    if dialect not in ("extended", "strict"):
        raise ValueError(f"unknown dialect: {dialect!r}")
    if dialect == "strict":
        has_mux = any(g.kind is GateKind.MUX for g in netlist.gates)
        if has_mux and not lower_mux:
            raise DialectError(
                "strict dialect cannot emit MUX gates; enable MUX lowering"
            )
        if has_mux:
            netlist = lower_mux_gates(netlist)

    st = netlist.stats()
    lines = [
        f"# {netlist.name}",
        f"# {st.n_inputs} inputs  {st.n_outputs} outputs  {st.n_gates} gates",
    ]
    lines.extend(f"INPUT({pi})" for pi in netlist.primary_inputs)
    lines.extend(f"OUTPUT({po})" for po in netlist.primary_outputs)
    for gate in netlist.topo_order():
        args = ", ".join(gate.inputs)
        lines.append(f"{gate.output} = {gate.kind.value}({args})")
    return "\n".join(lines) + "\n"
