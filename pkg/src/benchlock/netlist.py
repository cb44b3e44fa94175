"""Combinational gate-level netlist IR: construction, validation, simulation,
and structural analysis (cones, fanout, counts).

A net is a named single-driver signal; drivers are primary inputs or gate
outputs. Netlists are immutable after construction — transformations build
new instances.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .errors import StructuralError, UnknownNet

NET_NAME_RE = re.compile(r"^[A-Za-z0-9_]+$")


class GateKind(Enum):
    AND = "AND"
    NAND = "NAND"
    OR = "OR"
    NOR = "NOR"
    XOR = "XOR"
    XNOR = "XNOR"
    NOT = "NOT"
    BUFF = "BUFF"
    MUX = "MUX"

    @classmethod
    def from_name(cls, name: str) -> "GateKind":
        token = name.strip().upper()
        if token == "BUF":
            token = "BUFF"
        return cls(token)

    def arity_ok(self, n: int) -> bool:
        if self in (GateKind.NOT, GateKind.BUFF):
            return n == 1
        if self is GateKind.MUX:
            return n == 3
        return n >= 2


@dataclass(frozen=True)
class Gate:
    """One gate: ``output = kind(inputs...)``. MUX input order is
    (select, in0, in1); select=0 picks in0."""

    output: str
    kind: GateKind
    inputs: tuple[str, ...]

    def __init__(self, output: str, kind: GateKind, inputs: Iterable[str]):
        object.__setattr__(self, "output", output)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "inputs", tuple(inputs))


@dataclass(frozen=True)
class CircuitStats:
    n_inputs: int
    n_outputs: int
    n_gates: int
    by_kind: tuple[tuple[str, int], ...]

    def as_dict(self) -> dict:
        return {
            "inputs": self.n_inputs,
            "outputs": self.n_outputs,
            "gates": self.n_gates,
            "by_kind": dict(self.by_kind),
        }


def eval_gate(kind: GateKind, vals: list[int], ones: int = 1) -> int:
    """Evaluate one gate over bit-parallel integer masks.

    ``ones`` is the all-ones mask for the simulation width; with ones=1 this
    is plain single-vector evaluation.
    """
    if kind is GateKind.AND or kind is GateKind.NAND:
        v = vals[0]
        for x in vals[1:]:
            v &= x
        return v ^ ones if kind is GateKind.NAND else v
    if kind is GateKind.OR or kind is GateKind.NOR:
        v = vals[0]
        for x in vals[1:]:
            v |= x
        return v ^ ones if kind is GateKind.NOR else v
    if kind is GateKind.XOR or kind is GateKind.XNOR:
        v = vals[0]
        for x in vals[1:]:
            v ^= x
        return v ^ ones if kind is GateKind.XNOR else v
    if kind is GateKind.NOT:
        return vals[0] ^ ones
    if kind is GateKind.BUFF:
        return vals[0]
    # MUX(select, in0, in1)
    s, a, b = vals
    return (a & (s ^ ones)) | (b & s)


class Netlist:
    """Ordered, immutable-by-convention combinational netlist.

    Parameters
    ----------
    name : str
        Circuit identifier.
    primary_inputs, primary_outputs : iterable of str
        Ordered port lists. Outputs name existing nets.
    gates : iterable of Gate
        Ordered gate list; order is preserved and used for tie-breaking.
    """

    def __init__(self, name, primary_inputs, primary_outputs, gates):
        self.name = name
        self.primary_inputs = tuple(primary_inputs)
        self.primary_outputs = tuple(primary_outputs)
        self.gates = tuple(gates)

        # Driver table in declaration order. First driver wins so that an
        # invalid netlist can still be inspected; duplicates are kept for
        # validate().
        self._driver: dict[str, Gate | None] = {}
        self._redefined: list[str] = []
        for pi in self.primary_inputs:
            if pi in self._driver:
                self._redefined.append(pi)
            else:
                self._driver[pi] = None
        for gate in self.gates:
            if gate.output in self._driver:
                self._redefined.append(gate.output)
            else:
                self._driver[gate.output] = gate

        self._loads: dict[str, list[tuple[int, int]]] | None = None
        self._topo: tuple[Gate, ...] | None = None

    # -- basic accessors ----------------------------------------------------

    @property
    def nets(self) -> tuple[str, ...]:
        """All net names, PIs first then gate outputs, in declaration order."""
        return tuple(self._driver)

    def has_net(self, net: str) -> bool:
        return net in self._driver

    def driver(self, net: str) -> Gate | None:
        """Driving gate of a net, or None for a primary input."""
        try:
            return self._driver[net]
        except KeyError:
            raise UnknownNet(f"unknown net: {net!r}") from None

    def is_primary_input(self, net: str) -> bool:
        return self.has_net(net) and self._driver[net] is None

    def _load_table(self) -> dict[str, list[tuple[int, int]]]:
        if self._loads is None:
            loads: dict[str, list[tuple[int, int]]] = {n: [] for n in self._driver}
            for gi, gate in enumerate(self.gates):
                for slot, inp in enumerate(gate.inputs):
                    if inp in loads:
                        loads[inp].append((gi, slot))
            self._loads = loads
        return self._loads

    def load_gates(self, net: str) -> list[Gate]:
        """Gates reading a net, in gate order (duplicates if read twice)."""
        if not self.has_net(net):
            raise UnknownNet(f"unknown net: {net!r}")
        return [self.gates[gi] for gi, _ in self._load_table()[net]]

    # -- validation ----------------------------------------------------------

    def validate(self) -> list[str]:
        """Return all invariant violations; an empty list means valid."""
        diags: list[str] = []
        for net in self.nets:
            if not NET_NAME_RE.match(net):
                diags.append(f"bad net name: {net!r}")
        for net in self._redefined:
            diags.append(f"multi-driver: net '{net}' has more than one driver")
        for gate in self.gates:
            if not gate.kind.arity_ok(len(gate.inputs)):
                diags.append(
                    f"bad arity: gate '{gate.output}' = {gate.kind.value} "
                    f"with {len(gate.inputs)} input(s)"
                )
            for inp in gate.inputs:
                if inp not in self._driver:
                    diags.append(
                        f"undriven: gate '{gate.output}' reads unknown net '{inp}'"
                    )
        for po in self.primary_outputs:
            if po not in self._driver:
                diags.append(f"undriven: primary output '{po}' names no net")
        diags.extend(self._cycle_diagnostics())
        return diags

    def _cycle_diagnostics(self) -> list[str]:
        order, leftover = self._kahn()
        if not leftover:
            return []
        # Walk drivers inside the leftover set until a net repeats.
        member = {g.output for g in leftover}
        start = leftover[0].output
        seen: list[str] = []
        net = start
        while net not in seen:
            seen.append(net)
            gate = self._driver.get(net)
            if gate is None:
                break
            net = next((i for i in gate.inputs if i in member), gate.inputs[0])
        return [f"cycle: combinational loop through net '{net}'"]

    # -- topological order ----------------------------------------------------

    def _kahn(self) -> tuple[list[Gate], list[Gate]]:
        """Deterministic Kahn layering; ties broken by original gate order.

        Returns (ordered gates, gates stuck on a cycle).
        """
        pending = []
        missing = [0] * len(self.gates)
        waiting: dict[str, list[int]] = {}
        placed = {n for n, d in self._driver.items() if d is None}
        for gi, gate in enumerate(self.gates):
            need = 0
            for inp in set(gate.inputs):
                if inp in placed or inp not in self._driver:
                    continue
                need += 1
                waiting.setdefault(inp, []).append(gi)
            missing[gi] = need
            if need == 0:
                heapq.heappush(pending, gi)
        order: list[Gate] = []
        done = [False] * len(self.gates)
        while pending:
            gi = heapq.heappop(pending)
            done[gi] = True
            gate = self.gates[gi]
            order.append(gate)
            for wi in waiting.get(gate.output, ()):
                missing[wi] -= 1
                if missing[wi] == 0:
                    heapq.heappush(pending, wi)
        leftover = [g for gi, g in enumerate(self.gates) if not done[gi]]
        return order, leftover

    def topo_order(self) -> tuple[Gate, ...]:
        """Gates ordered so each appears after the drivers of its inputs."""
        if self._topo is None:
            order, leftover = self._kahn()
            if leftover:
                raise StructuralError(self._cycle_diagnostics())
            self._topo = tuple(order)
        return self._topo

    # -- simulation -----------------------------------------------------------

    def simulate(self, assignment: Mapping[str, int]) -> dict[str, int]:
        """Evaluate the netlist on a total primary-input assignment.

        Returns the output assignment (PO name -> bit). Extra keys in
        ``assignment`` are ignored, which lets callers pass merged
        input+key dictionaries.
        """
        values = self.net_values(assignment)
        return {po: values[po] for po in self.primary_outputs}

    def net_values(self, assignment: Mapping[str, int]) -> dict[str, int]:
        """Like simulate() but returns the value of every net."""
        values: dict[str, int] = {}
        for pi in self.primary_inputs:
            if pi not in assignment:
                raise UnknownNet(f"input error: missing primary input '{pi}'")
            bit = int(assignment[pi])
            if bit not in (0, 1):
                raise ValueError(f"non-bit value for '{pi}': {assignment[pi]!r}")
            values[pi] = bit
        for gate in self.topo_order():
            values[gate.output] = eval_gate(
                gate.kind, [values[i] for i in gate.inputs], 1
            )
        return values

    # -- structural analysis ----------------------------------------------------

    def tfi(self, net: str) -> set[str]:
        """Transitive fan-in: nets reachable backward through drivers,
        excluding ``net`` itself."""
        if not self.has_net(net):
            raise UnknownNet(f"unknown net: {net!r}")
        seen: set[str] = set()
        stack = [net]
        while stack:
            gate = self._driver.get(stack.pop())
            if gate is None:
                continue
            for inp in gate.inputs:
                if inp not in seen and inp in self._driver:
                    seen.add(inp)
                    stack.append(inp)
        seen.discard(net)
        return seen

    def tfo(self, net: str) -> set[str]:
        """Transitive fan-out: nets reachable forward through gate inputs,
        excluding ``net`` itself."""
        if not self.has_net(net):
            raise UnknownNet(f"unknown net: {net!r}")
        loads = self._load_table()
        seen: set[str] = set()
        stack = [net]
        while stack:
            for gi, _ in loads[stack.pop()]:
                out = self.gates[gi].output
                if out not in seen:
                    seen.add(out)
                    stack.append(out)
        seen.discard(net)
        return seen

    def fanout_count(self, net: str) -> int:
        """Number of gate-input positions plus primary-output slots reading
        the net."""
        if not self.has_net(net):
            raise UnknownNet(f"unknown net: {net!r}")
        po_slots = sum(1 for po in self.primary_outputs if po == net)
        return len(self._load_table()[net]) + po_slots

    def stats(self) -> CircuitStats:
        by_kind: dict[str, int] = {}
        for gate in self.gates:
            by_kind[gate.kind.value] = by_kind.get(gate.kind.value, 0) + 1
        return CircuitStats(
            n_inputs=len(self.primary_inputs),
            n_outputs=len(self.primary_outputs),
            n_gates=len(self.gates),
            by_kind=tuple(sorted(by_kind.items())),
        )

    # -- comparison ---------------------------------------------------------------

    def gate_map(self) -> dict[str, tuple[GateKind, tuple[str, ...]]]:
        return {g.output: (g.kind, g.inputs) for g in self.gates}

    def structurally_equal(self, other: "Netlist") -> bool:
        """Same ports (ordered) and same gate set keyed by output net.

        Gate list order is not significant; gate input order is.
        """
        return (
            self.primary_inputs == other.primary_inputs
            and self.primary_outputs == other.primary_outputs
            and self.gate_map() == other.gate_map()
        )

    def __repr__(self):
        return (
            f"Netlist({self.name!r}, {len(self.primary_inputs)} PI, "
            f"{len(self.primary_outputs)} PO, {len(self.gates)} gates)"
        )


def validate(netlist: Netlist) -> list[str]:
    """Module-level alias for Netlist.validate()."""
    return netlist.validate()


def check_valid(netlist: Netlist) -> Netlist:
    """Raise StructuralError if the netlist breaks any invariant."""
    diags = netlist.validate()
    if diags:
        raise StructuralError(diags)
    return netlist


EXHAUSTIVE_PI_LIMIT = 28


def input_pattern(index: int, n_inputs: int) -> int:
    """Truth-table mask for input ``index`` over all 2**n_inputs vectors.

    Bit j of the mask is bit ``index`` of the vector number j.
    """
    width = 1 << n_inputs
    half = 1 << index
    chunk = ((1 << half) - 1) << half
    period = half << 1
    repunit = ((1 << width) - 1) // ((1 << period) - 1)
    return chunk * repunit


def truth_tables(
    netlist: Netlist,
    input_order: Iterable[str] | None = None,
    extra: Mapping[str, int] | None = None,
) -> dict[str, int]:
    """Bit-parallel exhaustive simulation over all input vectors.

    Returns a mask per net: bit j of mask[n] is the value of net n under
    input vector j, where vector j assigns bit i of j to the i-th name in
    ``input_order`` (default: the netlist's PI order). Inputs listed in
    ``extra`` are held at the given constant instead of enumerated.
    Refuses more than EXHAUSTIVE_PI_LIMIT enumerated inputs.
    """
    extra = dict(extra or {})
    order = [
        pi
        for pi in (tuple(input_order) if input_order else netlist.primary_inputs)
        if pi not in extra
    ]
    n = len(order)
    if n > EXHAUSTIVE_PI_LIMIT:
        raise ValueError(
            f"{n} free inputs exceeds the exhaustive limit "
            f"({EXHAUSTIVE_PI_LIMIT}); use the SAT mode instead"
        )
    ones = (1 << (1 << n)) - 1
    values: dict[str, int] = {}
    for i, pi in enumerate(order):
        values[pi] = input_pattern(i, n)
    for pi, bit in extra.items():
        values[pi] = ones if bit else 0
    for pi in netlist.primary_inputs:
        if pi not in values:
            raise UnknownNet(f"input error: missing primary input '{pi}'")
    for gate in netlist.topo_order():
        values[gate.output] = eval_gate(
            gate.kind, [values[i] for i in gate.inputs], ones
        )
    return values


def vector_assignment(order: Iterable[str], j: int) -> dict[str, int]:
    """Decode truth-table vector number j into an input assignment."""
    return {pi: (j >> i) & 1 for i, pi in enumerate(order)}


def fresh_name(base: str, taken: Iterable[str]) -> str:
    """First name of the form base / base_2 / base_3 ... not in ``taken``."""
    taken = set(taken)
    if base not in taken:
        return base
    i = 2
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"
