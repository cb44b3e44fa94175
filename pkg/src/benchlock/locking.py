"""Deterministic key-gate insertion: net selection strategies plus
XOR/XNOR and MUX-with-dummy locking.

Key input i is named ``<prefix><i>`` (default prefix ``keyinput``). For a
gate-driven target net the driver's output is renamed to a fresh internal
net and the key gate takes over the original name, so every sink keeps
reading the name it always read. A primary-input target keeps its name
(the PI list must survive locking); instead the key-gate output gets the
fresh name and all sinks are rewired to it. Nets that are both a primary
input and a primary output cannot be locked either way and are excluded
from eligibility.

All randomness comes from Python's Mersenne Twister (``random.Random``)
seeded per call; PRNG_NAME is echoed into reports so runs are pinned to
the generator that produced them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .errors import DummyError, LockError, SelectionError
from .netlist import Gate, GateKind, Netlist, fresh_name
from .scoap import scoap

PRNG_NAME = "mt19937"
KEY_PREFIX = "keyinput"

SELECTION_STRATEGIES = ("random", "cone_size", "scoap", "sll", "fan_heavy")
KEYGATE_POLICIES = ("xor_only", "mux_only", "mixed")
DUMMY_POLICIES = ("constant", "primary_input", "other_cone_net", "random_function")
_RANDOM_FN_KINDS = (
    GateKind.AND,
    GateKind.OR,
    GateKind.NAND,
    GateKind.NOR,
    GateKind.XOR,
    GateKind.XNOR,
)


@dataclass(frozen=True)
class Key:
    """Ordered key bits; bit i belongs to key input ``<prefix><i>``."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise LockError(f"key bits must be 0/1: {self.bits}")

    def __len__(self):
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    def __getitem__(self, i):
        return self.bits[i]

    def to_string(self) -> str:
        return "".join(str(b) for b in self.bits)

    @classmethod
    def from_string(cls, text: str) -> "Key":
        text = text.strip()
        if not all(c in "01" for c in text):
            raise LockError(f"malformed key string: {text!r}")
        return cls(tuple(int(c) for c in text))

    def complemented(self) -> "Key":
        return Key(tuple(1 - b for b in self.bits))


@dataclass(frozen=True)
class LockRecord:
    """Ledger entry for one key bit."""

    index: int
    target: str
    gate_type: str  # XOR | XNOR | MUX
    pi_target: bool  # True when the locked net was a primary input
    carrier: str  # renamed pre-keygate net (gate mode) or rewired net (PI mode)
    dummy_policy: str | None = None
    dummy_net: str | None = None
    original_slot: int | None = None  # MUX data slot carrying the original


@dataclass(frozen=True)
class LockedNetlist:
    netlist: Netlist
    key_inputs: tuple[str, ...]
    correct_key: Key
    ledger: tuple[LockRecord, ...]

    @property
    def key_size(self) -> int:
        return len(self.key_inputs)


@dataclass(frozen=True)
class LockConfig:
    key_size: int
    keygate_policy: str = "xor_only"
    xor_fraction: float = 0.5
    selection: str = "random"
    dummy_policy: str = "other_cone_net"
    seed: int = 0
    preset: str | None = None
    key_prefix: str = KEY_PREFIX
    allow_empty_key: bool = False  # debug escape hatch for key_size 0

    def normalized(self) -> "LockConfig":
        cfg = self
        if cfg.preset == "sat_hard":
            cfg = replace(
                cfg,
                keygate_policy="mixed",
                xor_fraction=0.5,
                selection="fan_heavy",
                dummy_policy="other_cone_net",
            )
        elif cfg.preset is not None:
            raise LockError(f"unknown preset: {cfg.preset!r}")
        if cfg.key_size < 0 or (cfg.key_size == 0 and not cfg.allow_empty_key):
            raise LockError("key_size must be >= 1")
        if not 0.0 <= cfg.xor_fraction <= 1.0:
            raise LockError(f"xor_fraction out of range: {cfg.xor_fraction}")
        if cfg.keygate_policy not in KEYGATE_POLICIES:
            raise LockError(f"unknown keygate policy: {cfg.keygate_policy!r}")
        if cfg.selection not in SELECTION_STRATEGIES:
            raise LockError(f"unknown selection strategy: {cfg.selection!r}")
        if cfg.dummy_policy not in DUMMY_POLICIES:
            raise LockError(f"unknown dummy policy: {cfg.dummy_policy!r}")
        return cfg

    def as_dict(self) -> dict:
        return {
            "key_size": self.key_size,
            "keygate_policy": self.keygate_policy,
            "xor_fraction": self.xor_fraction,
            "selection": self.selection,
            "dummy_policy": self.dummy_policy,
            "seed": self.seed,
            "preset": self.preset,
            "key_prefix": self.key_prefix,
            "prng": PRNG_NAME,
        }


def generate_key(key_size: int, seed: int) -> Key:
    """Deterministic key bits from the seeded PRNG."""
    if key_size < 0:
        raise LockError("key_size must be >= 0")
    rng = random.Random(seed)
    return Key(tuple(rng.getrandbits(1) for _ in range(key_size)))


def eligible_nets(netlist: Netlist) -> list[str]:
    """Lockable nets in declaration order.

    Every net qualifies except those that are both a primary input and a
    primary output (no spot to splice a key gate without renaming a port).
    """
    pos = set(netlist.primary_outputs)
    return [
        n
        for n in netlist.nets
        if not (netlist.is_primary_input(n) and n in pos)
    ]


def select_nets(
    netlist: Netlist, strategy: str, k: int, seed: int = 0
) -> list[str]:
    """Pick k distinct lock targets under the given strategy.

    random: uniform sample without replacement. cone_size: top-k by
    |tfi|+|tfo|. scoap: top-k by cc0+cc1+co. fan_heavy: top-k by
    fanout_count x driver arity (arity 1 for PIs). sll: greedy scan in
    cone_size order skipping nets on a shared path with a previous pick.
    Ties break by net name ascending.
    """
    if strategy not in SELECTION_STRATEGIES:
        raise SelectionError(f"unknown selection strategy: {strategy!r}")
    pool = eligible_nets(netlist)
    if k < 0:
        raise SelectionError("k must be >= 0")
    if k > len(pool):
        raise SelectionError(
            f"cannot select {k} nets: only {len(pool)} eligible"
        )
    if k == 0:
        return []

    if strategy == "random":
        return random.Random(seed).sample(pool, k)

    if strategy == "scoap":
        metrics = scoap(netlist)
        ranked = sorted(pool, key=lambda n: (-metrics.score(n), n))
        return ranked[:k]

    if strategy == "fan_heavy":
        def weight(n: str) -> int:
            gate = netlist.driver(n)
            arity = len(gate.inputs) if gate is not None else 1
            return netlist.fanout_count(n) * arity

        return sorted(pool, key=lambda n: (-weight(n), n))[:k]

    # cone_size and sll both rank by cone size
    ranked = sorted(
        pool, key=lambda n: (-(len(netlist.tfi(n)) + len(netlist.tfo(n))), n)
    )
    if strategy == "cone_size":
        return ranked[:k]

    chosen: list[str] = []
    cones: list[set[str]] = []
    for cand in ranked:
        if any(cand in cone for cone in cones):
            continue
        chosen.append(cand)
        cones.append(netlist.tfi(cand) | netlist.tfo(cand))
        if len(chosen) == k:
            return chosen
    raise SelectionError(
        f"sll found only {len(chosen)} path-disjoint nets; try k <= {len(chosen)}"
    )


# -- insertion ----------------------------------------------------------------


class _Workbench:
    """Mutable gate list while key gates are spliced in."""

    def __init__(self, netlist: Netlist, prefix: str):
        self.name = netlist.name
        self.pis = list(netlist.primary_inputs)
        self.pos = list(netlist.primary_outputs)
        self.gates = list(netlist.gates)
        self.original_pis = tuple(netlist.primary_inputs)
        self.prefix = prefix
        self.taken = set(netlist.nets)

    def snapshot(self) -> Netlist:
        return Netlist(self.name, self.pis, self.pos, self.gates)

    def fresh(self, base: str) -> str:
        name = fresh_name(base, self.taken)
        self.taken.add(name)
        return name

    def add_key_input(self, index: int) -> str:
        name = f"{self.prefix}{index}"
        if name in self.taken:
            raise LockError(f"net {name!r} already exists; refusing to lock")
        self.taken.add(name)
        self.pis.append(name)
        return name

    def splice(self, target: str) -> tuple[str, str, bool]:
        """Make room for a key gate driving ``target``'s sinks.

        Gate-driven target: rename the driver output to a fresh carrier
        net; key gate output will take the original name. PI target: the
        key gate output gets the fresh carrier name and every sink is
        rewired to it. Returns (key_gate_output, original_value_net,
        pi_mode).
        """
        driver_idx = next(
            (i for i, g in enumerate(self.gates) if g.output == target), None
        )
        if driver_idx is None:
            if target not in self.pis:
                raise LockError(f"cannot lock unknown net {target!r}")
            if target in self.pos:
                raise LockError(
                    f"cannot lock {target!r}: it is both a primary input "
                    "and a primary output"
                )
            carrier = self.fresh(f"{target}_keyed")
            self.gates = [
                Gate(
                    g.output,
                    g.kind,
                    tuple(carrier if i == target else i for i in g.inputs),
                )
                for g in self.gates
            ]
            return carrier, target, True
        old = self.gates[driver_idx]
        carrier = self.fresh(f"{target}_pre")
        self.gates[driver_idx] = Gate(carrier, old.kind, old.inputs)
        return target, carrier, False


def _dummy_net(
    bench: _Workbench,
    bit_index: int,
    target: str,
    policy: str,
    rng: random.Random,
) -> tuple[str, str]:
    """Pick or synthesize the dummy input for one MUX key gate.

    Returns (dummy net, description for the ledger). The cone filter keeps
    the dummy outside tfi/tfo of the locked net so insertion can never
    close a cycle.
    """
    snapshot = bench.snapshot()

    if policy == "constant":
        bit = rng.getrandbits(1)
        # anchor must differ from the target: a PI-mode lock rewires every
        # reader of the target net, which would loop the constant back
        # through the key gate
        anchor = next((p for p in bench.original_pis if p != target), None)
        if anchor is None:
            raise DummyError(f"no primary input to anchor a constant for {target!r}")
        net = bench.fresh(f"km{bit_index}_c{bit}")
        kind = GateKind.XNOR if bit else GateKind.XOR
        bench.gates.append(Gate(net, kind, (anchor, anchor)))
        return net, f"constant{bit}"

    if policy == "primary_input":
        pool = [p for p in bench.original_pis if p != target]
        if not pool:
            raise DummyError(f"no primary input available as dummy for {target!r}")
        return rng.choice(pool), "primary_input"

    blocked = snapshot.tfi(target) | snapshot.tfo(target) | {target}
    key_names = set(bench.pis) - set(bench.original_pis)
    pool = [
        n for n in snapshot.nets if n not in blocked and n not in key_names
    ]
    if policy == "other_cone_net":
        if not pool:
            raise DummyError(f"no net outside the cone of {target!r}")
        return rng.choice(pool), "other_cone_net"

    # random_function: depth <= 2 gate tree over 2-3 cone-safe nets
    want = rng.choice((2, 3))
    if len(pool) < 2:
        raise DummyError(f"too few nets to build a dummy function for {target!r}")
    want = min(want, len(pool))
    operands = rng.sample(pool, want)
    if want == 2:
        net = bench.fresh(f"km{bit_index}_f0")
        bench.gates.append(Gate(net, rng.choice(_RANDOM_FN_KINDS), operands))
        return net, "random_function"
    if rng.getrandbits(1):
        net = bench.fresh(f"km{bit_index}_f0")
        bench.gates.append(Gate(net, rng.choice(_RANDOM_FN_KINDS), operands))
        return net, "random_function"
    inner = bench.fresh(f"km{bit_index}_f0")
    bench.gates.append(Gate(inner, rng.choice(_RANDOM_FN_KINDS), operands[:2]))
    net = bench.fresh(f"km{bit_index}_f1")
    bench.gates.append(
        Gate(net, rng.choice(_RANDOM_FN_KINDS), (inner, operands[2]))
    )
    return net, "random_function"


def _insert(
    netlist: Netlist,
    plan: list[tuple[int, str, int, str]],
    dummy_policy: str,
    rng: random.Random,
    prefix: str,
) -> LockedNetlist:
    """Splice key gates per plan entries (index, target, bit, style)."""
    targets = [t for _, t, _, _ in plan]
    if len(set(targets)) != len(targets):
        raise LockError("lock targets must be distinct")
    bench = _Workbench(netlist, prefix)
    records: list[LockRecord] = []
    key_inputs: list[str] = []
    bits: list[int] = []

    for index, target, bit, style in plan:
        if not bench.snapshot().has_net(target):
            raise LockError(f"cannot lock unknown net {target!r}")
        if style == "mux":
            dummy, policy_desc = _dummy_net(
                bench, index, target, dummy_policy, rng
            )
        key_in = bench.add_key_input(index)
        key_out, carrier, pi_mode = bench.splice(target)
        if style == "xor":
            kind = GateKind.XNOR if bit else GateKind.XOR
            bench.gates.append(Gate(key_out, kind, (carrier, key_in)))
            records.append(
                LockRecord(index, target, kind.value, pi_mode, carrier)
            )
        else:
            data = (carrier, dummy) if bit == 0 else (dummy, carrier)
            bench.gates.append(Gate(key_out, GateKind.MUX, (key_in,) + data))
            records.append(
                LockRecord(
                    index,
                    target,
                    "MUX",
                    pi_mode,
                    carrier,
                    dummy_policy=policy_desc,
                    dummy_net=dummy,
                    original_slot=bit,
                )
            )
        key_inputs.append(key_in)
        bits.append(bit)

    locked = bench.snapshot()
    diags = locked.validate()
    # insertion must never break the invariants; a diagnostic here is a bug
    assert not diags, f"locking produced an invalid netlist: {diags}"
    return LockedNetlist(locked, tuple(key_inputs), Key(tuple(bits)), tuple(records))


def insert_xor_keygates(
    netlist: Netlist,
    nets: list[str],
    key_bits: Key | tuple[int, ...],
    prefix: str = KEY_PREFIX,
) -> LockedNetlist:
    """XOR/XNOR-lock each net: bit 0 inserts XOR, bit 1 inserts XNOR, so
    the correct key always restores the original value."""
    bits = tuple(key_bits)
    if len(nets) != len(bits):
        raise LockError(f"{len(nets)} nets vs {len(bits)} key bits")
    plan = [(i, n, b, "xor") for i, (n, b) in enumerate(zip(nets, bits))]
    return _insert(netlist, plan, "other_cone_net", random.Random(0), prefix)


def insert_mux_keygates(
    netlist: Netlist,
    nets: list[str],
    key_bits: Key | tuple[int, ...],
    dummy_policy: str = "other_cone_net",
    seed: int = 0,
    prefix: str = KEY_PREFIX,
) -> LockedNetlist:
    """MUX-lock each net against a policy-chosen dummy; the correct key
    bit selects the slot carrying the original value.

    Per-bit gate cost: 1 MUX, plus 1 gate for a constant dummy and up to
    2 for a random_function dummy (primary_input and other_cone_net add
    none).
    """
    bits = tuple(key_bits)
    if len(nets) != len(bits):
        raise LockError(f"{len(nets)} nets vs {len(bits)} key bits")
    if dummy_policy not in DUMMY_POLICIES:
        raise LockError(f"unknown dummy policy: {dummy_policy!r}")
    plan = [(i, n, b, "mux") for i, (n, b) in enumerate(zip(nets, bits))]
    return _insert(netlist, plan, dummy_policy, random.Random(seed), prefix)


def lock(netlist: Netlist, config: LockConfig) -> tuple[LockedNetlist, Key]:
    """Full locking flow: key generation, net selection, key-gate insertion.

    Byte-deterministic for a fixed (netlist, config): all sub-seeds derive
    from config.seed.
    """
    cfg = config.normalized()
    root = random.Random(cfg.seed)
    key_seed, select_seed, split_seed, dummy_seed = (
        root.getrandbits(64) for _ in range(4)
    )
    if cfg.key_size == 0:
        return (
            LockedNetlist(netlist, (), Key(()), ()),
            Key(()),
        )
    key = generate_key(cfg.key_size, key_seed)
    nets = select_nets(netlist, cfg.selection, cfg.key_size, select_seed)

    if cfg.keygate_policy == "xor_only":
        styles = ["xor"] * cfg.key_size
    elif cfg.keygate_policy == "mux_only":
        styles = ["mux"] * cfg.key_size
    else:
        n_xor = round(cfg.key_size * cfg.xor_fraction)
        order = list(range(cfg.key_size))
        random.Random(split_seed).shuffle(order)
        xor_idx = set(order[:n_xor])
        styles = ["xor" if i in xor_idx else "mux" for i in range(cfg.key_size)]

    plan = [
        (i, nets[i], key[i], styles[i]) for i in range(cfg.key_size)
    ]
    locked = _insert(
        netlist, plan, cfg.dummy_policy, random.Random(dummy_seed), cfg.key_prefix
    )
    return locked, locked.correct_key


# -- key application -----------------------------------------------------------


def _fold_constants(
    kind: GateKind, ins: list[str], vals: list[int | None]
) -> tuple[int | None, GateKind | None, list[str]]:
    """Partial-evaluate one gate. Returns (constant, kind, inputs): either
    a constant output, or a simplified gate."""
    if kind in (GateKind.AND, GateKind.NAND):
        flip = kind is GateKind.NAND
        if 0 in vals:
            return (1 if flip else 0), None, []
        rest = [i for i, v in zip(ins, vals) if v is None]
        if not rest:
            return (0 if flip else 1), None, []
        if len(rest) == 1:
            return None, (GateKind.NOT if flip else GateKind.BUFF), rest
        return None, kind, rest
    if kind in (GateKind.OR, GateKind.NOR):
        flip = kind is GateKind.NOR
        if 1 in vals:
            return (0 if flip else 1), None, []
        rest = [i for i, v in zip(ins, vals) if v is None]
        if not rest:
            return (1 if flip else 0), None, []
        if len(rest) == 1:
            return None, (GateKind.NOT if flip else GateKind.BUFF), rest
        return None, kind, rest
    if kind in (GateKind.XOR, GateKind.XNOR):
        parity = 1 if kind is GateKind.XNOR else 0
        rest = []
        for i, v in zip(ins, vals):
            if v is None:
                rest.append(i)
            else:
                parity ^= v
        if not rest:
            return parity, None, []
        if len(rest) == 1:
            return None, (GateKind.NOT if parity else GateKind.BUFF), rest
        return None, (GateKind.XNOR if parity else GateKind.XOR), rest
    if kind is GateKind.NOT:
        if vals[0] is None:
            return None, kind, ins
        return 1 - vals[0], None, []
    if kind is GateKind.BUFF:
        if vals[0] is None:
            return None, kind, ins
        return vals[0], None, []
    # MUX(select, in0, in1)
    s, a, b = vals
    if s is not None:
        pick = ins[2] if s else ins[1]
        v = vals[2] if s else vals[1]
        if v is not None:
            return v, None, []
        return None, GateKind.BUFF, [pick]
    if a is not None and b is not None:
        if a == b:
            return a, None, []
        # MUX(s, 0, 1) = s ; MUX(s, 1, 0) = NOT s
        return None, (GateKind.BUFF if b == 1 else GateKind.NOT), [ins[0]]
    return None, kind, list(ins)


def apply_key(
    locked: LockedNetlist | Netlist,
    key: Key | tuple[int, ...],
    key_inputs: list[str] | None = None,
    key_prefix: str = KEY_PREFIX,
) -> Netlist:
    """Substitute key constants and simplify, restoring the original
    PI/PO interface.

    XOR(x,0) folds to BUFF(x), XOR(x,1) to NOT(x), XNOR dually; a MUX with
    a constant select collapses to the selected input. General constant
    propagation handles key bits that feed other gate kinds (as imported
    locked files may do). A net forced constant is re-expressed inside the
    gate alphabet as XOR(x,x) / XNOR(x,x) over the first primary input.
    """
    if isinstance(locked, LockedNetlist):
        netlist = locked.netlist
        names = list(locked.key_inputs)
    else:
        netlist = locked
        names = key_inputs if key_inputs is not None else detect_key_inputs(
            netlist, key_prefix
        )
    bits = tuple(key)
    if len(bits) != len(names):
        raise LockError(
            f"key width {len(bits)} does not match {len(names)} key inputs"
        )

    const: dict[str, int] = dict(zip(names, bits))
    keyset = set(names)
    pis = [p for p in netlist.primary_inputs if p not in keyset]
    gates: list[Gate] = []
    for gate in netlist.topo_order():
        vals = [const.get(i) for i in gate.inputs]
        value, kind, ins = _fold_constants(gate.kind, list(gate.inputs), vals)
        if value is not None:
            const[gate.output] = value
        else:
            gates.append(Gate(gate.output, kind, ins))

    # materialize constant nets that something still reads
    needed = [n for n in const if n not in keyset]
    still_read = {i for g in gates for i in g.inputs} | set(netlist.primary_outputs)
    anchor = pis[0] if pis else None
    header: list[Gate] = []
    for net in needed:
        if net not in still_read:
            continue
        if anchor is None:
            raise LockError("cannot materialize a constant without any primary input")
        kind = GateKind.XNOR if const[net] else GateKind.XOR
        header.append(Gate(net, kind, (anchor, anchor)))

    result = Netlist(netlist.name, pis, netlist.primary_outputs, header + gates)
    diags = result.validate()
    if diags:
        raise LockError(f"applying the key broke the netlist: {'; '.join(diags)}")
    return result


def detect_key_inputs(netlist: Netlist, prefix: str = KEY_PREFIX) -> list[str]:
    """Key inputs among the PIs, by prefix convention.

    When every match is ``<prefix><number>`` they come back in numeric
    order (bit i of a key file belongs to ``<prefix><i>``); otherwise the
    PI order is kept.
    """
    found = [pi for pi in netlist.primary_inputs if pi.startswith(prefix)]
    suffixes = [pi[len(prefix):] for pi in found]
    if found and all(s.isdigit() for s in suffixes):
        return [pi for _, pi in sorted(zip((int(s) for s in suffixes), found))]
    return found


# -- key files ------------------------------------------------------------------


def emit_key_file(key: Key, comment: str | None = None) -> str:
    lines = [f"# {comment}"] if comment else []
    lines.append(f"# {len(key)} key bits, index 0 = {KEY_PREFIX}0")
    lines.append(key.to_string())
    return "\n".join(lines) + "\n"


def parse_key_file(text: str) -> Key:
    payload = [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if len(payload) != 1:
        raise LockError(
            f"key file must hold exactly one bit line, found {len(payload)}"
        )
    return Key.from_string(payload[0])
