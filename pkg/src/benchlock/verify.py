"""Post-obfuscation validation: structural interface checks and functional
verification with selectable exhaustive/SAT modes.

A locked design must keep the original primary outputs, keep the original
primary inputs, and add exactly the key inputs on top; functionally it
must match the original on every input once the correct key is applied.
"""

from __future__ import annotations

from dataclasses import dataclass

from .attack import equivalence_check
from .errors import LockError
from .locking import (
    KEY_PREFIX,
    Key,
    LockedNetlist,
    apply_key,
    detect_key_inputs,
)
from .netlist import Netlist, truth_tables, vector_assignment

AUTO_EXHAUSTIVE_LIMIT = 16  # <= 65,536 vectors stays exhaustive in auto mode
EXHAUSTIVE_HARD_LIMIT = 28


@dataclass(frozen=True)
class Verdict:
    structural_ok: bool
    structural_diagnostics: tuple[str, ...]
    functional: str  # equivalent | mismatch | skipped
    mode_used: str | None  # exhaustive | sat | None
    counterexample: dict[str, int] | None = None
    skip_reason: str | None = None

    def as_dict(self) -> dict:
        return {
            "structural_ok": self.structural_ok,
            "structural_diagnostics": list(self.structural_diagnostics),
            "functional": self.functional,
            "mode_used": self.mode_used,
            "counterexample": self.counterexample,
            "skip_reason": self.skip_reason,
        }


def _resolve(locked, key_inputs, key_prefix):
    if isinstance(locked, LockedNetlist):
        return locked.netlist, list(locked.key_inputs)
    if key_inputs is None:
        key_inputs = detect_key_inputs(locked, key_prefix)
    return locked, list(key_inputs)


def structural_check(
    locked: LockedNetlist | Netlist,
    original: Netlist,
    key_inputs: list[str] | None = None,
    key_prefix: str = KEY_PREFIX,
) -> list[str]:
    """Interface diagnostics; empty list means the shape is right."""
    netlist, keys = _resolve(locked, key_inputs, key_prefix)
    diags: list[str] = []

    expected = len(original.primary_inputs) + len(keys)
    if len(netlist.primary_inputs) != expected:
        diags.append(
            f"input count: locked has {len(netlist.primary_inputs)}, "
            f"expected {len(original.primary_inputs)} + {len(keys)} key inputs"
        )
    missing_pi = set(original.primary_inputs) - set(netlist.primary_inputs)
    if missing_pi:
        diags.append(
            f"original primary inputs missing: {', '.join(sorted(missing_pi))}"
        )
    for k in keys:
        if not k.startswith(key_prefix):
            diags.append(f"key input '{k}' lacks the '{key_prefix}' prefix")

    locked_pos, orig_pos = set(netlist.primary_outputs), set(original.primary_outputs)
    for po in sorted(orig_pos - locked_pos):
        diags.append(f"primary output missing: '{po}'")
    for po in sorted(locked_pos - orig_pos):
        diags.append(f"unexpected primary output: '{po}'")
    return diags


def functional_verify(
    locked: LockedNetlist | Netlist,
    original: Netlist,
    key: Key | tuple[int, ...],
    mode: str = "auto",
    key_inputs: list[str] | None = None,
    key_prefix: str = KEY_PREFIX,
) -> Verdict:
    """Check that the locked design under ``key`` matches the original.

    auto picks exhaustive enumeration up to AUTO_EXHAUSTIVE_LIMIT primary
    inputs and a SAT miter beyond; exhaustive can be forced up to
    EXHAUSTIVE_HARD_LIMIT inputs.
    """
    if mode not in ("auto", "exhaustive", "sat"):
        raise ValueError(f"unknown verify mode: {mode!r}")
    netlist, keys = _resolve(locked, key_inputs, key_prefix)
    bits = tuple(key)
    if len(bits) != len(keys):
        raise LockError(
            f"key width {len(bits)} does not match {len(keys)} key inputs"
        )

    diags = structural_check(netlist, original, keys, key_prefix)
    if diags:
        return Verdict(
            structural_ok=False,
            structural_diagnostics=tuple(diags),
            functional="skipped",
            mode_used=None,
            skip_reason="structural check failed",
        )

    n = len(original.primary_inputs)
    if mode == "auto":
        mode = "exhaustive" if n <= AUTO_EXHAUSTIVE_LIMIT else "sat"
    if mode == "exhaustive" and n > EXHAUSTIVE_HARD_LIMIT:
        raise ValueError(
            f"exhaustive mode refused for {n} inputs "
            f"(limit {EXHAUSTIVE_HARD_LIMIT}); use mode='sat'"
        )

    applied = apply_key(netlist, bits, key_inputs=keys)

    if mode == "exhaustive":
        order = original.primary_inputs
        tab_a = truth_tables(applied, order)
        tab_b = truth_tables(original, order)
        for po in original.primary_outputs:
            delta = tab_a[po] ^ tab_b[po]
            if delta:
                j = (delta & -delta).bit_length() - 1
                ctrex = vector_assignment(order, j)
                assert applied.simulate(ctrex) != original.simulate(ctrex)
                return Verdict(
                    True, (), "mismatch", "exhaustive", counterexample=ctrex
                )
        return Verdict(True, (), "equivalent", "exhaustive")

    res = equivalence_check(applied, original)
    if res.equivalent:
        return Verdict(True, (), "equivalent", "sat")
    return Verdict(True, (), "mismatch", "sat", counterexample=res.counterexample)
