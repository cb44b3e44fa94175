import pytest

from benchlock.circuits import c17, not_chain
from benchlock.errors import StructuralError
from benchlock.netlist import Gate, GateKind, Netlist
from benchlock.scoap import UNOBSERVABLE, scoap


def test_primary_input_base_cases():
    n = Netlist("t", ["a"], ["a"], [])
    m = scoap(n)
    assert m.cc0["a"] == 1 and m.cc1["a"] == 1
    assert m.co["a"] == 0  # PI that is also a PO


def test_and_gate_controllability():
    n = Netlist("t", ["a", "b"], ["y"], [Gate("y", GateKind.AND, ("a", "b"))])
    m = scoap(n)
    assert m.cc1["y"] == 1 + 1 + 1  # sum of input cc1 plus one
    assert m.cc0["y"] == 1 + 1  # min of input cc0 plus one


def test_not_gate_swaps_controllability():
    n = Netlist("t", ["a"], ["y"], [Gate("y", GateKind.NOT, ("a",))])
    m = scoap(n)
    assert m.cc0["y"] == 2 and m.cc1["y"] == 2


def test_nand_nor_duality():
    n = Netlist(
        "t",
        ["a", "b"],
        ["y", "z"],
        [Gate("y", GateKind.NAND, ("a", "b")), Gate("z", GateKind.NOR, ("a", "b"))],
    )
    m = scoap(n)
    assert m.cc0["y"] == 3 and m.cc1["y"] == 2
    assert m.cc1["z"] == 3 and m.cc0["z"] == 2


def test_xor2_min_over_satisfying_combinations():
    n = Netlist("t", ["a", "b"], ["y"], [Gate("y", GateKind.XOR, ("a", "b"))])
    m = scoap(n)
    assert m.cc1["y"] == 3
    assert m.cc0["y"] == 3


def test_observability_through_and_side_inputs():
    # y = AND(a, b), y is PO: co(a) = co(y) + cc1(b) + 1 = 0 + 1 + 1
    n = Netlist("t", ["a", "b"], ["y"], [Gate("y", GateKind.AND, ("a", "b"))])
    m = scoap(n)
    assert m.co["y"] == 0
    assert m.co["a"] == 2 and m.co["b"] == 2


def test_co_is_min_over_load_positions():
    gates = [
        Gate("u", GateKind.NOT, ("a",)),
        Gate("v", GateKind.AND, ("a", "b")),
    ]
    n = Netlist("t", ["a", "b"], ["u", "v"], gates)
    m = scoap(n)
    # via NOT: 0 + 0 + 1; via AND: 0 + cc1(b) + 1 = 2
    assert m.co["a"] == 1


def test_unobservable_net_gets_sentinel():
    gates = [Gate("dead", GateKind.NOT, ("a",)), Gate("y", GateKind.NOT, ("a",))]
    n = Netlist("t", ["a"], ["y"], gates)
    m = scoap(n)
    assert m.co["dead"] == UNOBSERVABLE


def test_monotone_along_chains():
    n = not_chain(8)
    m = scoap(n)
    order = ["a"] + [f"n{j}" for j in range(8)]
    for prev, cur in zip(order, order[1:]):
        assert m.cc0[cur] > m.cc0[prev] or m.cc1[cur] > m.cc1[prev]
        assert m.co[prev] > m.co[cur]  # observability grows away from the PO


def test_c17_values_finite_and_positive():
    m = scoap(c17())
    for v in m.cc0.values():
        assert 1 <= v < UNOBSERVABLE
    for v in m.co.values():
        assert 0 <= v < UNOBSERVABLE


def test_nary_xor_lowered_to_tree():
    n = Netlist("t", ["a", "b", "c"], ["y"], [Gate("y", GateKind.XOR, ("a", "b", "c"))])
    m = scoap(n)
    # two levels of XOR2: the root combine adds one on top of the inner pair
    assert m.cc0["y"] == 5 and m.cc1["y"] == 5


def test_mux_metrics_via_lowering():
    n = Netlist(
        "t", ["s", "a", "b"], ["y"], [Gate("y", GateKind.MUX, ("s", "a", "b"))]
    )
    m = scoap(n)
    assert m.cc0["y"] >= 2 and m.cc1["y"] >= 2
    assert m.co["s"] < UNOBSERVABLE


def test_scoap_requires_valid_netlist():
    bad = Netlist("t", [], ["x"], [Gate("x", GateKind.NOT, ("x",))])
    with pytest.raises(StructuralError):
        scoap(bad)
