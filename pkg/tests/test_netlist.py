import itertools

import pytest

from benchlock.circuits import c17, random_netlist
from benchlock.errors import StructuralError, UnknownNet
from benchlock.netlist import (
    Gate,
    GateKind,
    Netlist,
    truth_tables,
    vector_assignment,
)


def net(gates, pis, pos, name="t"):
    return Netlist(name, pis, pos, gates)


# -- validate -----------------------------------------------------------------


def test_minimal_valid_netlist():
    n = net([Gate("y", GateKind.NAND, ("a", "b"))], ["a", "b"], ["y"])
    assert n.validate() == []


def test_self_loop_is_a_cycle():
    n = net([Gate("x", GateKind.NOT, ("x",))], [], ["x"])
    diags = n.validate()
    assert any("cycle" in d and "'x'" in d for d in diags)


def test_multi_driver_diagnostic():
    gates = [
        Gate("n1", GateKind.AND, ("a", "b")),
        Gate("n1", GateKind.OR, ("a", "b")),
    ]
    diags = net(gates, ["a", "b"], ["n1"]).validate()
    assert any("multi-driver" in d and "'n1'" in d for d in diags)


def test_arity_and_undriven_diagnostics():
    gates = [
        Gate("y", GateKind.NOT, ("a", "b")),
        Gate("z", GateKind.AND, ("a", "ghost")),
    ]
    diags = net(gates, ["a", "b"], ["y"]).validate()
    assert any("bad arity" in d and "'y'" in d for d in diags)
    assert any("undriven" in d and "'ghost'" in d for d in diags)


def test_missing_output_diagnostic():
    diags = net([], ["a"], ["nope"]).validate()
    assert any("'nope'" in d for d in diags)


def test_bad_net_name_diagnostic():
    diags = net([], ["a b"], ["a b"]).validate()
    assert any("bad net name" in d for d in diags)


# -- topo_order -----------------------------------------------------------------


def test_topo_chain_order():
    g1 = Gate("n1", GateKind.NOT, ("a",))
    g2 = Gate("y", GateKind.NOT, ("n1",))
    assert net([g2, g1], ["a"], ["y"]).topo_order() == (g1, g2)


def test_topo_c17_respects_drivers():
    c = c17()
    order = c.topo_order()
    seen = set(c.primary_inputs)
    for gate in order:
        assert all(i in seen for i in gate.inputs)
        seen.add(gate.output)
    assert len(order) == 6


def test_topo_preserves_topological_input_verbatim():
    c = c17()
    assert c.topo_order() == c.gates
    shuffled = Netlist(c.name, c.primary_inputs, c.primary_outputs,
                       c.gates[::-1])
    reordered = shuffled.topo_order()
    assert {g.output for g in reordered} == {g.output for g in c.gates}


def test_topo_raises_on_cycle():
    gates = [
        Gate("p", GateKind.NOT, ("q",)),
        Gate("q", GateKind.NOT, ("p",)),
    ]
    with pytest.raises(StructuralError):
        net(gates, [], ["p"]).topo_order()


# -- simulate ---------------------------------------------------------------------


def test_simulate_nand():
    n = net([Gate("y", GateKind.NAND, ("a", "b"))], ["a", "b"], ["y"])
    assert n.simulate({"a": 1, "b": 1}) == {"y": 0}
    assert n.simulate({"a": 0, "b": 1}) == {"y": 1}


def test_simulate_c17_all_zero():
    c = c17()
    out = c.simulate({pi: 0 for pi in c.primary_inputs})
    assert out == {"G22": 0, "G23": 0}


def test_simulate_mux_selector():
    n = net([Gate("y", GateKind.MUX, ("s", "a", "b"))], ["s", "a", "b"], ["y"])
    assert n.simulate({"s": 1, "a": 0, "b": 1}) == {"y": 1}
    assert n.simulate({"s": 0, "a": 0, "b": 1}) == {"y": 0}


def test_simulate_nary_xor_is_parity():
    n = net([Gate("y", GateKind.XOR, ("a", "b", "c"))], ["a", "b", "c"], ["y"])
    m = net([Gate("y", GateKind.XNOR, ("a", "b", "c"))], ["a", "b", "c"], ["y"])
    for bits in itertools.product((0, 1), repeat=3):
        x = dict(zip("abc", bits))
        assert n.simulate(x)["y"] == sum(bits) % 2
        assert m.simulate(x)["y"] == 1 - sum(bits) % 2


def test_simulate_missing_input_names_the_pi():
    n = net([Gate("y", GateKind.NOT, ("a",))], ["a"], ["y"])
    with pytest.raises(UnknownNet, match="'a'"):
        n.simulate({})


def test_simulate_deterministic_across_gate_orders():
    c = c17()
    shuffled = Netlist(c.name, c.primary_inputs, c.primary_outputs, c.gates[::-1])
    for j in range(32):
        x = vector_assignment(c.primary_inputs, j)
        assert c.simulate(x) == shuffled.simulate(x)


# -- cones / fanout -----------------------------------------------------------------


def test_tfi_tfo_single_gate():
    n = net([Gate("y", GateKind.AND, ("a", "b"))], ["a", "b"], ["y"])
    assert n.tfi("y") == {"a", "b"}
    assert n.tfo("a") == {"y"}
    assert n.tfi("a") == set()


def test_unloaded_pi_has_empty_cones():
    n = net([], ["a"], ["a"])
    assert n.tfi("a") == set()
    assert n.tfo("a") == set()
    assert n.fanout_count("a") == 1  # the PO slot


def test_c17_tfo_of_g11():
    assert c17().tfo("G11") == {"G16", "G19", "G22", "G23"}


def test_unknown_net_raises():
    c = c17()
    with pytest.raises(UnknownNet):
        c.tfi("nope")
    with pytest.raises(UnknownNet):
        c.fanout_count("nope")


def test_cone_duality_exhaustive():
    n = random_netlist(4, 12, seed=5)
    for a in n.nets:
        for b in n.nets:
            assert (b in n.tfi(a)) == (a in n.tfo(b))


def test_fanout_counts():
    gates = [
        Gate("u", GateKind.NOT, ("a",)),
        Gate("v", GateKind.NOT, ("a",)),
    ]
    n = net(gates, ["a", "b"], ["a", "u"])
    assert n.fanout_count("b") == 0
    assert n.fanout_count("a") == 3  # two gate reads plus one PO slot


def test_c17_fanout_of_g16():
    assert c17().fanout_count("G16") == 2


# -- stats ---------------------------------------------------------------------------


def test_stats_wire_only_netlist():
    st = net([], ["a"], ["a"]).stats()
    assert (st.n_inputs, st.n_outputs, st.n_gates, dict(st.by_kind)) == (1, 1, 0, {})


def test_stats_c17():
    st = c17().stats()
    assert (st.n_inputs, st.n_outputs, st.n_gates) == (5, 2, 6)
    assert dict(st.by_kind) == {"NAND": 6}


# -- truth tables ------------------------------------------------------------------------


def test_truth_tables_match_simulation():
    n = random_netlist(4, 10, seed=9, with_mux=True)
    tabs = truth_tables(n)
    for j in range(16):
        x = vector_assignment(n.primary_inputs, j)
        vals = n.net_values(x)
        for name, mask in tabs.items():
            assert (mask >> j) & 1 == vals[name], (name, j)


def test_truth_tables_extra_pins_inputs():
    n = net([Gate("y", GateKind.AND, ("a", "b"))], ["a", "b"], ["y"])
    tabs = truth_tables(n, input_order=["a"], extra={"b": 1})
    assert tabs["y"] == tabs["a"]


def test_truth_tables_refuses_too_many_inputs():
    n = Netlist("wide", [f"i{k}" for k in range(29)], ["i0"], [])
    with pytest.raises(ValueError, match="exhaustive"):
        truth_tables(n)


# -- structural equality ---------------------------------------------------------------


def test_structural_equality_ignores_gate_order():
    c = c17()
    r = Netlist(c.name, c.primary_inputs, c.primary_outputs, c.gates[::-1])
    assert c.structurally_equal(r)
    other = Netlist(c.name, c.primary_inputs, ("G22",), c.gates)
    assert not c.structurally_equal(other)


def test_acyclic_iff_topo_succeeds():
    for seed in range(10):
        n = random_netlist(3, 8, seed=seed)
        assert n.validate() == []
        n.topo_order()
