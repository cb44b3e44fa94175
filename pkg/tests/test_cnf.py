import pytest

from benchlock.circuits import random_netlist
from benchlock.cnf import (
    CnfFormula,
    brute_force_status,
    emit_dimacs,
    model_satisfies,
    parse_dimacs,
    parse_dimacs_model,
    tseitin,
)
from benchlock.errors import CnfError
from benchlock.netlist import Gate, GateKind, Netlist, vector_assignment
from benchlock.solver import solve


def test_and_gate_block():
    n = Netlist("t", ["a", "b"], ["y"], [Gate("y", GateKind.AND, ("a", "b"))])
    cnf, varmap = tseitin(n)
    assert cnf.var_count == 3
    assert len(cnf.clauses) == 3
    assert set(varmap) == {"a", "b", "y"}


def test_not_gate_block():
    n = Netlist("t", ["a"], ["y"], [Gate("y", GateKind.NOT, ("a",))])
    cnf, _ = tseitin(n)
    assert cnf.var_count == 2
    assert len(cnf.clauses) == 2


def test_nary_xor_uses_aux_chain():
    n = Netlist("t", ["a", "b", "c"], ["y"], [Gate("y", GateKind.XOR, ("a", "b", "c"))])
    cnf, varmap = tseitin(n)
    assert cnf.var_count == 5  # 4 nets + 1 auxiliary
    assert len(cnf.clauses) == 8


@pytest.mark.parametrize("seed", range(25))
def test_models_match_simulation(seed):
    n = random_netlist(4, 6, seed=seed, with_mux=(seed % 3 == 0))
    cnf, varmap = tseitin(n)
    pis = n.primary_inputs
    for j in range(1 << len(pis)):
        x = vector_assignment(pis, j)
        assumptions = [
            varmap[pi] if bit else -varmap[pi] for pi, bit in x.items()
        ]
        outcome = solve(cnf, assumptions=assumptions)
        assert outcome.status == "sat"
        vals = n.net_values(x)
        for net, var in varmap.items():
            assert outcome.model[var] == vals[net], (net, j)


def test_cnf_satisfiable_for_every_pi_assignment():
    n = random_netlist(3, 5, seed=77)
    cnf, varmap = tseitin(n)
    assert brute_force_status(cnf) == "sat"


def test_emit_dimacs_single_clause():
    cnf = CnfFormula(var_count=1)
    cnf.add(1)
    assert emit_dimacs(cnf) == "p cnf 1 1\n1 0\n"


def test_dimacs_round_trip_preserves_clause_multiset():
    n = random_netlist(3, 6, seed=1)
    cnf, _ = tseitin(n)
    again = parse_dimacs(emit_dimacs(cnf))
    assert again.var_count == cnf.var_count
    assert sorted(map(sorted, again.clauses)) == sorted(map(sorted, cnf.clauses))


def test_parse_dimacs_rejects_garbage():
    with pytest.raises(CnfError):
        parse_dimacs("p cnf x y\n")
    with pytest.raises(CnfError):
        parse_dimacs("1 2 0\n")  # clause before header
    with pytest.raises(CnfError):
        parse_dimacs("p cnf 2 1\n1 2\n")  # missing terminator


def test_parse_model_lines():
    status, model = parse_dimacs_model("s SATISFIABLE\nv 1 -2 0\n")
    assert status == "sat"
    assert model == {1: 1, 2: 0}
    status, model = parse_dimacs_model("UNSAT\n")
    assert status == "unsat" and model == {}


def test_model_satisfies():
    cnf = CnfFormula(var_count=2)
    cnf.add(1, 2)
    cnf.add(-1, 2)
    assert model_satisfies(cnf, {1: 0, 2: 1})
    assert not model_satisfies(cnf, {1: 1, 2: 0})


def test_empty_clause_is_flagged():
    cnf = CnfFormula(var_count=1)
    cnf.add_clause([])
    assert cnf.has_empty_clause
    assert brute_force_status(cnf) == "unsat"
