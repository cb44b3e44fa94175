import itertools

import pytest

from benchlock.bench import parse_bench
from benchlock.errors import StructuralError, UnsupportedConstruct
from benchlock.netlist import GateKind
from benchlock.verilog import parse_verilog_subset

NAND_MODULE = """module m(a, b, y);
input a, b;
output y;
nand g(y, a, b);
endmodule
"""


def test_single_nand_matches_bench_equivalent():
    v = parse_verilog_subset(NAND_MODULE)
    b = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = NAND(a, b)")
    assert v.structurally_equal(b)


def test_four_input_nand_stays_one_gate():
    text = """module m(a, b, c, d, y);
    input a, b, c, d;
    output y;
    nand g1(y, a, b, c, d);
    endmodule
    """
    n = parse_verilog_subset(text)
    assert len(n.gates) == 1
    assert n.gates[0].kind is GateKind.NAND
    assert n.gates[0].inputs == ("a", "b", "c", "d")


def test_always_block_rejected_with_location():
    text = "module m(q, d, clk);\ninput d, clk;\noutput q;\nalways @(posedge clk) q <= d;\nendmodule\n"
    with pytest.raises(UnsupportedConstruct, match="always"):
        parse_verilog_subset(text)


def test_assign_with_operators_rejected():
    text = "module m(a, b, y);\ninput a, b;\noutput y;\nassign y = a & b;\nendmodule\n"
    with pytest.raises(UnsupportedConstruct, match="assign"):
        parse_verilog_subset(text)


def test_assign_alias_becomes_buff():
    text = "module m(a, y);\ninput a;\noutput y;\nassign y = a;\nendmodule\n"
    n = parse_verilog_subset(text)
    assert n.gates[0].kind is GateKind.BUFF


def test_buses_rejected():
    text = "module m(a, y);\ninput [3:0] a;\noutput y;\nnot g(y, a);\nendmodule\n"
    with pytest.raises(UnsupportedConstruct, match="bus"):
        parse_verilog_subset(text)


def test_multiple_modules_rejected():
    text = "module a(); endmodule\nmodule b(); endmodule\n"
    with pytest.raises(UnsupportedConstruct, match="single module"):
        parse_verilog_subset(text)


def test_instance_names_optional_and_lists_supported():
    ok = """module m(a, b, y, z);
    input a, b;
    output y, z;
    wire w;
    and (w, a, b);
    not g1(y, w), g2(z, a);
    endmodule
    """
    n = parse_verilog_subset(ok)
    assert {g.output: g.kind for g in n.gates} == {
        "w": GateKind.AND,
        "y": GateKind.NOT,
        "z": GateKind.NOT,
    }


def test_comments_stripped_with_line_numbers_kept():
    text = """// header
module m(a, y); /* ports */
input a;
output y;
always @(a) y = a;
endmodule
"""
    with pytest.raises(UnsupportedConstruct) as exc:
        parse_verilog_subset(text)
    assert exc.value.line == 5


def test_undriven_output_is_structural_error():
    text = "module m(a, y);\ninput a;\noutput y;\nendmodule\n"
    with pytest.raises(StructuralError):
        parse_verilog_subset(text)


def test_cross_format_simulation_consistency():
    verilog = """module fa(a, b, cin, sum, cout);
    input a, b, cin;
    output sum, cout;
    wire axb, ab, cx;
    xor g1(axb, a, b);
    xor g2(sum, axb, cin);
    and g3(ab, a, b);
    and g4(cx, axb, cin);
    or g5(cout, ab, cx);
    endmodule
    """
    bench = """INPUT(a)
INPUT(b)
INPUT(cin)
OUTPUT(sum)
OUTPUT(cout)
axb = XOR(a, b)
sum = XOR(axb, cin)
ab = AND(a, b)
cx = AND(axb, cin)
cout = OR(ab, cx)
"""
    v = parse_verilog_subset(verilog)
    b = parse_bench(bench)
    for bits in itertools.product((0, 1), repeat=3):
        x = dict(zip(("a", "b", "cin"), bits))
        assert v.simulate(x) == b.simulate(x)
