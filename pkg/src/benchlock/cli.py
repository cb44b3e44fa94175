"""Command-line surface for the full lock/attack/verify pipeline.

Exit codes: 0 success, 1 operational failure (attack aborted, verify
mismatch, LLM gave up), 2 usage or input-parse errors. With --json-errors
a machine-readable error object goes to stderr instead of prose.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import datetime
import json
import sys
from pathlib import Path

from . import __version__
from .attack import Oracle, corruption_stats, sat_attack
from .bench import emit_bench, parse_bench
from .errors import (
    AttackError,
    BenchlockError,
    BenchParseError,
    CnfError,
    DialectError,
    DummyError,
    InterfaceError,
    LockError,
    SelectionError,
    StatError,
    StructuralError,
    TransportError,
    TruncationError,
    UnsupportedConstruct,
    ValidationFailed,
)
from .locking import LockConfig, emit_key_file, lock, parse_key_file
from .netlist import Netlist
from .report import finish_report, new_report, report_json
from .verify import functional_verify, structural_check
from .verilog import parse_verilog_subset

_USAGE_ERRORS = (
    BenchParseError,
    UnsupportedConstruct,
    StructuralError,
    DialectError,
    LockError,
    SelectionError,
    DummyError,
    CnfError,
    InterfaceError,
    AttackError,
    StatError,
    FileNotFoundError,
    IsADirectoryError,
    ValueError,
)
_OPERATIONAL_ERRORS = (ValidationFailed, TruncationError, TransportError)

_KEYGATE = {"xor": "xor_only", "mux": "mux_only", "mixed": "mixed"}
_SELECT = {
    "random": "random",
    "cone": "cone_size",
    "scoap": "scoap",
    "sll": "sll",
    "fan-heavy": "fan_heavy",
}
_DUMMY = {
    "constant": "constant",
    "pi": "primary_input",
    "other-cone": "other_cone_net",
    "random-fn": "random_function",
}
_PRESET = {"sat-hard": "sat_hard"}


def _read_netlist(path: str) -> Netlist:
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    if p.suffix == ".v":
        return parse_verilog_subset(text, name=p.stem)
    return parse_bench(text, name=p.stem)


def _lock_config(args: argparse.Namespace) -> LockConfig:
    return LockConfig(
        key_size=args.key_size,
        keygate_policy=_KEYGATE[args.keygate],
        xor_fraction=args.xor_fraction,
        selection=_SELECT[args.select],
        dummy_policy=_DUMMY[args.dummy],
        seed=args.seed,
        preset=_PRESET.get(args.preset) if args.preset else None,
        key_prefix=args.key_prefix,
    )


def _add_lock_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--key-size", type=int, required=True, help="number of key bits")
    p.add_argument("--keygate", choices=sorted(_KEYGATE), default="xor",
                   help="key-gate policy (default: xor)")
    p.add_argument("--xor-fraction", type=float, default=0.5,
                   help="XOR share under --keygate mixed (default: 0.5)")
    p.add_argument("--select", choices=list(_SELECT), default="random",
                   help="net selection strategy (default: random)")
    p.add_argument("--dummy", choices=list(_DUMMY), default="other-cone",
                   help="MUX dummy policy (default: other-cone)")
    p.add_argument("--preset", choices=list(_PRESET), default=None,
                   help="expand a named configuration preset")
    p.add_argument("--seed", type=int, default=0, help="PRNG seed (default: 0)")
    p.add_argument("--key-prefix", default="keyinput",
                   help="key input name prefix (default: keyinput)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="benchlock",
        description="Lock, attack and verify combinational .bench netlists.",
    )
    parser.add_argument("--version", action="version", version=f"benchlock {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--json-errors", action="store_true",
                       help="emit errors as a JSON object on stderr")
        return p

    p = add("convert", "structural Verilog subset -> canonical .bench")
    p.add_argument("--input", required=True, help="input .v file")
    p.add_argument("--output", required=True, help="output .bench file")

    p = add("lock", "insert key gates into a .bench netlist")
    p.add_argument("--input", required=True, help="input .bench file")
    _add_lock_flags(p)
    p.add_argument("--output", required=True, help="locked .bench output")
    p.add_argument("--key-out", required=True, help="correct-key output file")

    p = add("attack", "oracle-guided SAT attack on a locked .bench file")
    p.add_argument("--locked", required=True, help="locked .bench file")
    p.add_argument("--oracle", required=True, help="original .bench file (oracle)")
    p.add_argument("--key-prefix", default="keyinput",
                   help="key input name prefix (default: keyinput)")
    p.add_argument("--timeout-ms", type=float, default=300_000.0,
                   help="attack time budget (default: 300000)")
    p.add_argument("--iteration-cap", type=int, default=None,
                   help="DIP cap (default: 2^min(k,20))")
    p.add_argument("--report", default=None, help="write a JSON report here")

    p = add("verify", "check a locked file against the original under a key")
    p.add_argument("--locked", required=True)
    p.add_argument("--original", required=True)
    p.add_argument("--key", required=True, help="key file")
    p.add_argument("--mode", choices=("auto", "exhaustive", "sat"), default="auto")
    p.add_argument("--key-prefix", default="keyinput")

    p = add("corrupt", "sampled wrong-key output corruption")
    p.add_argument("--locked", required=True)
    p.add_argument("--original", required=True)
    p.add_argument("--key", required=True, help="correct-key file")
    p.add_argument("--wrong-keys", type=int, default=100)
    p.add_argument("--inputs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--key-prefix", default="keyinput")

    p = add("llm-lock", "lock via a chat-completion endpoint, with validation")
    p.add_argument("--input", required=True, help=".v or .bench input")
    _add_lock_flags(p)
    p.add_argument("--endpoint", required=True, help="chat-completion URL")
    p.add_argument("--model", default="", help="model identifier")
    p.add_argument("--fallback", choices=("on", "off"), default="on",
                   help="deterministic fallback after failed retries")
    p.add_argument("--retries", type=int, default=2, help="validation retries")
    p.add_argument("--output", default=None, help="locked .bench output")
    p.add_argument("--key-out", default=None, help="correct-key output file")
    p.add_argument("--report", default=None, help="write a JSON report here")

    p = add("pipeline", "convert -> lock -> verify -> attack -> report")
    p.add_argument("--input", required=True, nargs="+",
                   help="input file(s), .v or .bench")
    _add_lock_flags(p)
    p.add_argument("--timeout-ms", type=float, default=300_000.0)
    p.add_argument("--iteration-cap", type=int, default=None)
    p.add_argument("--wrong-keys", type=int, default=0,
                   help="also sample corruption with this many wrong keys")
    p.add_argument("--inputs", type=int, default=100,
                   help="input samples for corruption (default: 100)")
    p.add_argument("--report", default=None,
                   help="report path (single input) or directory (batch)")
    p.add_argument("--run-dir", default=None,
                   help="create a <timestamp>_s<seed> run directory here")
    p.add_argument("--output", default=None, help="locked .bench output path")
    p.add_argument("--key-out", default=None, help="key file output path")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers in batch mode (default: 1)")

    return parser


# -- subcommands -------------------------------------------------------------------


def _cmd_convert(args) -> int:
    netlist = parse_verilog_subset(
        Path(args.input).read_text(encoding="utf-8"), name=Path(args.input).stem
    )
    Path(args.output).write_text(emit_bench(netlist), encoding="utf-8")
    st = netlist.stats()
    print(f"{netlist.name}: {st.n_inputs} inputs, {st.n_outputs} outputs, "
          f"{st.n_gates} gates -> {args.output}")
    return 0


def _cmd_lock(args) -> int:
    netlist = _read_netlist(args.input)
    locked, key = lock(netlist, _lock_config(args))
    Path(args.output).write_text(emit_bench(locked.netlist), encoding="utf-8")
    Path(args.key_out).write_text(
        emit_key_file(key, comment=f"{netlist.name} seed={args.seed}"),
        encoding="utf-8",
    )
    print(f"locked {netlist.name} with {len(key)} key bits -> {args.output}")
    return 0


def _cmd_attack(args) -> int:
    locked = _read_netlist(args.locked)
    original = _read_netlist(args.oracle)
    oracle = Oracle(original)
    result = sat_attack(
        locked,
        oracle,
        timeout_ms=args.timeout_ms,
        iteration_cap=args.iteration_cap,
        key_prefix=args.key_prefix,
    )
    if args.report:
        report = new_report(circuit=original.name)
        report["stats_before"] = original.stats().as_dict()
        report["stats_after"] = locked.stats().as_dict()
        report["attack"] = result.as_dict()
        Path(args.report).write_text(report_json(finish_report(report)),
                                     encoding="utf-8")
    print(f"attack: {result.status} after {result.iterations} iterations "
          f"({result.elapsed_ms:.0f} ms)")
    if result.status == "key_recovered":
        print(f"key: {result.recovered_key.to_string()}")
        return 0
    return 1


def _cmd_verify(args) -> int:
    locked = _read_netlist(args.locked)
    original = _read_netlist(args.original)
    key = parse_key_file(Path(args.key).read_text(encoding="utf-8"))
    verdict = functional_verify(
        locked, original, key, mode=args.mode, key_prefix=args.key_prefix
    )
    for diag in verdict.structural_diagnostics:
        print(f"structural: {diag}")
    print(f"structural: {'ok' if verdict.structural_ok else 'FAILED'}")
    print(f"functional: {verdict.functional} (mode: {verdict.mode_used})")
    if verdict.counterexample:
        print(f"counterexample: {verdict.counterexample}")
    return 0 if verdict.functional == "equivalent" else 1


def _cmd_corrupt(args) -> int:
    locked = _read_netlist(args.locked)
    original = _read_netlist(args.original)
    key = parse_key_file(Path(args.key).read_text(encoding="utf-8"))
    stats = corruption_stats(
        locked,
        Oracle(original),
        key,
        wrong_keys=args.wrong_keys,
        inputs=args.inputs,
        seed=args.seed,
        key_prefix=args.key_prefix,
    )
    print(json.dumps(stats.as_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_llm_lock(args) -> int:
    from .llm import HttpTransport, llm_convert, llm_obfuscate

    transport = HttpTransport(args.endpoint)
    fallback = args.fallback == "on"
    path = Path(args.input)
    records = []
    if path.suffix == ".v":
        netlist, record = llm_convert(
            transport,
            path.read_text(encoding="utf-8"),
            model=args.model,
            validation_retries=args.retries,
            fallback=fallback,
        )
        records.append(record)
    else:
        netlist = _read_netlist(args.input)
    locked, record = llm_obfuscate(
        transport,
        netlist,
        _lock_config(args),
        model=args.model,
        validation_retries=args.retries,
        fallback=fallback,
    )
    records.append(record)

    if args.output:
        Path(args.output).write_text(emit_bench(locked.netlist), encoding="utf-8")
    if args.key_out:
        Path(args.key_out).write_text(
            emit_key_file(locked.correct_key, comment=f"{netlist.name} (llm-lock)"),
            encoding="utf-8",
        )
    if args.report:
        report = new_report(circuit=netlist.name, config=_lock_config(args).as_dict())
        report["stats_before"] = netlist.stats().as_dict()
        report["stats_after"] = locked.netlist.stats().as_dict()
        report["llm_run"] = record.as_dict()
        Path(args.report).write_text(report_json(finish_report(report)),
                                     encoding="utf-8")
        transcript_path = Path(args.report).with_suffix(".transcript.json")
        transcript_path.write_text(
            json.dumps([r.as_dict() for r in records], indent=2), encoding="utf-8"
        )
    print(f"llm-lock: source={record.final_source}, "
          f"{len(locked.key_inputs)} key bits")
    return 0


def _pipeline_one(
    input_path: str,
    args: argparse.Namespace,
    report_path: Path | None,
    output_path: Path | None,
    key_path: Path | None,
) -> tuple[str, int, str]:
    netlist = _read_netlist(input_path)
    config = _lock_config(args)
    report = new_report(circuit=netlist.name, config=config.as_dict())
    report["stats_before"] = netlist.stats().as_dict()

    locked, key = lock(netlist, config)
    report["stats_after"] = locked.netlist.stats().as_dict()
    diags = structural_check(locked, netlist)
    report["structural"] = {"ok": not diags, "diagnostics": diags}

    verdict = functional_verify(locked, netlist, key)
    report["functional"] = verdict.as_dict()

    result = sat_attack(
        locked,
        Oracle(netlist),
        timeout_ms=args.timeout_ms,
        iteration_cap=args.iteration_cap,
        key_prefix=args.key_prefix,
    )
    report["attack"] = result.as_dict()

    if args.wrong_keys > 0:
        report["corruption"] = corruption_stats(
            locked,
            Oracle(netlist),
            key,
            wrong_keys=args.wrong_keys,
            inputs=args.inputs,
            seed=args.seed,
        ).as_dict()

    if output_path:
        output_path.write_text(emit_bench(locked.netlist), encoding="utf-8")
    if key_path:
        key_path.write_text(
            emit_key_file(key, comment=f"{netlist.name} seed={args.seed}"),
            encoding="utf-8",
        )
    if report_path:
        report_path.write_text(report_json(finish_report(report)), encoding="utf-8")

    ok = verdict.functional == "equivalent" and result.status == "key_recovered"
    summary = (
        f"{netlist.name}: verify={verdict.functional}, attack={result.status} "
        f"({result.iterations} DIPs)"
    )
    return netlist.name, 0 if ok else 1, summary


def _cmd_pipeline(args) -> int:
    inputs = args.input
    run_dir = None
    if args.run_dir:
        stamp = datetime.datetime.now().strftime("%Y%m%d-%H%M%S")
        run_dir = Path(args.run_dir) / f"{stamp}_s{args.seed}"
        run_dir.mkdir(parents=True, exist_ok=True)

    def paths_for(input_path: str):
        stem = Path(input_path).stem
        if run_dir is not None:
            return (
                run_dir / f"{stem}.report.json",
                run_dir / f"{stem}.locked.bench",
                run_dir / f"{stem}.key",
            )
        if len(inputs) == 1:
            report = Path(args.report) if args.report else None
            output = Path(args.output) if args.output else None
            key_out = Path(args.key_out) if args.key_out else None
            return report, output, key_out
        base = Path(args.report) if args.report else Path(".")
        base.mkdir(parents=True, exist_ok=True)
        return (
            base / f"{stem}.report.json",
            base / f"{stem}.locked.bench",
            base / f"{stem}.key",
        )

    jobs = []
    for input_path in inputs:
        report_path, output_path, key_path = paths_for(input_path)
        jobs.append((input_path, report_path, output_path, key_path))

    worst = 0
    if args.jobs > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [
                pool.submit(_pipeline_one, ip, args, rp, op, kp)
                for ip, rp, op, kp in jobs
            ]
            for fut in futures:
                _, code, summary = fut.result()
                print(summary)
                worst = max(worst, code)
    else:
        for ip, rp, op, kp in jobs:
            _, code, summary = _pipeline_one(ip, args, rp, op, kp)
            print(summary)
            worst = max(worst, code)
    return worst


_COMMANDS = {
    "convert": _cmd_convert,
    "lock": _cmd_lock,
    "attack": _cmd_attack,
    "verify": _cmd_verify,
    "corrupt": _cmd_corrupt,
    "llm-lock": _cmd_llm_lock,
    "pipeline": _cmd_pipeline,
}


def _emit_error(exc: Exception, as_json: bool) -> None:
    if as_json:
        obj = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        print(json.dumps(obj), file=sys.stderr)
    else:
        print(f"benchlock: error: {exc}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    as_json = getattr(args, "json_errors", False)
    try:
        return _COMMANDS[args.command](args)
    except _OPERATIONAL_ERRORS as exc:
        _emit_error(exc, as_json)
        return 1
    except _USAGE_ERRORS as exc:
        _emit_error(exc, as_json)
        return 2
    except BenchlockError as exc:
        _emit_error(exc, as_json)
        return 1


if __name__ == "__main__":
    sys.exit(main())
