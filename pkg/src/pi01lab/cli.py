"""Command-line front end: construction drivers, snapshot I/O, DOT export,
and the invariant check runner.

Runs are reproducible byte for byte: every output directory carries its
full configuration, all orderings are canonical, nothing is timestamped,
and large snapshots gzip with a zeroed modification time.  Exit codes:
0 success, 1 invariant violation (or failed run), 2 usage error.
"""

from __future__ import annotations

import argparse
import gzip
import json
import logging
import os
import sys
from pathlib import Path

from . import chain as chain_mod
from . import cone as cone_mod
from . import thm2 as thm2_mod
from .machine import (
    Registry,
    assemble,
    disassemble,
    program_code,
    program_from_code,
)
from .strings import Alphabet, FinString, bits
from .trees import NodeStatus, StagedTree
from . import verify

log = logging.getLogger("pi01lab")

GZIP_THRESHOLD = 1 << 20


# -- deterministic file I/O ---------------------------------------------------


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_json(path: Path, obj) -> Path:
    """Write JSON, gzip-compressed (deterministically) above 1 MiB."""
    data = dumps(obj).encode()
    if len(data) > GZIP_THRESHOLD:
        target = path.with_name(path.name + ".gz")
        with open(target, "wb") as fh:
            with gzip.GzipFile(filename="", mode="wb", fileobj=fh, mtime=0) as gz:
                gz.write(data)
        return target
    path.write_bytes(data)
    return path


def write_jsonl(path: Path, objs: list) -> Path:
    data = "".join(dumps(o) + "\n" for o in objs).encode()
    if len(data) > GZIP_THRESHOLD:
        target = path.with_name(path.name + ".gz")
        with open(target, "wb") as fh:
            with gzip.GzipFile(filename="", mode="wb", fileobj=fh, mtime=0) as gz:
                gz.write(data)
        return target
    path.write_bytes(data)
    return path


def read_bytes(path: Path) -> bytes:
    if path.exists():
        return path.read_bytes()
    gz = path.with_name(path.name + ".gz")
    if gz.exists():
        with gzip.open(gz, "rb") as fh:
            return fh.read()
    raise FileNotFoundError(f"neither {path} nor {gz} exists")


def read_json(path: Path):
    return json.loads(read_bytes(path).decode())


def read_jsonl(path: Path) -> list:
    return [json.loads(line) for line in read_bytes(path).decode().splitlines() if line]


# -- action (de)serialization --------------------------------------------------


def _fin(sym: str | None) -> FinString | None:
    return None if sym is None else bits(sym)


def action_from_json(d: dict):
    kind = d["kind"]
    if kind == "odd_prune":
        return thm2_mod.OddPrune(
            stage=d["stage"], e=d["e"], tree=d["tree"], tau=bits(d["tau"]),
            tau0=bits(d["tau0"]), tau1=_fin(d["tau1"]), marked=d["marked"],
        )
    if kind == "follower_assign":
        return thm2_mod.FollowerAssign(stage=d["stage"], key=_key_from_json(d["tuple"]), x=d["x"])
    if kind == "diagonalize_d":
        return thm2_mod.DiagonalizeD(
            stage=d["stage"], e=d["e"], key=_key_from_json(d["tuple"]),
            extensions=tuple(bits(s) for s in d["extensions"]), x=d["x"],
            marked=d["marked"],
        )
    if kind == "leaf_extend":
        return thm2_mod.LeafExtend(stage=d["stage"], tree=d["tree"], sigma=bits(d["sigma"]))
    if kind == "tuple_scan_truncated":
        return thm2_mod.TupleScanTruncated(stage=d["stage"], registered=d["registered"])
    raise ValueError(f"unknown action kind {kind!r}")


def _key_from_json(d: dict) -> thm2_mod.TupleKey:
    return thm2_mod.TupleKey(
        parts=tuple((t, bits(sym)) for t, sym in d["parts"]), level=d["level"]
    )


# -- subcommands ----------------------------------------------------------------


def _outdir(path_str: str) -> Path:
    out = Path(path_str)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_base_class(args) -> int:
    out = _outdir(args.out)
    tree = chain_mod.base_computable_class(args.stages)
    config = {"command": "base-class", "stages": args.stages, "seed": args.seed}
    write_json(out / "config.json", config)
    write_json(out / "base_tree.json", tree.snapshot())
    print(f"base class: {len(tree.nodes)} nodes through stage {args.stages} -> {out}")
    return 0


def _load_registry(path_str: str | None) -> Registry:
    if path_str is None:
        return Registry.universal()
    return Registry.from_json(read_json(Path(path_str)))


def cmd_build_t2(args) -> int:
    out = _outdir(args.out)
    registry = _load_registry(args.registry)
    budget = thm2_mod.StageBudget(
        tuples_per_stage=args.tuples_per_stage, max_depth=args.max_depth
    )
    config = {
        "command": "build-t2",
        "trees": args.trees,
        "stages": args.stages,
        "tuples_per_stage": args.tuples_per_stage,
        "max_depth": args.max_depth,
        "registry": registry.to_json(),
        "seed": args.seed,
    }
    state = thm2_mod.ConstructionState(num_trees=args.trees, registry=registry)
    thm2_mod.run(state, args.stages, budget)
    write_json(out / "config.json", config)
    for tree in state.trees:
        write_json(out / f"tree_{tree.index}.json", tree.snapshot(state.stage))
    write_json(out / "d_set.json", sorted(state.d_set))
    write_json(out / "followers.json", state.to_json()["followers"])
    write_jsonl(out / "actions.jsonl", [a.to_json() for a in state.actions])
    print(
        f"ran {args.stages} stages over {args.trees} trees: "
        f"|D|={len(state.d_set)}, {len(state.followers)} followers, "
        f"{len(state.actions)} actions -> {out}"
    )
    return 0


def cmd_build_chain(args) -> int:
    out = _outdir(args.out)
    enums_spec = read_json(Path(args.enums))
    enums = [chain_mod.ReEnumeration.from_json(e) for e in enums_spec]
    config = {
        "command": "build-chain",
        "stages": args.stages,
        "enums": [e.to_json() for e in enums],
        "seed": args.seed,
    }
    result = chain_mod.iterate_chain(enums, args.stages)
    write_json(out / "config.json", config)
    write_json(out / "base_tree.json", result.base.snapshot())
    decode_report = []
    for j, q in enumerate(result.levels, start=1):
        write_json(out / f"level_{j}_tree.json", q.upsilon.snapshot())
        write_json(out / f"level_{j}_markers.json", [m.symbols for m in q.upsilon_star])
        coded = q.longest_coded_string()
        values = chain_mod.decode_path(coded)
        f_final = chain_mod.EnumFnApprox.compute(q.enum, args.stages, horizon=len(values))
        decode_report.append(
            {
                "level": j,
                "coded_string": coded.symbols,
                "decoded": values,
                "function_values": list(f_final.values[: len(values)]),
                "agrees": values == list(f_final.values[: len(values)]),
            }
        )
    write_json(out / "decode_report.json", decode_report)
    write_json(out / "union_tree.json", result.union_tree().snapshot())
    print(f"chain of {len(result.levels)} coded levels over {args.stages} stages -> {out}")
    return 0


def _load_tree(path_str: str) -> StagedTree:
    return StagedTree.from_snapshot(read_json(Path(path_str)))


def cmd_avoid_lower(args) -> int:
    tree = _load_tree(args.tree)
    rows = [bits(s) for s in read_json(Path(args.rows))]
    program = program_from_code(args.j)
    result = cone_mod.lower_cone_subtree(tree, rows, program, args.budget, args.depth)
    print(dumps(result.to_json()))
    return 0


def cmd_avoid_upper(args) -> int:
    tree = _load_tree(args.tree)
    program = program_from_code(args.i)
    result = cone_mod.upper_cone_subtree(tree, program, bits(args.x), args.depth, args.budget)
    print(dumps(result.to_json()))
    return 0


def cmd_assemble(args) -> int:
    text = Path(args.file).read_text()
    program = assemble(text)
    print(program_code(program))
    return 0


def cmd_disassemble(args) -> int:
    print(disassemble(program_from_code(args.index)))
    return 0


# -- check ----------------------------------------------------------------------


def _check_t2_dir(out: Path, config: dict) -> list[verify.Violation]:
    registry = Registry.from_json(config["registry"])
    trees = []
    for i in range(config["trees"]):
        trees.append(StagedTree.from_snapshot(read_json(out / f"tree_{i}.json")))
    actions = [action_from_json(d) for d in read_jsonl(out / "actions.jsonl")]
    d_set = set(read_json(out / "d_set.json"))
    violations = []
    for tree in trees:
        violations.extend(verify.check_tree_history(tree))
        violations.extend(verify.check_leaf_pair_liveness(tree))
    violations.extend(verify.check_dovetailing(trees, config["stages"]))
    violations.extend(verify.check_prune_soundness(trees, actions))
    violations.extend(verify.check_d_soundness(d_set, actions, registry))
    return violations


def _check_base_dir(out: Path, config: dict) -> list[verify.Violation]:
    tree = StagedTree.from_snapshot(read_json(out / "base_tree.json"))
    violations = verify.check_tree_history(tree)
    violations.extend(verify.check_base_shape(tree, min(config["stages"], 12)))
    violations.extend(verify.check_closure_downward_closed(tree, min(config["stages"], 10)))
    return violations


def _check_chain_dir(out: Path, config: dict) -> list[verify.Violation]:
    from .trees import ClosureTree

    base = StagedTree.from_snapshot(read_json(out / "base_tree.json"))
    violations = verify.check_tree_history(base)
    violations.extend(verify.check_base_shape(base, min(config["stages"], 12)))
    lam = ClosureTree(base)
    stages = config["stages"]
    level = 1
    while (out / f"level_{level}_tree.json").exists() or (
        out / f"level_{level}_tree.json.gz"
    ).exists():
        tree = StagedTree.from_snapshot(read_json(out / f"level_{level}_tree.json"))
        markers = [
            FinString(s, Alphabet.TERNARY)
            for s in read_json(out / f"level_{level}_markers.json")
        ]
        violations.extend(verify.check_tree_history(tree))
        violations.extend(verify.check_markers(markers))
        violations.extend(
            verify.check_graft_soundness(
                tree, markers, lam, stages, completeness_depth=10
            )
        )
        lam = ClosureTree(tree)
        level += 1
    report = read_json(out / "decode_report.json")
    for entry in report:
        if not entry["agrees"]:
            violations.append(
                verify.Violation(
                    "chain_spectrum", "coded path decodes to the function values",
                    stages, entry["coded_string"],
                )
            )
    return violations


def cmd_check(args) -> int:
    out = Path(args.dir)
    try:
        config = read_json(out / "config.json")
    except FileNotFoundError as exc:
        print(f"check: {exc}", file=sys.stderr)
        return 1
    command = config.get("command")
    if command == "build-t2":
        violations = _check_t2_dir(out, config)
    elif command == "base-class":
        violations = _check_base_dir(out, config)
    elif command == "build-chain":
        violations = _check_chain_dir(out, config)
    else:
        print(f"check: unknown snapshot kind {command!r}", file=sys.stderr)
        return 1
    for v in violations:
        print(str(v))
    if violations:
        print(f"check: {len(violations)} violation(s) in {out}")
        return 1
    print(f"check: all invariants hold in {out}")
    return 0


# -- DOT export -------------------------------------------------------------------


def export_dot(snapshot: dict, annotations: dict[str, list[str]] | None = None) -> str:
    """Render one tree snapshot as a DOT graph with a stable node order."""
    annotations = annotations or {}
    tree = StagedTree.from_snapshot(snapshot)
    stage = snapshot["stage"]
    lines = [f"digraph tree_{snapshot['index']} {{", '  node [shape=box, fontname="mono"];']
    nodes = tree.nodes_at(stage)
    for sigma in nodes:
        status = tree.status_at(sigma, stage)
        label = str(sigma)
        for extra in annotations.get(sigma.symbols, []):
            label += r"\n" + extra
        style = "dashed" if status is NodeStatus.TERMINAL else "solid"
        rec = tree.nodes[sigma]
        lines.append(
            f'  "{sigma}" [label="{label}\\n@{rec.enumerated_at}", style={style}];'
        )
    for sigma in nodes:
        if len(sigma) == 0:
            continue
        try:
            parent = tree.immediate_predecessor(sigma, stage)
        except Exception:
            continue
        lines.append(f'  "{parent}" -> "{sigma}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_export_dot(args) -> int:
    src = Path(args.dir)
    out = _outdir(args.out)
    try:
        actions = (
            [action_from_json(d) for d in read_jsonl(src / "actions.jsonl")]
            if (src / "actions.jsonl").exists() or (src / "actions.jsonl.gz").exists()
            else []
        )
        annotations: dict[int, dict[str, list[str]]] = {}
        for a in actions:
            if isinstance(a, thm2_mod.OddPrune):
                annotations.setdefault(a.tree, {}).setdefault(a.tau.symbols, []).append(
                    f"pruned @s{a.stage} for odd requirement e={a.e}"
                )
            elif isinstance(a, thm2_mod.DiagonalizeD):
                for (t, sigma), witness in zip(a.key.parts, a.extensions):
                    annotations.setdefault(t, {}).setdefault(sigma.symbols, []).append(
                        f"cut @s{a.stage} for even requirement e={a.e}, follower {a.x}"
                    )
        wrote = 0
        for path in sorted(src.glob("*tree*.json")) + sorted(src.glob("*tree*.json.gz")):
            name = path.name.removesuffix(".gz").removesuffix(".json")
            snapshot = read_json(src / (name + ".json"))
            index = snapshot.get("index", 0)
            dot = export_dot(snapshot, annotations.get(index))
            (out / f"{name}.dot").write_text(dot)
            wrote += 1
        if wrote == 0:
            print(f"export-dot: no tree snapshots under {src}", file=sys.stderr)
            return 1
    except OSError as exc:
        print(f"export-dot: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {wrote} DOT file(s) -> {out}")
    return 0


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pi01lab",
        description="Workbench for staged-tree constructions over effectively closed sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("base-class", help="build the all-computable base class")
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_base_class)

    p = sub.add_parser("build-t2", help="run the diagonalizing tree-family construction")
    p.add_argument("--trees", type=int, required=True)
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--registry", help="functional registry JSON (default: universal numbering)")
    p.add_argument("--tuples-per-stage", type=int, default=64)
    p.add_argument("--max-depth", type=int, default=None,
                   help="depth horizon; leaves this long stop extending")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_build_t2)

    p = sub.add_parser("build-chain", help="code r.e. sets into an iterated chain of classes")
    p.add_argument("--enums", required=True, help="JSON list of {table:[[stage,element],..]} or {program:text}")
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_build_chain)

    p = sub.add_parser("avoid-lower", help="lower cone avoidance subtree selection")
    p.add_argument("--tree", required=True)
    p.add_argument("--rows", required=True)
    p.add_argument("--j", type=int, required=True, help="functional index")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.set_defaults(func=cmd_avoid_lower)

    p = sub.add_parser("avoid-upper", help="upper cone avoidance subtree selection")
    p.add_argument("--tree", required=True)
    p.add_argument("--i", type=int, required=True, help="functional index")
    p.add_argument("--x", required=True, help="target bits")
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.set_defaults(func=cmd_avoid_upper)

    p = sub.add_parser("check", help="run the invariant suites against a snapshot directory")
    p.add_argument("dir")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("assemble", help="assemble a program text; print its index")
    p.add_argument("file")
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("disassemble", help="print the program text of an index")
    p.add_argument("index", type=int)
    p.set_defaults(func=cmd_disassemble)

    p = sub.add_parser("export-dot", help="render snapshot trees as DOT graphs")
    p.add_argument("dir")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_dot)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("WORKBENCH_LOG", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
