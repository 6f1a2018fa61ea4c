"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error,
3 unsupported code parameters.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

from .codec import (
    CodecError,
    Message,
    NodeShare,
    bytes_from_stripes,
    stripes_from_bytes,
    stripes_from_symbols,
    encode as codec_encode,
    dc_decode,
)
from .construct import (
    ConstructionError,
    MSRCode,
    UnsupportedParametersError,
    build_2k,
    build_53,
    build_general,
    build_ref_635,
    fixture_42_gf5,
)
from .field import FieldError, parse_field
from .matrix import FieldVector, parse_matrix
from .repair import RepairError, execute_repair, plan_for_node
from .simharness import Cluster, Scenario, ScenarioError, run_scenario
from .specfile import (
    SpecFormatError,
    code_identity,
    dump_code,
    dump_plan,
    dump_shares_binary,
    dump_shares_text,
    load_code,
    load_shares_auto,
)
from .verify import verify_code, verify_construction

USAGE_ERROR = 2
UNSUPPORTED = 3


class CliError(Exception):
    def __init__(self, message, code=USAGE_ERROR):
        super().__init__(message)
        self.exit_code = code


def _load_code_file(path: str) -> MSRCode:
    try:
        return load_code(Path(path).read_text())
    except (OSError, SpecFormatError, ConstructionError, FieldError) as exc:
        raise CliError(f"cannot load code spec {path}: {exc}")


def _share_path(directory: Path, node: int) -> Path:
    return directory / f"node-{node}.share"


def _write_shares(directory: Path, code: MSRCode, per_node, origin_bytes,
                  binary: bool):
    directory.mkdir(parents=True, exist_ok=True)
    chash = code_identity(code)
    alpha = code.params.alpha
    for node, stripes in per_node.items():
        path = _share_path(directory, node)
        raw = [tuple(v.values) for v in stripes]
        if binary:
            path.write_bytes(dump_shares_binary(chash, node, alpha, raw, origin_bytes))
        else:
            path.write_text(dump_shares_text(chash, node, alpha, raw, origin_bytes))


def _read_share_file(path: Path, code: MSRCode):
    try:
        info = load_shares_auto(path.read_bytes())
    except (OSError, SpecFormatError, ValueError) as exc:
        raise CliError(f"cannot read share file {path}: {exc}")
    if info["code"] != code_identity(code):
        raise CliError(f"{path} belongs to a different code")
    return info


def _fixture_names():
    base = resources.files("emsr") / "fixtures"
    return sorted(p.name.removesuffix(".code")
                  for p in base.iterdir() if p.name.endswith(".code"))


def cmd_construct(args) -> int:
    if args.fixture:
        base = resources.files("emsr") / "fixtures" / f"{args.fixture}.code"
        try:
            text = base.read_text()
        except FileNotFoundError:
            raise CliError(
                f"unknown fixture {args.fixture!r}; available: {', '.join(_fixture_names())}")
        code = load_code(text)
    else:
        if len(args.params) != 3:
            raise CliError("construct needs n k d (or --fixture NAME)")
        n, k, d = args.params
        field = parse_field(args.field) if args.field else None
        try:
            if (n, k, d) == (5, 3, 4):
                a, b = (int(x) for x in args.ab.split(",")) if args.ab else (1, 1)
                if field is not None and field.order != 3:
                    raise UnsupportedParametersError(
                        "the (5,3,4) construction is specific to gf(3)")
                code = build_53(a, b)
            elif n >= 2 * k and d >= 2 * k - 1:
                seed_flags = args.v or args.m or args.kappa is not None
                if seed_flags:
                    if n != 2 * k or d != 2 * k - 1:
                        raise CliError("seed overrides apply only to (2k,k,2k-1) codes")
                    if field is None:
                        raise CliError("seed overrides need an explicit --field")
                    v = parse_matrix(field, args.v) if args.v else None
                    m = parse_matrix(field, args.m) if args.m else None
                    code = build_2k(k, field, v=v, m_coeff=m, kappa=args.kappa)
                elif (n, k, d) == (6, 3, 5) and field is None:
                    # The flagship example ships over gf(4) with the bundled
                    # totally-invertible coefficient matrix.
                    code = build_ref_635()
                else:
                    code = build_general(n, k, d, field)
            else:
                raise UnsupportedParametersError(
                    f"({n},{k},{d}) is outside the constructions shipped here "
                    "(n >= 2k with d >= 2k-1, the (5,3,4) family, or fixtures); "
                    "codes with k/n > 1/2 beyond (5,3) remain open")
        except UnsupportedParametersError as exc:
            raise CliError(str(exc), UNSUPPORTED)
        except (ConstructionError, FieldError) as exc:
            raise CliError(f"construction failed: {exc}")
    check = verify_construction(code)
    if not check.passed:
        print(f"constraint check failed: {','.join(check.witnesses)}", file=sys.stderr)
        return 1
    text = dump_code(code)
    if args.output:
        Path(args.output).write_text(text)
        print(f"wrote {args.output} ({code_identity(code)[:12]})")
    else:
        sys.stdout.write(text)
    return 0


def cmd_inspect(args) -> int:
    code = _load_code_file(args.code)
    p = code.params
    print(f"code {code_identity(code)}")
    print(f"field {p.field.descriptor}")
    print(f"params n={p.n} k={p.k} d={p.d} alpha={p.alpha} "
          f"stripe={p.stripe_symbols} repair-bandwidth={p.d}")
    print(f"kind {code.kind}" + (f" name={code.name}" if code.name else ""))
    for l in range(1, p.k + 1):
        for i in range(1, p.parity_count + 1):
            print(f"enc[{l}][{i}] = {code.enc_block(l, i).literal()}")
    return 0


def _ingest_stripes(code: MSRCode, args):
    data = Path(args.input).read_bytes()
    if args.symbols:
        symbols = [int(s) for s in data.decode().replace(",", " ").split()]
        return stripes_from_symbols(code, symbols), None
    return stripes_from_bytes(code, data), len(data)


def cmd_encode(args) -> int:
    code = _load_code_file(args.code)
    try:
        stripes, origin = _ingest_stripes(code, args)
    except (OSError, ValueError, CodecError) as exc:
        raise CliError(f"cannot frame input: {exc}")
    per_node = {node: [] for node in range(1, code.params.n + 1)}
    for msg in stripes:
        for share in codec_encode(code, msg):
            per_node[share.node].append(share.symbols)
    _write_shares(Path(args.out_dir), code, per_node, origin,
                  binary=args.format == "binary")
    print(f"encoded {len(stripes)} stripe(s) to {args.out_dir} "
          f"({code.params.n} share files)")
    return 0


def cmd_collect(args) -> int:
    code = _load_code_file(args.code)
    p = code.params
    infos = [_read_share_file(Path(s), code) for s in args.shares]
    if len(infos) != p.k:
        raise CliError(f"collect needs exactly k={p.k} share files")
    counts = {len(i["stripes"]) for i in infos}
    if len(counts) != 1:
        raise CliError("share files disagree on stripe count")
    stripes = []
    for idx in range(counts.pop()):
        shares = [NodeShare(i["node"], FieldVector.of(p.field, i["stripes"][idx]))
                  for i in infos]
        stripes.append(dc_decode(code, shares))
    origin = infos[0]["origin_bytes"]
    out = Path(args.output)
    if origin is None:
        symbols = []
        for msg in stripes:
            symbols.extend(msg.symbols())
        out.write_text(",".join(map(str, symbols)) + "\n")
    else:
        out.write_bytes(bytes_from_stripes(code, stripes, origin))
    print(f"recovered {len(stripes)} stripe(s) into {args.output}")
    return 0


def cmd_fail(args) -> int:
    path = _share_path(Path(args.share_dir), args.node)
    if not path.exists():
        raise CliError(f"no share file for node {args.node} in {args.share_dir}")
    path.rename(path.with_suffix(".share.failed"))
    print(f"node {args.node} failed ({path} set aside)")
    return 0


def cmd_repair(args) -> int:
    code = _load_code_file(args.code)
    directory = Path(args.share_dir)
    survivors = None
    if args.survivors:
        survivors = tuple(int(s) for s in args.survivors.split(","))
    try:
        plan = plan_for_node(code, args.node, survivors)
    except RepairError as exc:
        raise CliError(f"planning failed: {exc}")
    infos = {}
    for node in plan.survivors:
        infos[node] = _read_share_file(_share_path(directory, node), code)
    counts = {len(i["stripes"]) for i in infos.values()}
    if len(counts) != 1:
        raise CliError("survivor share files disagree on stripe count")
    stripe_count = counts.pop()
    origin = infos[plan.survivors[0]]["origin_bytes"]
    regenerated = []
    moved = 0
    for idx in range(stripe_count):
        shares = [NodeShare(n, FieldVector.of(code.field, infos[n]["stripes"][idx]))
                  for n in plan.survivors]
        result = execute_repair(plan, shares)
        regenerated.append(result.share.symbols)
        moved += result.bandwidth.symbols
    binary = any(_share_path(directory, n).read_bytes()[:1] == b"E"
                 for n in plan.survivors[:1])
    _write_shares(directory, code, {args.node: regenerated}, origin, binary=binary)
    sys.stdout.write(dump_plan(plan, code_identity(code)))
    naive = code.params.k * code.params.alpha * stripe_count
    print(f"bandwidth links={plan.d} symbols={moved} naive={naive}")
    if args.plan_out:
        Path(args.plan_out).write_text(dump_plan(plan, code_identity(code)))
    print(f"repaired node {args.node} ({stripe_count} stripe(s))")
    return 0


def cmd_verify(args) -> int:
    code = _load_code_file(args.code)
    report = verify_code(code)
    text = report.render()
    if args.report:
        Path(args.report).write_text(text)
    sys.stdout.write(text)
    return 0 if report.passed else 1


def cmd_simulate(args) -> int:
    code = _load_code_file(args.code)
    try:
        scenario = Scenario.parse(Path(args.scenario).read_text())
        report = run_scenario(Cluster(code), scenario)
    except (OSError, ScenarioError, CodecError, RepairError) as exc:
        raise CliError(f"simulation failed: {exc}")
    text = report.render()
    if args.report:
        Path(args.report).write_text(text)
    sys.stdout.write(text)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emsr",
        description="Construct, verify and exercise exact-repair MSR codes.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a code and write its spec file")
    c.add_argument("params", nargs="*", type=int, metavar="N K D")
    c.add_argument("--field", help="field descriptor, e.g. gf(4,0b111)")
    c.add_argument("--v", help="basis matrix literal (2k codes only)")
    c.add_argument("--m", help="coefficient matrix literal (2k codes only)")
    c.add_argument("--kappa", type=int, help="scaling constant (2k codes only)")
    c.add_argument("--ab", help="nonzero scalar pair a,b for the (5,3,4) family")
    c.add_argument("--fixture", help="copy a bundled reference code instead")
    c.add_argument("-o", "--output", help="spec file to write (stdout otherwise)")
    c.set_defaults(func=cmd_construct)

    i = sub.add_parser("inspect", help="print a code spec in readable form")
    i.add_argument("code")
    i.set_defaults(func=cmd_inspect)

    e = sub.add_parser("encode", help="encode a file into n share files")
    e.add_argument("--code", required=True)
    e.add_argument("--input", required=True)
    e.add_argument("--out-dir", required=True)
    e.add_argument("--format", choices=("binary", "text"), default="binary")
    e.add_argument("--symbols", action="store_true",
                   help="input holds whitespace/comma separated symbol values")
    e.set_defaults(func=cmd_encode)

    g = sub.add_parser("collect", help="rebuild the source from k share files")
    g.add_argument("--code", required=True)
    g.add_argument("--output", required=True)
    g.add_argument("shares", nargs="+")
    g.set_defaults(func=cmd_collect)

    f = sub.add_parser("fail", help="mark a node's share file as lost")
    f.add_argument("--node", type=int, required=True)
    f.add_argument("--share-dir", required=True)
    f.set_defaults(func=cmd_fail)

    r = sub.add_parser("repair", help="regenerate a lost share from survivors")
    r.add_argument("--code", required=True)
    r.add_argument("--node", type=int, required=True)
    r.add_argument("--share-dir", required=True)
    r.add_argument("--survivors", help="comma-separated survivor ids")
    r.add_argument("--plan-out", help="also write the plan to this file")
    r.set_defaults(func=cmd_repair)

    v = sub.add_parser("verify", help="run the full certification suite")
    v.add_argument("--code", required=True)
    v.add_argument("--report", help="also write the report to this file")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="run a scenario file against a cluster")
    s.add_argument("--code", required=True)
    s.add_argument("--scenario", required=True)
    s.add_argument("--report", help="also write the report to this file")
    s.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (CodecError, RepairError, ConstructionError, SpecFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
