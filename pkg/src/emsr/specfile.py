"""Textual file formats: code-spec files, share files, repair plans.

The code-spec format is line-oriented ``key value`` text with a versioned
header.  Serialization is canonical, so files round-trip bit-exactly and
the sha256 of the serialized bytes serves as the code's identity hash.
"""

from __future__ import annotations

import hashlib

from .construct import (
    CodeParams,
    ConstructionSeed,
    MSRCode,
    PunctureInfo,
    build_2k,
    puncture as puncture_op,
)
from .field import FieldSpec, parse_field
from .matrix import FieldMatrix, FieldVector, parse_matrix, parse_vector
from .repair import RepairPlan

SPEC_HEADER = "emsr-codespec 1"
SHARE_HEADER = "emsr-share 1"
PLAN_HEADER = "emsr-plan 1"
SHARE_MAGIC = b"EMSRSH1\x00"


class SpecFormatError(Exception):
    pass


def _seed_lines(prefix: str, seed: ConstructionSeed) -> list:
    lines = [
        f"{prefix}v {seed.v.literal()}",
        f"{prefix}m {seed.m_coeff.literal()}",
        f"{prefix}kappa {seed.kappa}",
    ]
    if seed.cauchy_points is not None:
        xs, ys = seed.cauchy_points
        lines.append(f"{prefix}points x={','.join(map(str, xs))}"
                     f" y={','.join(map(str, ys))}")
    return lines


def dump_code(code: MSRCode) -> str:
    p = code.params
    lines = [SPEC_HEADER,
             f"field {p.field.descriptor}",
             f"params {p.n} {p.k} {p.d}",
             f"kind {code.kind}"]
    if code.name:
        lines.append(f"name {code.name}")
    if code.kind == "structured-2k":
        lines.extend(_seed_lines("seed.", code.seed))
    elif code.kind == "punctured":
        parent = code.puncture.parent
        lines.append(f"parent.field {parent.field.descriptor}")
        lines.append(f"parent.params {parent.params.n} {parent.params.k} "
                     f"{parent.params.d}")
        lines.extend(_seed_lines("parent.seed.", parent.seed))
        lines.append("removed-units "
                     + ",".join(map(str, code.puncture.removed_units)))
        lines.append(f"pruned-symbols {code.puncture.pruned_symbols}")
    elif code.kind == "five-three":
        a, b = code.ab_pair
        lines.append(f"alpha {a}")
        lines.append(f"beta {b}")
    for l in range(1, p.k + 1):
        for i in range(1, p.parity_count + 1):
            lines.append(f"enc {l} {i} {code.enc_block(l, i).literal()}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def _parse_kv(text: str, header: str):
    lines = [ln.rstrip("\n") for ln in text.splitlines()]
    lines = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0].strip() != header:
        raise SpecFormatError(f"missing header {header!r}")
    pairs = []
    for ln in lines[1:]:
        if ln.strip() == "end":
            break
        key, _, value = ln.strip().partition(" ")
        pairs.append((key, value))
    return pairs


def _collect_seed(fields: dict, prefix: str, field: FieldSpec) -> ConstructionSeed:
    try:
        v = parse_matrix(field, fields[prefix + "v"])
        m = parse_matrix(field, fields[prefix + "m"])
        kappa = int(fields[prefix + "kappa"])
    except KeyError as exc:
        raise SpecFormatError(f"missing seed field {exc}") from exc
    points = None
    if prefix + "points" in fields:
        xs_part, ys_part = fields[prefix + "points"].split(" ")
        xs = tuple(int(x) for x in xs_part.removeprefix("x=").split(","))
        ys = tuple(int(y) for y in ys_part.removeprefix("y=").split(","))
        points = (xs, ys)
    from .matrix import dual_basis
    u = dual_basis(v).mul(m).scale(field.inv(kappa))
    return ConstructionSeed(v=v, m_coeff=m, kappa=kappa, u=u, cauchy_points=points)


def load_code(text: str) -> MSRCode:
    pairs = _parse_kv(text, SPEC_HEADER)
    fields = {}
    enc_entries = {}
    for key, value in pairs:
        if key == "enc":
            l, i, literal = value.split(" ", 2)
            enc_entries[(int(l), int(i))] = literal
        else:
            fields[key] = value
    try:
        field = parse_field(fields["field"])
        n, k, d = (int(x) for x in fields["params"].split())
        kind = fields["kind"]
    except KeyError as exc:
        raise SpecFormatError(f"missing field {exc}") from exc
    params = CodeParams(n=n, k=k, d=d, field=field)
    enc = []
    for l in range(1, k + 1):
        row = []
        for i in range(1, n - k + 1):
            if (l, i) not in enc_entries:
                raise SpecFormatError(f"missing encoding block ({l},{i})")
            block = parse_matrix(field, enc_entries[(l, i)])
            if block.rows != params.alpha or block.cols != params.alpha:
                raise SpecFormatError(f"block ({l},{i}) is not alpha x alpha")
            row.append(block)
        enc.append(tuple(row))
    enc = tuple(enc)
    name = fields.get("name", "")

    if kind == "structured-2k":
        seed = _collect_seed(fields, "seed.", field)
        return MSRCode(params=params, kind=kind, enc=enc, seed=seed, name=name)
    if kind == "punctured":
        pfield = parse_field(fields["parent.field"])
        pn, pk, pd = (int(x) for x in fields["parent.params"].split())
        seed = _collect_seed(fields, "parent.seed.", pfield)
        parent = build_2k(pk, pfield, v=seed.v, m_coeff=seed.m_coeff,
                          kappa=seed.kappa)
        if (parent.params.n, parent.params.d) != (pn, pd):
            raise SpecFormatError("parent parameters are inconsistent")
        rebuilt = puncture_op(parent, n, k, d)
        if rebuilt.enc != enc:
            raise SpecFormatError("stored encoding table does not match the "
                                  "punctured parent")
        return rebuilt
    if kind == "five-three":
        a, b = int(fields["alpha"]), int(fields["beta"])
        return MSRCode(params=params, kind=kind, enc=enc, ab_pair=(a, b), name=name)
    if kind in ("fixture", "replication"):
        return MSRCode(params=params, kind=kind, enc=enc, name=name)
    raise SpecFormatError(f"unknown code kind {kind!r}")


def code_identity(code: MSRCode) -> str:
    return hashlib.sha256(dump_code(code).encode()).hexdigest()


def load_fixture(name: str) -> MSRCode:
    """A bundled reference code by file stem, e.g. ``gf4_635_orthogonal``."""
    from importlib import resources

    text = (resources.files("emsr") / "fixtures" / f"{name}.code").read_text()
    return load_code(text)


def load_fixture_matrix(name: str, field: FieldSpec) -> FieldMatrix:
    """A bundled reference matrix (.mat file); comment lines start with #."""
    from importlib import resources

    text = (resources.files("emsr") / "fixtures" / f"{name}.mat").read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    return parse_matrix(field, lines[0])


# -- share files ----------------------------------------------------------------


def dump_shares_text(code_hash: str, node: int, alpha: int, stripes,
                     origin_bytes: int | None) -> str:
    symbols = []
    for vec in stripes:
        symbols.extend(vec)
    payload = "".join(f"{s:02x}" for s in symbols)
    lines = [SHARE_HEADER,
             f"code {code_hash}",
             f"node {node}",
             f"alpha {alpha}",
             f"stripes {len(stripes)}",
             f"origin-bytes {'none' if origin_bytes is None else origin_bytes}",
             f"payload {payload}"]
    return "\n".join(lines) + "\n"


def load_shares_text(text: str):
    pairs = dict(_parse_kv(text, SHARE_HEADER))
    alpha = int(pairs["alpha"])
    count = int(pairs["stripes"])
    payload = pairs.get("payload", "")
    raw = [int(payload[i:i + 2], 16) for i in range(0, len(payload), 2)]
    if len(raw) != alpha * count:
        raise SpecFormatError("share payload length mismatch")
    origin = pairs["origin-bytes"]
    stripes = [tuple(raw[i * alpha:(i + 1) * alpha]) for i in range(count)]
    return {
        "code": pairs["code"],
        "node": int(pairs["node"]),
        "alpha": alpha,
        "origin_bytes": None if origin == "none" else int(origin),
        "stripes": stripes,
    }


def dump_shares_binary(code_hash: str, node: int, alpha: int, stripes,
                       origin_bytes: int | None) -> bytes:
    out = bytearray(SHARE_MAGIC)
    out += bytes.fromhex(code_hash)
    out += node.to_bytes(2, "big")
    out += alpha.to_bytes(2, "big")
    out += len(stripes).to_bytes(4, "big")
    out += (origin_bytes if origin_bytes is not None else 2 ** 64 - 1).to_bytes(8, "big")
    for vec in stripes:
        out += bytes(vec)
    return bytes(out)


def load_shares_binary(blob: bytes):
    if blob[:8] != SHARE_MAGIC:
        raise SpecFormatError("not a share file")
    code_hash = blob[8:40].hex()
    node = int.from_bytes(blob[40:42], "big")
    alpha = int.from_bytes(blob[42:44], "big")
    count = int.from_bytes(blob[44:48], "big")
    origin = int.from_bytes(blob[48:56], "big")
    body = blob[56:]
    if len(body) != alpha * count:
        raise SpecFormatError("share payload length mismatch")
    stripes = [tuple(body[i * alpha:(i + 1) * alpha]) for i in range(count)]
    return {
        "code": code_hash,
        "node": node,
        "alpha": alpha,
        "origin_bytes": None if origin == 2 ** 64 - 1 else origin,
        "stripes": stripes,
    }


def load_shares_auto(blob: bytes):
    if blob[:8] == SHARE_MAGIC:
        return load_shares_binary(blob)
    return load_shares_text(blob.decode())


# -- repair plans ----------------------------------------------------------------


def dump_plan(plan: RepairPlan, code_hash: str) -> str:
    lines = [PLAN_HEADER,
             f"code {code_hash}",
             f"failed {plan.failed}",
             f"path {plan.path}",
             "survivors " + ",".join(map(str, plan.survivors))]
    for node, proj in zip(plan.survivors, plan.projections):
        lines.append(f"projection {node} {proj.literal()}")
    lines.append(f"recon {plan.recon.literal()}")
    return "\n".join(lines) + "\n"


def load_plan(text: str, field: FieldSpec) -> RepairPlan:
    pairs = _parse_kv(text, PLAN_HEADER)
    fields = {}
    projections = {}
    for key, value in pairs:
        if key == "projection":
            node, literal = value.split(" ", 1)
            projections[int(node)] = parse_vector(field, literal)
        else:
            fields[key] = value
    survivors = tuple(int(s) for s in fields["survivors"].split(","))
    return RepairPlan(
        failed=int(fields["failed"]),
        survivors=survivors,
        projections=tuple(projections[s] for s in survivors),
        recon=parse_matrix(field, fields["recon"]),
        path=fields.get("path", "loaded"),
    )
