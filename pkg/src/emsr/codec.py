"""Encoding source stripes into node shares and decoding from any k shares."""

from __future__ import annotations

from dataclasses import dataclass

from .construct import MSRCode
from .matrix import FieldMatrix, FieldVector, SingularMatrixError, block_compose


class CodecError(Exception):
    pass


class MdsViolationError(CodecError):
    """A k-subset failed to decode; verified codes must never raise this."""


@dataclass(frozen=True)
class Message:
    """k information units of alpha symbols each."""

    units: tuple  # tuple of FieldVector

    @classmethod
    def of(cls, code: MSRCode, unit_values) -> "Message":
        units = tuple(FieldVector.of(code.field, u) for u in unit_values)
        if len(units) != code.params.k or any(u.dim != code.params.alpha for u in units):
            raise CodecError("message shape does not match the code")
        return cls(units)

    @classmethod
    def zero(cls, code: MSRCode) -> "Message":
        return cls(tuple(FieldVector.zero(code.field, code.params.alpha)
                         for _ in range(code.params.k)))

    @classmethod
    def from_symbols(cls, code: MSRCode, symbols) -> "Message":
        a = code.params.alpha
        k = code.params.k
        symbols = list(symbols)
        if len(symbols) != k * a:
            raise CodecError(f"stripe needs {k * a} symbols, got {len(symbols)}")
        return cls.of(code, [symbols[i * a:(i + 1) * a] for i in range(k)])

    def symbols(self):
        out = []
        for u in self.units:
            out.extend(u.values)
        return out

    def stacked(self, code: MSRCode) -> FieldVector:
        return FieldVector.of(code.field, self.symbols())


@dataclass(frozen=True)
class NodeShare:
    node: int
    symbols: FieldVector


def share_matrix(code: MSRCode, node: int) -> FieldMatrix:
    """Linear map from the stacked message to the share stored at `node`."""
    p = code.params
    if not 1 <= node <= p.n:
        raise CodecError(f"node {node} outside 1..{p.n}")
    f = code.field
    if code.is_systematic(node):
        blocks = [[FieldMatrix.identity(f, p.alpha) if l == node - 1
                   else FieldMatrix.zero(f, p.alpha, p.alpha)]
                  for l in range(p.k)]
        return block_compose(f, [[row[0] for row in blocks]])
    i = node - p.k
    return block_compose(
        f, [[code.enc_block(l, i).transpose() for l in range(1, p.k + 1)]])


def encode(code: MSRCode, msg: Message) -> list:
    """Shares for all n nodes; systematic nodes store their unit verbatim."""
    p = code.params
    if len(msg.units) != p.k or any(u.dim != p.alpha for u in msg.units):
        raise CodecError("message shape does not match the code")
    f = code.field
    shares = []
    for j in range(1, p.k + 1):
        shares.append(NodeShare(j, msg.units[j - 1]))
    for i in range(1, p.parity_count + 1):
        acc = FieldVector.zero(f, p.alpha)
        for l in range(1, p.k + 1):
            acc = acc.add(code.enc_block(l, i).apply_left(msg.units[l - 1]))
        shares.append(NodeShare(p.k + i, acc))
    return shares


def collector_matrix(code: MSRCode, nodes) -> FieldMatrix:
    """Stacked share maps of a node subset (the data-collector composite)."""
    f = code.field
    rows = []
    for node in nodes:
        rows.extend(share_matrix(code, node).data)
    return FieldMatrix.from_rows(f, rows)


def dc_decode(code: MSRCode, shares) -> Message:
    """Reconstruct the full message from any k distinct node shares."""
    p = code.params
    shares = list(shares)
    ids = [s.node for s in shares]
    if len(ids) != p.k or len(set(ids)) != p.k:
        raise CodecError(f"need exactly {p.k} distinct node shares, got {ids}")
    composite = collector_matrix(code, ids)
    stacked = []
    for s in shares:
        if s.symbols.dim != p.alpha:
            raise CodecError("share has the wrong number of symbols")
        stacked.extend(s.symbols.values)
    try:
        sol = composite.solve(FieldVector.of(code.field, stacked))
    except SingularMatrixError as exc:
        raise MdsViolationError(f"subset {sorted(ids)} cannot decode") from exc
    a = p.alpha
    return Message(tuple(FieldVector(code.field, sol.values[l * a:(l + 1) * a])
                         for l in range(p.k)))


# -- byte framing -------------------------------------------------------------

_FILE_MODE_DEGREES = {1, 2, 4, 8}


def symbols_per_byte(field) -> int:
    if field.kind != "binary":
        raise CodecError(
            f"file framing needs a binary field, not {field.descriptor}; "
            "prime fields work in symbol mode only")
    m = field.order.bit_length() - 1
    if m not in _FILE_MODE_DEGREES:
        raise CodecError(
            f"file framing needs an extension degree in {sorted(_FILE_MODE_DEGREES)}")
    return 8 // m


def bytes_to_symbols(field, data: bytes) -> list:
    """Split bytes into field symbols, high bits of each byte first."""
    per = symbols_per_byte(field)
    m = 8 // per
    mask = (1 << m) - 1
    out = []
    for byte in data:
        for c in range(per - 1, -1, -1):
            out.append((byte >> (c * m)) & mask)
    return out


def symbols_to_bytes(field, symbols) -> bytes:
    per = symbols_per_byte(field)
    m = 8 // per
    symbols = list(symbols)
    if len(symbols) % per:
        raise CodecError("symbol count does not fill whole bytes")
    out = bytearray()
    for i in range(0, len(symbols), per):
        byte = 0
        for s in symbols[i:i + per]:
            byte = (byte << m) | s
        out.append(byte)
    return bytes(out)


def stripes_from_symbols(code: MSRCode, symbols) -> list:
    """Chunk a symbol stream into zero-padded stripes of k*alpha symbols."""
    size = code.params.stripe_symbols
    symbols = list(symbols)
    if not symbols:
        symbols = [0]
    pad = (-len(symbols)) % size
    symbols = symbols + [0] * pad
    return [Message.from_symbols(code, symbols[i:i + size])
            for i in range(0, len(symbols), size)]


def stripes_from_bytes(code: MSRCode, data: bytes) -> list:
    return stripes_from_symbols(code, bytes_to_symbols(code.field, data))


def bytes_from_stripes(code: MSRCode, stripes, origin_bytes: int) -> bytes:
    symbols = []
    for msg in stripes:
        symbols.extend(msg.symbols())
    per = symbols_per_byte(code.field)
    whole = len(symbols) - len(symbols) % per
    data = symbols_to_bytes(code.field, symbols[:whole])
    if origin_bytes > len(data):
        raise CodecError("declared length exceeds decoded payload")
    return data[:origin_bytes]
