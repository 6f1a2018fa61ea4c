"""Constructors for exact-repair MSR codes.

Conventions used throughout the package:

* Nodes are numbered 1..n.  Nodes 1..k are systematic and store their
  information unit verbatim; node k+i is parity node i.
* ``enc[l-1][i-1]`` is the alpha-by-alpha encoding matrix of parity node
  i for information unit l.  Parity node i stores the row vector
  ``sum_l w_l^t enc[l][i]``.
* The structured family uses elementary blocks ``u_i v_l^t + m[l][i] I``
  with ``kappa * U = V' * M`` where V' is the dual basis of V.  The block
  matrix composed from the table (unit-major rows, parity-major columns)
  is invertible and its inverse carries the same structure with the roles
  of U and V swapped, which is what makes parity repair mirror systematic
  repair.
"""

from __future__ import annotations

from dataclasses import dataclass

from .field import FieldSpec, field_of_order, prime_field, smallest_field
from .matrix import (
    FieldMatrix,
    FieldVector,
    SingularMatrixError,
    SizeCapError,
    all_submatrices_invertible,
    block_compose,
    cauchy,
    default_cauchy_points,
    dual_basis,
)


class ConstructionError(Exception):
    """A named constraint violation; ``violations`` lists the failed checks."""

    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = tuple(violations)


class UnsupportedParametersError(ConstructionError):
    pass


# A 3x3 matrix over GF(4) whose square submatrices are all invertible,
# used when the field is too small for the default Cauchy construction.
SMALL_FIELD_COEFFS = {
    (3, 4): ((1, 1, 1), (1, 2, 3), (1, 3, 2)),
}


@dataclass(frozen=True)
class CodeParams:
    """(n, k, d) over a field; alpha, stripe size and repair degree derive."""

    n: int
    k: int
    d: int
    field: FieldSpec

    def __post_init__(self):
        if not 1 <= self.k <= self.d <= self.n - 1:
            raise ConstructionError(
                f"need 1 <= k <= d <= n-1, got (n,k,d)=({self.n},{self.k},{self.d})")

    @property
    def alpha(self) -> int:
        return self.d - self.k + 1

    @property
    def stripe_symbols(self) -> int:
        return self.k * self.alpha

    @property
    def repair_bandwidth(self) -> int:
        return self.d

    @property
    def parity_count(self) -> int:
        return self.n - self.k


@dataclass(frozen=True)
class ConstructionSeed:
    v: FieldMatrix          # columns v_1..v_k
    m_coeff: FieldMatrix    # entry [l][i] pairs unit l with parity i
    kappa: int
    u: FieldMatrix          # columns u_1..u_k, derived from the others
    cauchy_points: tuple | None = None  # (xs, ys) when m_coeff is Cauchy-built


@dataclass(frozen=True)
class PunctureInfo:
    parent: "MSRCode"
    removed_units: tuple    # parent unit indices dropped (1-based)
    pruned_symbols: int     # trailing coordinates dropped per node and unit


@dataclass(frozen=True)
class MSRCode:
    """An (n, k, d) exact-repair MSR code with explicit encoding matrices."""

    params: CodeParams
    kind: str               # structured-2k | punctured | five-three | fixture | replication
    enc: tuple              # enc[l-1][i-1] -> FieldMatrix, alpha x alpha
    seed: ConstructionSeed | None = None
    puncture: PunctureInfo | None = None
    ab_pair: tuple | None = None  # (alpha, beta) scalars of the (5,3) family
    name: str = ""

    @property
    def field(self) -> FieldSpec:
        return self.params.field

    def enc_block(self, unit: int, parity: int) -> FieldMatrix:
        """Encoding matrix for information unit and parity index (1-based)."""
        return self.enc[unit - 1][parity - 1]

    def is_systematic(self, node: int) -> bool:
        return 1 <= node <= self.params.k

    def composite(self) -> FieldMatrix:
        """The full block matrix of encoding blocks (unit rows, parity columns)."""
        return block_compose(self.field, [list(row) for row in self.enc])


@dataclass(frozen=True)
class DualStructure:
    """Blockwise inverse of a structured code's composite matrix."""

    enc_prime: tuple        # enc_prime[l-1][i-1], same layout as MSRCode.enc
    u_prime: FieldMatrix
    v_prime: FieldMatrix
    m_prime: FieldMatrix

    def composite(self, field: FieldSpec) -> FieldMatrix:
        return block_compose(field, [list(row) for row in self.enc_prime])


def default_kappa(field: FieldSpec) -> int:
    """Smallest scaling constant with kappa != 0 and 1 - kappa^2 != 0."""
    one = 1
    for kappa in field.nonzero():
        if field.sub(one, field.mul(kappa, kappa)) != 0:
            return kappa
    raise ConstructionError(
        f"no usable scaling constant in {field.descriptor}", ["bad-kappa"])


def seed_violations(seed: ConstructionSeed, k: int, field: FieldSpec):
    """Named constraint failures for a structured seed; empty means valid."""
    out = []
    v = seed.v
    if v.rows != k or v.cols != k:
        out.append("singular-V")
        return out
    try:
        vp = dual_basis(v)
    except SingularMatrixError:
        out.append("singular-V")
        return out
    if seed.kappa == 0 or field.sub(1, field.mul(seed.kappa, seed.kappa)) == 0:
        out.append("bad-kappa")
    m = seed.m_coeff
    if m.rows != k or m.cols != k:
        out.append("submatrix-singular")
    else:
        try:
            if not all_submatrices_invertible(m):
                out.append("submatrix-singular")
        except SizeCapError:
            # Above the exhaustive cap only Cauchy-built matrices are
            # accepted; their total invertibility is inherited from the
            # point sequences.
            if seed.cauchy_points is None:
                out.append("submatrix-singular")
            else:
                xs, ys = seed.cauchy_points
                if (len(set(xs)) != len(xs) or len(set(ys)) != len(ys)
                        or set(xs) & set(ys)):
                    out.append("submatrix-singular")
    if "bad-kappa" not in out and m.rows == k and m.cols == k:
        expect_u = vp.mul(m).scale(field.inv(seed.kappa))
        if expect_u.data != seed.u.data:
            out.append("u-mismatch")
    return out


def _default_m_coeff(k: int, field: FieldSpec):
    """Coefficient matrix for build_2k: Cauchy when the field allows it."""
    if field.order >= 2 * k:
        xs, ys = default_cauchy_points(field, k, k)
        return cauchy(field, xs, ys), (xs, ys)
    key = (k, field.order)
    if key in SMALL_FIELD_COEFFS:
        return FieldMatrix.from_rows(field, SMALL_FIELD_COEFFS[key]), None
    raise ConstructionError(
        f"{field.descriptor} is too small for a default {k}x{k} coefficient "
        f"matrix (need order >= {2 * k})", ["field-too-small"])


def build_2k(k: int, field: FieldSpec,
             v: FieldMatrix | None = None,
             m_coeff: FieldMatrix | None = None,
             kappa: int | None = None) -> MSRCode:
    """Construct the (2k, k, 2k-1) structured code.

    Defaults: V = I, the coefficient matrix is Cauchy over the first 2k
    field elements, and kappa is the smallest valid scaling constant.
    """
    if k < 1:
        raise ConstructionError("k must be positive")
    points = None
    if m_coeff is None:
        m_coeff, points = _default_m_coeff(k, field)
    if v is None:
        v = FieldMatrix.identity(field, k)
    if kappa is None:
        kappa = default_kappa(field)
    kappa = int(kappa) % field.order if field.kind == "prime" else int(kappa)

    try:
        vp = dual_basis(v)
    except SingularMatrixError:
        raise ConstructionError("basis matrix V is singular", ["singular-V"])
    if kappa == 0 or field.sub(1, field.mul(kappa, kappa)) == 0:
        raise ConstructionError(f"kappa={kappa} violates the scaling constraints",
                                ["bad-kappa"])
    u = vp.mul(m_coeff).scale(field.inv(kappa))
    seed = ConstructionSeed(v=v, m_coeff=m_coeff, kappa=kappa, u=u,
                            cauchy_points=points)
    bad = seed_violations(seed, k, field)
    if bad:
        raise ConstructionError(f"seed constraints violated: {', '.join(bad)}", bad)

    ident = FieldMatrix.identity(field, k)
    enc = []
    for l in range(k):
        row = []
        for i in range(k):
            block = FieldMatrix.outer(u.column(i), v.column(l)).add(
                ident.scale(m_coeff[l, i]))
            row.append(block)
        enc.append(tuple(row))
    params = CodeParams(n=2 * k, k=k, d=2 * k - 1, field=field)
    return MSRCode(params=params, kind="structured-2k", enc=tuple(enc), seed=seed)


def dual_structure(code: MSRCode) -> DualStructure:
    """Compute the blockwise inverse of the composite two ways and compare.

    The closed form rebuilds each block from the dual bases; the second
    path inverts the composite directly.  Disagreement means the seed
    constraints were violated.
    """
    if code.kind != "structured-2k" or code.seed is None:
        raise ConstructionError("dual structure needs a structured code with a seed")
    f = code.field
    k = code.params.k
    seed = code.seed
    kappa = seed.kappa
    denom = f.sub(1, f.mul(kappa, kappa))
    scale = f.inv(denom)
    ksq = f.mul(kappa, kappa)
    v_prime = dual_basis(seed.v)
    u_prime = dual_basis(seed.u)
    m_prime = seed.m_coeff.inverse()
    ident = FieldMatrix.identity(f, k)

    closed = []
    for l in range(k):
        row = []
        for i in range(k):
            block = FieldMatrix.outer(v_prime.column(i), u_prime.column(l)).sub(
                ident.scale(f.mul(ksq, m_prime[l, i]))).scale(scale)
            row.append(block)
        closed.append(tuple(row))

    try:
        inv = code.composite().inverse()
    except SingularMatrixError:
        raise ConstructionError("composite encoding matrix is singular",
                                ["singular-composite"])
    alpha = code.params.alpha
    for l in range(k):
        for i in range(k):
            rows = range(l * alpha, (l + 1) * alpha)
            cols = range(i * alpha, (i + 1) * alpha)
            if inv.submatrix(rows, cols).data != closed[l][i].data:
                raise ConstructionError(
                    "dual closed form disagrees with the composite inverse "
                    f"at block ({l + 1},{i + 1})", ["dual-mismatch"])
    return DualStructure(enc_prime=tuple(closed), u_prime=u_prime,
                         v_prime=v_prime, m_prime=m_prime)


def puncture(parent: MSRCode, n: int, k: int, d: int) -> MSRCode:
    """Derive an (n, k, d) code from a (2(n-k), n-k, 2(n-k)-1) parent.

    Drops the last n-2k information units together with their systematic
    nodes, then prunes the trailing n-1-d stored symbols of every node and
    the trailing n-1-d symbols of every remaining unit.  Encoding matrices
    shrink to their leading alpha-by-alpha corner.
    """
    if parent.kind != "structured-2k" or parent.seed is None:
        raise ConstructionError("puncturing needs a structured parent with a seed")
    big_k = parent.params.k
    if parent.params.n != 2 * big_k or big_k != n - k:
        raise ConstructionError(
            f"parent ({parent.params.n},{parent.params.k},{parent.params.d}) does "
            f"not match target ({n},{k},{d})")
    if n < 2 * k or not (2 * k - 1 <= d <= n - 1):
        raise UnsupportedParametersError(
            f"target ({n},{k},{d}) outside n >= 2k, 2k-1 <= d <= n-1")
    removed = n - 2 * k
    pruned = n - 1 - d
    if removed == 0 and pruned == 0:
        return parent
    alpha = d - k + 1
    enc = []
    for l in range(k):
        row = []
        for i in range(big_k):
            big = parent.enc[l][i]
            row.append(big.submatrix(range(alpha), range(alpha)))
        enc.append(tuple(row))
    params = CodeParams(n=n, k=k, d=d, field=parent.field)
    info = PunctureInfo(parent=parent,
                        removed_units=tuple(range(k + 1, big_k + 1)),
                        pruned_symbols=pruned)
    return MSRCode(params=params, kind="punctured", enc=tuple(enc),
                   seed=parent.seed, puncture=info)


def build_replication(n: int, d: int, field: FieldSpec) -> MSRCode:
    """The k = 1 code: every node stores the unit verbatim."""
    params = CodeParams(n=n, k=1, d=d, field=field)
    ident = FieldMatrix.identity(field, params.alpha)
    enc = ((ident,) * (n - 1),)
    return MSRCode(params=params, kind="replication", enc=enc)


def build_general(n: int, k: int, d: int, field: FieldSpec | None = None) -> MSRCode:
    """Construct an (n, k, d) code for n >= 2k, d >= 2k-1.

    Builds the (2(n-k), n-k, 2(n-k)-1) structured code and punctures it
    down.  The default field is the smallest supported one of order at
    least 2(n-k).
    """
    if k < 1 or n < 2 * k or not (max(k, 2 * k - 1) <= d <= n - 1):
        raise UnsupportedParametersError(
            f"({n},{k},{d}) outside the supported region n >= 2k, 2k-1 <= d <= n-1")
    if field is None:
        field = smallest_field(2 * (n - k))
    if k == 1:
        # Single-unit codes are degenerate: the elementary-block family
        # needs a usable kappa, which tiny fields lack, and plain
        # replication already sits at the optimal point.
        if n == 2:
            try:
                return build_2k(1, field)
            except ConstructionError:
                return build_replication(n, d, field)
        parent = build_2k(n - 1, field)
        return puncture(parent, n, k, d)
    parent = build_2k(n - k, field)
    return puncture(parent, n, k, d)


# -- the (5, 3, 4) family ---------------------------------------------------


def _lemma_blocks(field: FieldSpec, a: int, b: int):
    two = 2
    m = field.mul
    a2 = m(two, a)
    b2 = m(two, b)
    blocks = {
        "A1": ((a2, 0), (b2, b)),
        "B1": ((a, a2), (0, b2)),
        "C1": ((a2, 0), (b, b2)),
        "A2": ((a2, 0), (b, b2)),
        "B2": ((a, a2), (0, b)),
        "C2": ((a, 0), (b2, b2)),
    }
    return {name: FieldMatrix.from_rows(field, rows) for name, rows in blocks.items()}


def build_53(a, b) -> MSRCode:
    """The (5, 3, 4) code over GF(3) from a pair of nonzero scalars."""
    field = prime_field(3)
    a = int(a) % 3
    b = int(b) % 3
    if a == 0 or b == 0:
        raise ConstructionError("both scalars must be nonzero", ["zero-parameter"])
    blocks = _lemma_blocks(field, a, b)
    enc = (
        (blocks["A1"], blocks["A2"]),
        (blocks["B1"], blocks["B2"]),
        (blocks["C1"], blocks["C2"]),
    )
    params = CodeParams(n=5, k=3, d=4, field=field)
    return MSRCode(params=params, kind="five-three", enc=enc, ab_pair=(a, b))


@dataclass(frozen=True)
class FiveThreeDual:
    """Remapped encoding matrices of the (5,3) code.

    ``enc_prime[l-1][i-1]`` follows the same unit-major layout as
    MSRCode.enc for the two remapped parity units; the third unit stays in
    place, so the composite inverse has an identity block in its corner.
    """

    enc_prime: tuple
    composite: FieldMatrix
    inverse: FieldMatrix


def five_three_composite(code: MSRCode) -> FieldMatrix:
    """Block matrix [[A1,A2,0],[B1,B2,0],[C1,C2,I]] of the (5,3) remap."""
    f = code.field
    z = FieldMatrix.zero(f, 2, 2)
    ident = FieldMatrix.identity(f, 2)
    e = code.enc
    return block_compose(f, [
        [e[0][0], e[0][1], z],
        [e[1][0], e[1][1], z],
        [e[2][0], e[2][1], ident],
    ])


def build_53_dual(code: MSRCode) -> FiveThreeDual:
    """Invert the (5,3) remap composite and check the closed-form blocks."""
    if code.kind != "five-three":
        raise ConstructionError("dual remap is specific to the (5,3) family")
    f = code.field
    a, b = code.ab_pair
    ia, ib = f.inv(a), f.inv(b)
    m = f.mul
    closed = {
        "A1p": ((ia, ib), (ia, 0)),
        "B1p": ((ia, m(2, ib)), (ia, 0)),
        "C1p": ((0, m(2, m(a, ib))), (m(2, m(b, ia)), 1)),
        "A2p": ((0, ib), (ia, ib)),
        "B2p": ((0, m(2, ib)), (ia, m(2, ib))),
        "C2p": ((0, m(2, m(a, ib))), (m(2, m(b, ia)), 1)),
    }
    closed = {k2: FieldMatrix.from_rows(f, rows) for k2, rows in closed.items()}
    comp = five_three_composite(code)
    inv = comp.inverse()
    layout = [("A1p", 0, 0), ("A2p", 0, 1), ("B1p", 1, 0), ("B2p", 1, 1),
              ("C1p", 2, 0), ("C2p", 2, 1)]
    for name, l, i in layout:
        got = inv.submatrix(range(2 * l, 2 * l + 2), range(2 * i, 2 * i + 2))
        if got.data != closed[name].data:
            raise ConstructionError(
                f"remap inverse disagrees with the closed form at {name}",
                ["dual-mismatch"])
    enc_prime = (
        (closed["A1p"], closed["A2p"]),
        (closed["B1p"], closed["B2p"]),
        (closed["C1p"], closed["C2p"]),
    )
    return FiveThreeDual(enc_prime=enc_prime, composite=comp, inverse=inv)


def fixture_42_gf5() -> MSRCode:
    """The small (4, 2, 3) review code over GF(5) with diagonal parities."""
    f = prime_field(5)
    a1 = FieldMatrix.from_rows(f, [[1, 0], [0, 2]])
    a2 = FieldMatrix.from_rows(f, [[2, 0], [0, 1]])
    ident = FieldMatrix.identity(f, 2)
    enc = ((a1, a2), (ident, ident))
    params = CodeParams(n=4, k=2, d=3, field=f)
    return MSRCode(params=params, kind="fixture", enc=enc, name="gf5-423-diagonal")


def build_ref_635(bi_orthogonal: bool = False, field: FieldSpec | None = None) -> MSRCode:
    """The two reference (6,3,5) codes over GF(4).

    The orthogonal variant uses V = I; the bi-orthogonal one chooses
    V = kappa^{-1} M^t so that U collapses to the identity and parity
    repair becomes the cheap direction.
    """
    f = field or field_of_order(4)
    m = FieldMatrix.from_rows(f, SMALL_FIELD_COEFFS[(3, 4)])
    kappa = 3
    if bi_orthogonal:
        v = m.transpose().scale(f.inv(kappa))
        return build_2k(3, f, v=v, m_coeff=m, kappa=kappa)
    return build_2k(3, f, m_coeff=m, kappa=kappa)
