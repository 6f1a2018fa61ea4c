"""Dense matrix and vector algebra over a finite field.

Matrices are immutable, row-major tuples of canonical integer values with
an attached FieldSpec.  Pivoting is deterministic: the first row with a
nonzero entry in the pivot column wins, so echelon forms, inverses and
solutions are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .field import FieldElement, FieldMismatchError, FieldSpec


class LinalgError(Exception):
    pass


class DimensionError(LinalgError):
    pass


class SingularMatrixError(LinalgError):
    """Signals rank deficiency; callers may treat it as a decision."""


class SizeCapError(LinalgError):
    """Raised by deliberately exponential checks above their size cap."""


class InvalidSequenceError(LinalgError):
    """Bad point sequences for Cauchy matrix construction."""


def _as_value(field: FieldSpec, x) -> int:
    if isinstance(x, FieldElement):
        if x.field != field:
            raise FieldMismatchError("element bound to a different field")
        return x.value
    v = int(x)
    if field.kind == "prime":
        return v % field.order
    if not 0 <= v < field.order:
        raise LinalgError(f"value {v} outside field of order {field.order}")
    return v


@dataclass(frozen=True)
class FieldVector:
    field: FieldSpec
    values: tuple

    @classmethod
    def of(cls, field: FieldSpec, values) -> "FieldVector":
        return cls(field, tuple(_as_value(field, v) for v in values))

    @classmethod
    def zero(cls, field: FieldSpec, dim: int) -> "FieldVector":
        return cls(field, (0,) * dim)

    @classmethod
    def unit(cls, field: FieldSpec, dim: int, index: int) -> "FieldVector":
        return cls(field, tuple(1 if i == index else 0 for i in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> int:
        return self.values[i]

    def __iter__(self):
        return iter(self.values)

    def is_zero(self) -> bool:
        return not any(self.values)

    def dot(self, other: "FieldVector") -> int:
        if self.field != other.field or self.dim != other.dim:
            raise DimensionError("dot product needs matching fields and dimensions")
        f = self.field
        acc = 0
        for a, b in zip(self.values, other.values):
            acc = f.add(acc, f.mul(a, b))
        return acc

    def add(self, other: "FieldVector") -> "FieldVector":
        if self.field != other.field or self.dim != other.dim:
            raise DimensionError("vector addition needs matching fields and dimensions")
        f = self.field
        return FieldVector(f, tuple(f.add(a, b) for a, b in zip(self.values, other.values)))

    def scale(self, c) -> "FieldVector":
        f = self.field
        cv = _as_value(f, c)
        return FieldVector(f, tuple(f.mul(cv, a) for a in self.values))

    def normalized(self) -> "FieldVector":
        """Scale so the first nonzero coordinate becomes 1."""
        for v in self.values:
            if v:
                return self.scale(self.field.inv(v))
        return self

    def leading_ratio(self, other: "FieldVector"):
        """Scalar c with self == c * other, or None if not parallel."""
        if self.dim != other.dim:
            return None
        f = self.field
        c = None
        for a, b in zip(self.values, other.values):
            if b == 0:
                if a != 0:
                    return None
                continue
            r = f.div(a, b)
            if c is None:
                c = r
            elif c != r:
                return None
        if c is None:
            # other is the zero vector; parallel only if self is too.
            return 0 if self.is_zero() else None
        return c

    def literal(self) -> str:
        return ",".join(str(v) for v in self.values)


@dataclass(frozen=True)
class FieldMatrix:
    field: FieldSpec
    rows: int
    cols: int
    data: tuple  # row-major tuple of tuples

    @classmethod
    def from_rows(cls, field: FieldSpec, rows) -> "FieldMatrix":
        data = tuple(tuple(_as_value(field, v) for v in row) for row in rows)
        if not data or not data[0]:
            raise DimensionError("matrix needs at least one row and one column")
        width = len(data[0])
        if any(len(r) != width for r in data):
            raise DimensionError("ragged rows")
        return cls(field, len(data), width, data)

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "FieldMatrix":
        return cls.from_rows(field, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, field: FieldSpec, rows: int, cols: int) -> "FieldMatrix":
        return cls(field, rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def from_columns(cls, field: FieldSpec, columns) -> "FieldMatrix":
        cols = [list(c) for c in columns]
        return cls.from_rows(field, [[c[i] for c in cols] for i in range(len(cols[0]))])

    @classmethod
    def outer(cls, u: FieldVector, v: FieldVector) -> "FieldMatrix":
        f = u.field
        if v.field != f:
            raise FieldMismatchError("outer product needs one field")
        return cls.from_rows(f, [[f.mul(a, b) for b in v.values] for a in u.values])

    def __getitem__(self, rc) -> int:
        r, c = rc
        return self.data[r][c]

    def row(self, i: int) -> FieldVector:
        return FieldVector(self.field, self.data[i])

    def column(self, j: int) -> FieldVector:
        return FieldVector(self.field, tuple(r[j] for r in self.data))

    def is_square(self) -> bool:
        return self.rows == self.cols

    # -- arithmetic --------------------------------------------------------

    def _check_same_field(self, other: "FieldMatrix"):
        if self.field != other.field:
            raise FieldMismatchError("matrices over different fields")

    def add(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_same_field(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionError("shape mismatch in addition")
        f = self.field
        return FieldMatrix(f, self.rows, self.cols, tuple(
            tuple(f.add(a, b) for a, b in zip(ra, rb))
            for ra, rb in zip(self.data, other.data)))

    def sub(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_same_field(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionError("shape mismatch in subtraction")
        f = self.field
        return FieldMatrix(f, self.rows, self.cols, tuple(
            tuple(f.sub(a, b) for a, b in zip(ra, rb))
            for ra, rb in zip(self.data, other.data)))

    def scale(self, c) -> "FieldMatrix":
        f = self.field
        cv = _as_value(f, c)
        return FieldMatrix(f, self.rows, self.cols, tuple(
            tuple(f.mul(cv, a) for a in row) for row in self.data))

    def mul(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_same_field(other)
        if self.cols != other.rows:
            raise DimensionError(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        f = self.field
        bt = tuple(zip(*other.data))
        out = []
        for arow in self.data:
            orow = []
            for bcol in bt:
                acc = 0
                for a, b in zip(arow, bcol):
                    if a and b:
                        acc = f.add(acc, f.mul(a, b))
                orow.append(acc)
            out.append(tuple(orow))
        return FieldMatrix(f, self.rows, other.cols, tuple(out))

    def __mul__(self, other):
        if isinstance(other, FieldMatrix):
            return self.mul(other)
        return NotImplemented

    def apply(self, v: FieldVector) -> FieldVector:
        """Matrix times column vector."""
        if v.field != self.field or v.dim != self.cols:
            raise DimensionError("vector does not conform")
        f = self.field
        out = []
        for row in self.data:
            acc = 0
            for a, b in zip(row, v.values):
                if a and b:
                    acc = f.add(acc, f.mul(a, b))
            out.append(acc)
        return FieldVector(f, tuple(out))

    def apply_left(self, v: FieldVector) -> FieldVector:
        """Row vector times matrix."""
        if v.field != self.field or v.dim != self.rows:
            raise DimensionError("vector does not conform")
        f = self.field
        out = []
        for j in range(self.cols):
            acc = 0
            for i in range(self.rows):
                a = v.values[i]
                b = self.data[i][j]
                if a and b:
                    acc = f.add(acc, f.mul(a, b))
            out.append(acc)
        return FieldVector(f, tuple(out))

    def transpose(self) -> "FieldMatrix":
        return FieldMatrix(self.field, self.cols, self.rows, tuple(zip(*self.data)))

    # -- elimination -------------------------------------------------------

    def _echelon(self, augment: "FieldMatrix | None" = None):
        """Reduced row echelon form; returns (rows, aug_rows, pivot_cols)."""
        f = self.field
        rows = [list(r) for r in self.data]
        aug = [list(r) for r in augment.data] if augment is not None else None
        pivots = []
        r = 0
        for c in range(self.cols):
            pivot = None
            for i in range(r, self.rows):
                if rows[i][c]:
                    pivot = i
                    break
            if pivot is None:
                continue
            rows[r], rows[pivot] = rows[pivot], rows[r]
            if aug is not None:
                aug[r], aug[pivot] = aug[pivot], aug[r]
            inv = f.inv(rows[r][c])
            if inv != 1:
                rows[r] = [f.mul(inv, x) for x in rows[r]]
                if aug is not None:
                    aug[r] = [f.mul(inv, x) for x in aug[r]]
            for i in range(self.rows):
                if i != r and rows[i][c]:
                    factor = rows[i][c]
                    rows[i] = [f.sub(x, f.mul(factor, y)) for x, y in zip(rows[i], rows[r])]
                    if aug is not None:
                        aug[i] = [f.sub(x, f.mul(factor, y)) for x, y in zip(aug[i], aug[r])]
            pivots.append(c)
            r += 1
            if r == self.rows:
                break
        return rows, aug, pivots

    def rank(self) -> int:
        _, _, pivots = self._echelon()
        return len(pivots)

    def inverse(self) -> "FieldMatrix":
        if not self.is_square():
            raise DimensionError("only square matrices have inverses")
        _, aug, pivots = self._echelon(FieldMatrix.identity(self.field, self.rows))
        if len(pivots) != self.rows:
            raise SingularMatrixError(f"rank {len(pivots)} < {self.rows}")
        return FieldMatrix.from_rows(self.field, aug)

    def det_nonzero(self) -> bool:
        return self.is_square() and self.rank() == self.rows

    def solve(self, y: FieldVector) -> FieldVector:
        """Solve A x = y for square invertible A."""
        if not self.is_square():
            raise DimensionError("solve expects a square matrix")
        if y.dim != self.rows:
            raise DimensionError("right-hand side does not conform")
        col = FieldMatrix.from_rows(self.field, [[v] for v in y.values])
        _, aug, pivots = self._echelon(col)
        if len(pivots) != self.rows:
            raise SingularMatrixError("singular system")
        return FieldVector(self.field, tuple(r[0] for r in aug))

    def solve_general(self, rhs: "FieldMatrix") -> "FieldMatrix | None":
        """A canonical X with self @ X = rhs, or None when inconsistent.

        Free variables are set to zero, so the solution is deterministic.
        """
        if rhs.rows != self.rows:
            raise DimensionError("right-hand side does not conform")
        rows, aug, pivots = self._echelon(rhs)
        # Inconsistent if a zero row on the left has a nonzero right side.
        for i in range(len(pivots), self.rows):
            if any(aug[i]):
                return None
        out = [[0] * rhs.cols for _ in range(self.cols)]
        for r, c in enumerate(pivots):
            out[c] = list(aug[r])
        return FieldMatrix.from_rows(self.field, out)

    def null_space_vector(self) -> FieldVector | None:
        """Canonical nonzero kernel vector, or None for full column rank."""
        rows, _, pivots = self._echelon()
        pivot_set = set(pivots)
        free = [c for c in range(self.cols) if c not in pivot_set]
        if not free:
            return None
        f = self.field
        c0 = free[0]
        vec = [0] * self.cols
        vec[c0] = 1
        for r, c in enumerate(pivots):
            vec[c] = f.neg(rows[r][c0])
        return FieldVector(f, tuple(vec)).normalized()

    def submatrix(self, row_idx, col_idx) -> "FieldMatrix":
        return FieldMatrix.from_rows(
            self.field, [[self.data[i][j] for j in col_idx] for i in row_idx])

    def literal(self) -> str:
        return ";".join(",".join(str(v) for v in row) for row in self.data)

    def __str__(self):
        return "\n".join(" ".join(f"{v:>3}" for v in row) for row in self.data)


def parse_matrix(field: FieldSpec, literal: str) -> FieldMatrix:
    """Parse ``"3,0,0;2,1,0;2,0,1"`` (rows ';'-separated, entries ',')."""
    rows = [part.split(",") for part in literal.strip().split(";")]
    return FieldMatrix.from_rows(field, [[int(v) for v in row] for row in rows])


def parse_vector(field: FieldSpec, literal: str) -> FieldVector:
    return FieldVector.of(field, [int(v) for v in literal.strip().split(",")])


def dual_basis(v: FieldMatrix) -> FieldMatrix:
    """Columns v_i' with v_i'^t v_j = 1 iff i == j, i.e. (V^t)^{-1}."""
    if not v.is_square():
        raise DimensionError("dual basis needs a square basis matrix")
    return v.transpose().inverse()


def cauchy(field: FieldSpec, xs, ys) -> FieldMatrix:
    """Matrix with entries 1/(x_i - y_j); sequences must be injective and disjoint."""
    xs = [_as_value(field, x) for x in xs]
    ys = [_as_value(field, y) for y in ys]
    if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
        raise InvalidSequenceError("point sequences must have distinct entries")
    if set(xs) & set(ys):
        raise InvalidSequenceError("row and column points must not overlap")
    return FieldMatrix.from_rows(
        field, [[field.inv(field.sub(x, y)) for y in ys] for x in xs])


def default_cauchy_points(field: FieldSpec, rows: int, cols: int):
    """Fixed convention: x = first `rows` field elements, y = the next `cols`."""
    if rows + cols > field.order:
        raise InvalidSequenceError(
            f"field of order {field.order} too small for {rows}+{cols} distinct points")
    return tuple(range(rows)), tuple(range(rows, rows + cols))


ALL_SUBMATRIX_CAP = 8


def all_submatrices_invertible(m: FieldMatrix, cap: int = ALL_SUBMATRIX_CAP) -> bool:
    """Exhaustively test every square submatrix for invertibility.

    Exponential by design; refuses matrices larger than `cap` on a side.
    """
    if max(m.rows, m.cols) > cap:
        raise SizeCapError(
            f"{m.rows}x{m.cols} exceeds the exhaustive-check cap of {cap}")
    for size in range(1, min(m.rows, m.cols) + 1):
        for ri in combinations(range(m.rows), size):
            for ci in combinations(range(m.cols), size):
                if not m.submatrix(ri, ci).det_nonzero():
                    return False
    return True


def eigen_small(a: FieldMatrix):
    """All (eigenvalue, eigenvector) pairs found by scanning the field.

    Intended for matrices up to 3x3.  Each eigenvector is the canonical
    kernel vector of A - lambda*I, scaled so its first nonzero entry is 1.
    An empty result means no eigenvector exists in the field.
    """
    if not a.is_square():
        raise DimensionError("eigen scan expects a square matrix")
    if a.rows > 3:
        raise SizeCapError("eigen scan is limited to matrices up to 3x3")
    f = a.field
    out = []
    ident = FieldMatrix.identity(f, a.rows)
    for lam in f.elements():
        shifted = a.sub(ident.scale(lam))
        vec = shifted.null_space_vector()
        if vec is not None:
            out.append((lam, vec))
    return out


def block_compose(field: FieldSpec, blocks) -> FieldMatrix:
    """Flatten a 2-D table of conforming blocks, row-block-major."""
    if not blocks or not blocks[0]:
        raise DimensionError("empty block table")
    col_widths = [b.cols for b in blocks[0]]
    rows_out = []
    for block_row in blocks:
        if len(block_row) != len(col_widths):
            raise DimensionError("ragged block table")
        height = block_row[0].rows
        for j, b in enumerate(block_row):
            if b.field != field:
                raise FieldMismatchError("blocks over different fields")
            if b.rows != height or b.cols != col_widths[j]:
                raise DimensionError("blocks do not conform")
        for r in range(height):
            row = []
            for b in block_row:
                row.extend(b.data[r])
            rows_out.append(row)
    return FieldMatrix.from_rows(field, rows_out)
