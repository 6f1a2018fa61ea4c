"""Exact-repair plans: one projected symbol from each of d survivors.

A plan fixes the survivor set, one projection vector per survivor and the
reconstruction map R.  Structural planners pick projections from the code
structure (dual-basis columns, u-columns, eigenvector chains); R is then
the unique linear map satisfying ``R @ W = E_f`` where W stacks the
projected share maps and E_f is the failed node's share map.  That matrix
identity is checked at plan time, so a returned plan is exact for every
message, not just sampled ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .codec import NodeShare, share_matrix
from .construct import MSRCode, build_53_dual, dual_structure
from .matrix import (
    FieldMatrix,
    FieldVector,
    SingularMatrixError,
    eigen_small,
)


class RepairError(Exception):
    pass


class AlignmentError(RepairError):
    """Interference did not collapse to rank 1; the code is invalid."""


class RankDeficiencyError(RepairError):
    """Desired-signal coefficients are not full rank; the code is invalid."""


class NoEigenvectorError(RepairError):
    pass


class SearchSpaceError(RepairError):
    """Brute-force search space exceeds the guard."""


class SearchExhaustedError(RepairError):
    """No projection tuple at one symbol per link determines the lost share."""


class PlanMismatchError(RepairError):
    """Survivor shares handed to execute_repair do not match the plan."""


BRUTEFORCE_GUARD = 10 ** 7


@dataclass(frozen=True)
class BandwidthReport:
    links: int
    symbols: int
    naive: int

    @property
    def savings(self) -> Fraction:
        return Fraction(self.naive, self.symbols)


@dataclass(frozen=True)
class Download:
    survivor: int
    symbol: int


@dataclass(frozen=True)
class RepairPlan:
    failed: int
    survivors: tuple            # ascending node ids, length d
    projections: tuple          # FieldVector per survivor, same order
    recon: FieldMatrix          # alpha x d
    path: str                   # which derivation produced the plan

    @property
    def d(self) -> int:
        return len(self.survivors)

    def projection_for(self, node: int) -> FieldVector:
        return self.projections[self.survivors.index(node)]


def default_survivors(code: MSRCode, failed: int) -> tuple:
    """The d lowest-numbered nodes other than the failed one."""
    p = code.params
    others = [i for i in range(1, p.n + 1) if i != failed]
    return tuple(others[:p.d])


def _check_survivors(code: MSRCode, failed: int, survivors) -> tuple:
    p = code.params
    if not 1 <= failed <= p.n:
        raise RepairError(f"failed node {failed} outside 1..{p.n}")
    if survivors is None:
        return default_survivors(code, failed)
    survivors = tuple(sorted(int(s) for s in survivors))
    if len(survivors) != p.d:
        raise RepairError(f"need exactly d={p.d} survivors, got {len(survivors)}")
    if failed in survivors:
        raise RepairError("failed node listed as survivor")
    if any(not 1 <= s <= p.n for s in survivors):
        raise RepairError("survivor id out of range")
    return survivors


def download_matrix(code: MSRCode, survivors, projections) -> FieldMatrix:
    """Stacked functionals mapping the message to the d downloaded symbols."""
    rows = []
    for node, q in zip(survivors, projections):
        rows.append(share_matrix(code, node).apply_left(q).values)
    return FieldMatrix.from_rows(code.field, rows)


def solve_reconstruction(code: MSRCode, failed: int, survivors, projections):
    """R with R @ W = E_failed, or None when the downloads cannot determine
    the lost share."""
    w = download_matrix(code, survivors, projections)
    target = share_matrix(code, failed)
    x = w.transpose().solve_general(target.transpose())
    if x is None:
        return None
    return x.transpose()


def plan_is_exact(code: MSRCode, plan: RepairPlan) -> bool:
    """The symbolic identity: reconstruction equals the lost share map."""
    w = download_matrix(code, plan.survivors, plan.projections)
    return plan.recon.mul(w).data == share_matrix(code, plan.failed).data


def _finish(code: MSRCode, failed: int, survivors, projections, path: str) -> RepairPlan:
    recon = solve_reconstruction(code, failed, survivors, projections)
    if recon is None:
        raise RankDeficiencyError(
            f"projections for node {failed} do not determine the lost share")
    plan = RepairPlan(failed=failed, survivors=tuple(survivors),
                      projections=tuple(projections), recon=recon, path=path)
    if not plan_is_exact(code, plan):
        raise RepairError("reconstruction identity failed after solving")
    return plan


def _interference_rank(code: MSRCode, failed_unit: int, survivors, projections,
                       unit: int) -> int:
    """Rank of the projected coefficient vectors hitting one unwanted unit."""
    p = code.params
    rows = []
    for node, q in zip(survivors, projections):
        if code.is_systematic(node):
            vec = q if node == unit else FieldVector.zero(code.field, p.alpha)
        else:
            vec = code.enc_block(unit, node - p.k).apply(q)
        rows.append(vec.values)
    return FieldMatrix.from_rows(code.field, rows).rank()


# -- structured (2k, k, 2k-1) codes -------------------------------------------


_cached_dual = lru_cache(maxsize=None)(dual_structure)


def _plan_structured_systematic(code: MSRCode, failed: int, survivors) -> RepairPlan:
    from .matrix import dual_basis

    p = code.params
    v_prime = dual_basis(code.seed.v)
    q = v_prime.column(failed - 1).normalized()
    projections = [q] * len(survivors)
    for unit in range(1, p.k + 1):
        if unit == failed:
            continue
        if _interference_rank(code, failed, survivors, projections, unit) > 1:
            raise AlignmentError(
                f"unit {unit} interference not aligned while repairing {failed}")
    desired = FieldMatrix.from_columns(
        code.field,
        [code.enc_block(failed, i).apply(q) for i in range(1, p.parity_count + 1)])
    if desired.rank() != p.alpha:
        raise RankDeficiencyError(
            f"desired coefficients rank-deficient while repairing {failed}")
    return _finish(code, failed, survivors, projections, "structural")


def _plan_structured_parity(code: MSRCode, failed: int, survivors) -> RepairPlan:
    p = code.params
    i = failed - p.k
    dual = _cached_dual(code)
    r = code.seed.u.column(i - 1).normalized()
    projections = [r] * len(survivors)
    # In the remapped domain the parity units swap roles with the
    # systematic ones, so alignment is over the dual blocks.
    for j in range(1, p.k + 1):
        if j == i:
            continue
        rows = [r.values]
        for l in range(1, p.k + 1):
            rows.append(dual.enc_prime[j - 1][l - 1].apply(r).values)
        if FieldMatrix.from_rows(code.field, rows).rank() > 1:
            raise AlignmentError(
                f"dual unit {j} interference not aligned while repairing parity {i}")
    desired = FieldMatrix.from_columns(
        code.field,
        [dual.enc_prime[i - 1][l - 1].apply(r) for l in range(1, p.k + 1)])
    if desired.rank() != p.alpha:
        raise RankDeficiencyError(
            f"dual desired coefficients rank-deficient for parity {i}")
    return _finish(code, failed, survivors, projections, "dual-structural")


# -- punctured codes -----------------------------------------------------------


def _punctured_crop(vec: FieldVector, alpha: int) -> FieldVector:
    return FieldVector(vec.field, vec.values[:alpha])


def _plan_punctured_systematic(code: MSRCode, failed: int, survivors) -> RepairPlan:
    from .matrix import dual_basis

    p = code.params
    parent = code.puncture.parent
    sys_survivors = [s for s in survivors if code.is_systematic(s)]
    if len(sys_survivors) != p.k - 1:
        return _bruteforce_or_raise(code, failed, survivors,
                                    "survivor set lacks the systematic nodes")
    candidates = []
    cropped = _punctured_crop(dual_basis(parent.seed.v).column(failed - 1), p.alpha)
    if not cropped.is_zero():
        candidates.append(("structural-cropped", cropped.normalized()))
    # In-space dual: orthogonal to every other unit's cropped basis vector.
    v_bar = FieldMatrix.from_rows(
        code.field,
        [_punctured_crop(parent.seed.v.column(l), p.alpha).values
         for l in range(p.k)])
    rhs = FieldMatrix.from_rows(code.field,
                                [[1 if l == failed - 1 else 0] for l in range(p.k)])
    sol = v_bar.solve_general(rhs)
    if sol is not None:
        adapted = sol.column(0)
        if not adapted.is_zero():
            candidates.append(("structural-adapted", adapted.normalized()))
    for path, q in candidates:
        projections = [q] * len(survivors)
        aligned = all(
            _interference_rank(code, failed, survivors, projections, unit) <= 1
            for unit in range(1, p.k + 1) if unit != failed)
        if not aligned:
            continue
        recon = solve_reconstruction(code, failed, survivors, projections)
        if recon is not None:
            return _finish(code, failed, survivors, projections, path)
    return _bruteforce_or_raise(code, failed, survivors,
                                "no structural projection validated")


def _plan_punctured_parity(code: MSRCode, failed: int, survivors) -> RepairPlan:
    p = code.params
    parent = code.puncture.parent
    i = failed - p.k
    if len([s for s in survivors if code.is_systematic(s)]) != p.k:
        return _bruteforce_or_raise(code, failed, survivors,
                                    "survivor set lacks the systematic nodes")
    u_bar = _punctured_crop(parent.seed.u.column(i - 1), p.alpha)
    if u_bar.is_zero():
        return _bruteforce_or_raise(code, failed, survivors,
                                    "cropped u-column vanished")
    r = u_bar.normalized()
    projections = [r] * len(survivors)
    recon = solve_reconstruction(code, failed, survivors, projections)
    if recon is None:
        return _bruteforce_or_raise(code, failed, survivors,
                                    "cropped u-column plan failed validation")
    return _finish(code, failed, survivors, projections, "structural-cropped")


def _bruteforce_or_raise(code: MSRCode, failed: int, survivors, reason: str) -> RepairPlan:
    try:
        return bruteforce_plan_search(code, failed, survivors)
    except (SearchSpaceError, SearchExhaustedError) as exc:
        raise RankDeficiencyError(
            f"structural repair of node {failed} failed ({reason}) and "
            f"brute force was unavailable: {exc}") from exc


# -- the 2-unit review code ----------------------------------------------------


def _normalized_vectors(field, dim: int):
    """All projective representatives, first nonzero coordinate scaled to 1."""
    out = []
    for tup in product(field.elements(), repeat=dim):
        if not any(tup):
            continue
        vec = FieldVector(field, tup)
        if vec.normalized().values == tup:
            out.append(vec)
    return out


def _plan_fixture_systematic(code: MSRCode, failed: int, survivors) -> RepairPlan:
    p = code.params
    other = 2 if failed == 1 else 1
    for v in _normalized_vectors(code.field, p.alpha):
        projections = []
        usable = True
        for node in survivors:
            if code.is_systematic(node):
                projections.append(v)
                continue
            i = node - p.k
            try:
                q = code.enc_block(other, i).inverse().apply(v).normalized()
            except SingularMatrixError:
                usable = False
                break
            projections.append(q)
        if not usable:
            continue
        recon = solve_reconstruction(code, failed, survivors, projections)
        if recon is not None:
            return _finish(code, failed, survivors, projections, "structural")
    raise RankDeficiencyError(f"no aligned projection repairs node {failed}")


def _plan_fixture_parity(code: MSRCode, failed: int, survivors) -> RepairPlan:
    p = code.params
    f = code.field
    composite = code.composite()
    inv = composite.inverse()
    a = p.alpha
    dual = [[inv.submatrix(range(l * a, (l + 1) * a), range(i * a, (i + 1) * a))
             for i in range(p.k)] for l in range(p.k)]
    i = failed - p.k
    other = 2 if i == 1 else 1
    for v in _normalized_vectors(f, a):
        projections = []
        usable = True
        for node in survivors:
            if not code.is_systematic(node):
                projections.append(v)
                continue
            l = node
            try:
                q = dual[other - 1][l - 1].inverse().apply(v).normalized()
            except SingularMatrixError:
                usable = False
                break
            projections.append(q)
        if not usable:
            continue
        recon = solve_reconstruction(code, failed, survivors, projections)
        if recon is not None:
            return _finish(code, failed, survivors, projections, "structural")
    raise RankDeficiencyError(f"no aligned projection repairs node {failed}")


# -- the (5, 3, 4) family ------------------------------------------------------

# For each failed unit x the neighbour y is aligned directly and z through
# the eigenvector chain; (y, z) follows the cyclic order of the units.
_ROTATION = {1: (2, 3), 2: (3, 1), 3: (1, 2)}


def _eigen_chain(field, blocks, failed_unit: int):
    """Projection vectors for one unit of a 2x2 two-parity table.

    ``blocks[l][i]`` holds the unit-l matrix of parity i.  Returns
    (v_for_y, v_for_z, parity projections) before normalization.
    """
    x = failed_unit
    y, z = _ROTATION[x]
    y1, y2 = blocks[y - 1][0], blocks[y - 1][1]
    z1, z2 = blocks[z - 1][0], blocks[z - 1][1]
    x1, x2 = blocks[x - 1][0], blocks[x - 1][1]
    chain = y2.mul(z2.inverse()).mul(z1).mul(y1.inverse())
    pairs = eigen_small(chain)
    if not pairs:
        raise NoEigenvectorError("no eigenvector in the field for the alignment chain")
    for _, v in pairs:
        desired = FieldMatrix.from_columns(
            field, [x1.mul(y1.inverse()).apply(v), x2.mul(y2.inverse()).apply(v)])
        if desired.rank() != 2:
            continue
        partner = z1.mul(y1.inverse()).apply(v)
        parity = (y1.inverse().apply(v), y2.inverse().apply(v))
        return v, partner, parity
    raise RankDeficiencyError("eigenvectors exist but none decodes the desired unit")


def plan_53(code: MSRCode, failed: int, survivors=None) -> RepairPlan:
    """Eigenvector-aligned repair for the (5, 3, 4) family."""
    if code.kind != "five-three":
        raise RepairError("this planner is specific to the (5,3) family")
    survivors = _check_survivors(code, failed, survivors)
    p = code.params
    f = code.field
    if code.is_systematic(failed):
        blocks = code.enc
        v, partner, parity = _eigen_chain(f, blocks, failed)
        y, z = _ROTATION[failed]
        proj_by_node = {
            y: v.normalized(),
            z: partner.normalized(),
            4: parity[0].normalized(),
            5: parity[1].normalized(),
        }
    else:
        dual = build_53_dual(code)
        unit = failed - p.k            # remapped unit index: 1 -> a', 2 -> b'
        v, partner, parity = _eigen_chain(f, dual.enc_prime, unit)
        y, z = _ROTATION[unit]
        # Remapped units live at: 1 -> node 4, 2 -> node 5, 3 -> node 3;
        # the remapped parities are the original systematic nodes 1 and 2.
        unit_node = {1: 4, 2: 5, 3: 3}
        proj_by_node = {
            unit_node[y]: v.normalized(),
            unit_node[z]: partner.normalized(),
            1: parity[0].normalized(),
            2: parity[1].normalized(),
        }
    projections = [proj_by_node[s] for s in survivors]
    return _finish(code, failed, survivors, projections, "eigen")


# -- replication (k = 1) -------------------------------------------------------


def _plan_replication(code: MSRCode, failed: int, survivors) -> RepairPlan:
    f = code.field
    a = code.params.alpha
    projections = [FieldVector.unit(f, a, t) for t in range(len(survivors))]
    return _finish(code, failed, survivors, projections, "structural")


# -- public planners -----------------------------------------------------------


def plan_systematic(code: MSRCode, failed: int, survivors=None) -> RepairPlan:
    if not code.is_systematic(failed):
        raise RepairError(f"node {failed} is not systematic")
    survivors = _check_survivors(code, failed, survivors)
    if code.kind == "structured-2k":
        return _plan_structured_systematic(code, failed, survivors)
    if code.kind == "punctured":
        return _plan_punctured_systematic(code, failed, survivors)
    if code.kind == "fixture":
        return _plan_fixture_systematic(code, failed, survivors)
    if code.kind == "replication":
        return _plan_replication(code, failed, survivors)
    raise RepairError(f"no systematic planner for kind {code.kind!r}")


def plan_parity(code: MSRCode, failed: int, survivors=None) -> RepairPlan:
    if code.is_systematic(failed):
        raise RepairError(f"node {failed} is systematic")
    survivors = _check_survivors(code, failed, survivors)
    if code.kind == "structured-2k":
        return _plan_structured_parity(code, failed, survivors)
    if code.kind == "punctured":
        return _plan_punctured_parity(code, failed, survivors)
    if code.kind == "fixture":
        return _plan_fixture_parity(code, failed, survivors)
    if code.kind == "replication":
        return _plan_replication(code, failed, survivors)
    raise RepairError(f"no parity planner for kind {code.kind!r}")


def plan_for_node(code: MSRCode, failed: int, survivors=None) -> RepairPlan:
    """Dispatch to the right planner for the code kind and node type."""
    if code.kind == "five-three":
        return plan_53(code, failed, survivors)
    if code.is_systematic(failed):
        return plan_systematic(code, failed, survivors)
    return plan_parity(code, failed, survivors)


def bruteforce_plan_search(code: MSRCode, failed: int, survivors=None) -> RepairPlan:
    """Independent oracle: enumerate projection tuples until one works.

    Deterministic order: per survivor, normalized vectors sorted by value
    tuple; tuples iterated with the last survivor varying fastest.
    """
    survivors = _check_survivors(code, failed, survivors)
    p = code.params
    space = p.field.order ** (p.alpha * p.d)
    if space > BRUTEFORCE_GUARD:
        raise SearchSpaceError(
            f"search space {p.field.order}^{p.alpha * p.d} exceeds {BRUTEFORCE_GUARD}")
    vectors = _normalized_vectors(code.field, p.alpha)
    for tup in product(vectors, repeat=len(survivors)):
        recon = solve_reconstruction(code, failed, survivors, tup)
        if recon is not None:
            plan = RepairPlan(failed=failed, survivors=survivors,
                              projections=tuple(tup), recon=recon,
                              path="bruteforce")
            if plan_is_exact(code, plan):
                return plan
    raise SearchExhaustedError(
        f"no single-symbol-per-link plan repairs node {failed} from {survivors}")


@dataclass(frozen=True)
class RepairResult:
    share: NodeShare
    downloads: tuple
    bandwidth: BandwidthReport


def execute_repair(plan: RepairPlan, shares) -> RepairResult:
    """Project survivor shares, apply R, return the regenerated share."""
    by_node = {s.node: s for s in shares}
    if set(by_node) != set(plan.survivors):
        raise PlanMismatchError(
            f"shares {sorted(by_node)} do not match survivors {list(plan.survivors)}")
    downloads = []
    for node, q in zip(plan.survivors, plan.projections):
        downloads.append(Download(node, by_node[node].symbols.dot(q)))
    field = plan.recon.field
    vec = FieldVector.of(field, [d.symbol for d in downloads])
    lost = plan.recon.apply(vec)
    alpha = plan.recon.rows
    # d = k + alpha - 1 at the optimal point, so k falls out of the plan.
    naive = alpha * (plan.d - alpha + 1)
    return RepairResult(share=NodeShare(plan.failed, lost),
                        downloads=tuple(downloads),
                        bandwidth=BandwidthReport(links=plan.d, symbols=plan.d,
                                                  naive=naive))
