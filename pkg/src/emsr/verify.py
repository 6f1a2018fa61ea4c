"""Code certification: MDS sweep, exact repair, constraints, duals, bandwidth.

Reports are deterministic: the report hash covers the code hash and every
check's name, status and witnesses, never wall-clock timing.
"""

from __future__ import annotations

import hashlib
import random
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

from .codec import Message, collector_matrix, encode
from .construct import (
    MSRCode,
    build_53_dual,
    dual_structure,
    seed_violations,
)
from .matrix import FieldMatrix, SingularMatrixError
from .repair import RepairError, execute_repair, plan_for_node, plan_is_exact

MDS_SUBSET_GUARD = 10 ** 5
_REPAIR_SAMPLES = 20


class VerifyError(Exception):
    pass


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str                 # pass | fail | skipped
    witnesses: tuple = ()
    details: str = ""

    @property
    def passed(self) -> bool:
        return self.status != "fail"


@dataclass(frozen=True)
class VerificationReport:
    code_hash: str
    checks: tuple
    elapsed_ms: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def report_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.code_hash.encode())
        for c in self.checks:
            h.update(f"\n{c.name}|{c.status}|{','.join(map(str, c.witnesses))}|{c.details}".encode())
        return h.hexdigest()

    def render(self) -> str:
        lines = ["emsr-report 1", f"code {self.code_hash}"]
        for c in self.checks:
            line = f"check {c.name} {c.status}"
            if c.details:
                line += f" {c.details}"
            lines.append(line)
            for w in c.witnesses:
                lines.append(f"witness {c.name} {w}")
        lines.append(f"result {'pass' if self.passed else 'fail'}")
        lines.append(f"report-hash {self.report_hash()}")
        lines.append(f"# elapsed-ms {self.elapsed_ms}")
        return "\n".join(lines) + "\n"


def verify_mds(code: MSRCode) -> CheckResult:
    """Exhaustively decode-test every k-subset of nodes."""
    p = code.params
    total = comb(p.n, p.k)
    if total > MDS_SUBSET_GUARD:
        raise VerifyError(f"{total} subsets exceed the sweep guard {MDS_SUBSET_GUARD}")
    witnesses = []
    for subset in combinations(range(1, p.n + 1), p.k):
        composite = collector_matrix(code, subset)
        if composite.rank() != p.k * p.alpha:
            witnesses.append("nodes=" + ",".join(map(str, subset)))
    status = "fail" if witnesses else "pass"
    return CheckResult("mds", status, tuple(witnesses), f"subsets={total}")


def verify_exact_repair(code: MSRCode, samples: int = _REPAIR_SAMPLES) -> CheckResult:
    """Symbolic exactness for every node's plan plus sampled trips."""
    p = code.params
    rng = random.Random(0xE5C0DE)
    witnesses = []
    for failed in range(1, p.n + 1):
        try:
            plan = plan_for_node(code, failed)
        except RepairError as exc:
            witnesses.append(f"node={failed} plan-error={exc}")
            continue
        if not plan_is_exact(code, plan):
            witnesses.append(f"node={failed} identity-failed")
            continue
        for _ in range(samples):
            msg = Message.of(code, [[rng.randrange(p.field.order)
                                     for _ in range(p.alpha)] for _ in range(p.k)])
            shares = encode(code, msg)
            result = execute_repair(plan, [s for s in shares if s.node in plan.survivors])
            if result.share.symbols.values != shares[failed - 1].symbols.values:
                witnesses.append(f"node={failed} sampled-mismatch")
                break
    status = "fail" if witnesses else "pass"
    return CheckResult("repair", status, tuple(witnesses), f"nodes={p.n}")


def verify_construction(code: MSRCode) -> CheckResult:
    """Seed constraints for structured codes; parameter checks otherwise."""
    if code.kind in ("structured-2k", "punctured"):
        seed_k = code.seed.v.rows
        bad = seed_violations(code.seed, seed_k, code.field)
        status = "fail" if bad else "pass"
        return CheckResult("constraints", status, tuple(bad))
    if code.kind == "five-three":
        a, b = code.ab_pair
        bad = [] if (a and b) else ["zero-parameter"]
        return CheckResult("constraints", "fail" if bad else "pass", tuple(bad))
    return CheckResult("constraints", "skipped", (),
                       f"kind={code.kind} carries no seed")


def verify_dual(code: MSRCode) -> CheckResult:
    """Blockwise-inverse identity via both computation paths."""
    f = code.field
    if code.kind in ("structured-2k", "punctured"):
        base = code if code.kind == "structured-2k" else code.puncture.parent
        try:
            dual = dual_structure(base)
        except Exception as exc:
            return CheckResult("dual", "fail", (str(exc),))
        k = base.params.k
        prod = base.composite().mul(dual.composite(f))
        if prod.data != FieldMatrix.identity(f, k * base.params.alpha).data:
            return CheckResult("dual", "fail", ("composite-product-not-identity",))
        # u_i' expands over the primal basis through the inverted
        # coefficient matrix, scaled by kappa.
        lhs = dual.u_prime.transpose()
        rhs = dual.m_prime.mul(base.seed.v.transpose()).scale(base.seed.kappa)
        if lhs.data != rhs.data:
            return CheckResult("dual", "fail", ("u-prime-expansion",))
        detail = "via-parent" if code.kind == "punctured" else ""
        return CheckResult("dual", "pass", (), detail)
    if code.kind == "five-three":
        try:
            dual = build_53_dual(code)
        except Exception as exc:
            return CheckResult("dual", "fail", (str(exc),))
        prod = dual.composite.mul(dual.inverse)
        if prod.data != FieldMatrix.identity(f, 6).data:
            return CheckResult("dual", "fail", ("composite-product-not-identity",))
        return CheckResult("dual", "pass")
    return CheckResult("dual", "skipped", (), f"kind={code.kind} has no dual structure")


def verify_bandwidth(code: MSRCode) -> CheckResult:
    """Every plan moves exactly d symbols; storage sits at stripe/k."""
    p = code.params
    witnesses = []
    if p.alpha != p.stripe_symbols // p.k:
        witnesses.append("alpha-not-minimal")
    for failed in range(1, p.n + 1):
        try:
            plan = plan_for_node(code, failed)
        except RepairError as exc:
            witnesses.append(f"node={failed} plan-error={exc}")
            continue
        if plan.d != p.d or len(plan.projections) != p.d:
            witnesses.append(f"node={failed} downloads={plan.d}")
    savings = Fraction(p.k * p.alpha, p.d)
    status = "fail" if witnesses else "pass"
    return CheckResult("bandwidth", status, tuple(witnesses), f"savings={savings}")


def verify_code(code: MSRCode, code_hash: str = "") -> VerificationReport:
    """Run all applicable checks and assemble the report."""
    if not code_hash:
        from .specfile import code_identity
        code_hash = code_identity(code)
    start = time.monotonic()
    checks = (
        verify_construction(code),
        verify_mds(code),
        verify_exact_repair(code),
        verify_dual(code),
        verify_bandwidth(code),
    )
    elapsed = int((time.monotonic() - start) * 1000)
    return VerificationReport(code_hash=code_hash, checks=checks, elapsed_ms=elapsed)
