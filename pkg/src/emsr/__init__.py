"""Exact-repair MSR erasure codes over small finite fields."""

from .field import (
    FieldElement,
    FieldError,
    FieldMismatchError,
    FieldSpec,
    binary_field,
    field_of_order,
    parse_field,
    prime_field,
    smallest_field,
)
from .matrix import (
    FieldMatrix,
    FieldVector,
    SingularMatrixError,
    all_submatrices_invertible,
    block_compose,
    cauchy,
    dual_basis,
    eigen_small,
    parse_matrix,
    parse_vector,
)
from .construct import (
    CodeParams,
    ConstructionError,
    ConstructionSeed,
    DualStructure,
    MSRCode,
    UnsupportedParametersError,
    build_2k,
    build_53,
    build_53_dual,
    build_general,
    build_ref_635,
    dual_structure,
    fixture_42_gf5,
    puncture,
)
from .codec import Message, MdsViolationError, NodeShare, dc_decode, encode
from .repair import (
    BandwidthReport,
    RepairError,
    RepairPlan,
    bruteforce_plan_search,
    execute_repair,
    plan_53,
    plan_for_node,
    plan_parity,
    plan_systematic,
)
from .verify import VerificationReport, verify_code
from .specfile import code_identity, dump_code, load_code

__version__ = "0.1.0"
