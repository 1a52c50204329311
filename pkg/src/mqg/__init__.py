"""Finite-dimensional measured quantum groupoids: structure, unitaries, antipode, modulus."""

__version__ = "0.1.0"

from .algebra import BranchCutError, MultiMatrixAlgebra, StructureError, Weight
from .antipode import build_antipode, check_antipode
from .constructors import (build_example, direct_sum, from_group_algebra, from_groupoid_commutative,
                           from_groupoid_symmetric, from_weak_hopf, pair_groupoid, pairs_quantum_groupoid,
                           quantum_space_quantum_groupoid, shipped_examples, tensor_product)
from .derived import DerivedStructure, derive, verify
from .hopf import MeasuredQuantumGroupoid, check_all, check_bimodule
from .modulus import build_P, check_manageability, check_uniqueness, extract_modulus, rebase_weight
from .report import CheckResult, Report
from .unitary import build_U, build_W, build_W_prime, check_pentagon

__all__ = [
    "BranchCutError",
    "CheckResult",
    "DerivedStructure",
    "MeasuredQuantumGroupoid",
    "MultiMatrixAlgebra",
    "Report",
    "StructureError",
    "Weight",
    "__version__",
    "build_P",
    "build_U",
    "build_W",
    "build_W_prime",
    "build_antipode",
    "build_example",
    "check_all",
    "check_antipode",
    "check_bimodule",
    "check_manageability",
    "check_pentagon",
    "check_uniqueness",
    "derive",
    "direct_sum",
    "extract_modulus",
    "from_group_algebra",
    "from_groupoid_commutative",
    "from_groupoid_symmetric",
    "from_weak_hopf",
    "pair_groupoid",
    "pairs_quantum_groupoid",
    "quantum_space_quantum_groupoid",
    "rebase_weight",
    "shipped_examples",
    "tensor_product",
    "verify",
]
