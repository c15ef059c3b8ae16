"""Numerical auditing of (h-m)-convexity and its Hadamard-type inequalities."""

from .convexity import (
    Domain,
    HMParams,
    MembershipReport,
    ViolationCertificate,
    check_membership,
    compare_kernels,
    defect,
    verify_closure,
)
from .errors import (
    DivergenceError,
    EvaluationDomainError,
    HMCXError,
    NonNegativityError,
    NumericalError,
    ValidationError,
)
from .expr import FunctionExpr, Kernel, evaluate, parse
from .inequalities import (
    AuditSpec,
    InequalityReport,
    ToleranceSpec,
    audit,
    audit_classical,
    audit_thm4,
    audit_thm5,
    audit_thm8,
)
from .quadrature import KernelMoments, QuadResult, integrate, kernel_moments
from .reductions import CATALOG, ReductionCase, verify_reduction

__version__ = "0.1.0"
