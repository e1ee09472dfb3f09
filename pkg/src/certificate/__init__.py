# Certificate Module
from src.certificate.report import (
    BoundMode,
    CertificateReport,
    ElementCertificate,
    Theorem,
    TheoremInapplicableError,
)
from src.certificate.conditions import (
    FULL_G,
    RELATIVE_G,
    certify,
    certify_1d,
    certify_2d,
    certify_semilinear,
    delta_T,
    p_star,
)
from src.certificate.stieltjes import MatrixEntry, StieltjesVerdict, stieltjes_check

__all__ = [
    "BoundMode",
    "CertificateReport",
    "ElementCertificate",
    "Theorem",
    "TheoremInapplicableError",
    "FULL_G",
    "RELATIVE_G",
    "certify",
    "certify_1d",
    "certify_2d",
    "certify_semilinear",
    "delta_T",
    "p_star",
    "MatrixEntry",
    "StieltjesVerdict",
    "stieltjes_check",
]
