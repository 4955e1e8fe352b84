"""Certificates for approximate error correction of covariant quantum codes."""

from .certifier import CertReport, certify, certify_erasure_transversal, epsilon_min, exact_ek_gap
from .channels import GroupRep, QuantumChannel
from .minentropy import hmin
from .wstate import WCodeParams

__all__ = [
    "CertReport",
    "GroupRep",
    "QuantumChannel",
    "WCodeParams",
    "certify",
    "certify_erasure_transversal",
    "epsilon_min",
    "exact_ek_gap",
    "hmin",
]
