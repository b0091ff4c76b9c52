"""Moment matching and structure-preserving reduction of port-Hamiltonian systems."""

from importlib.resources import files as _files

from .errors import *  # noqa: F401,F403
from .errors import __all__ as _err_all
from .io import load_document, parse_document, save_document, write_document
from .linalg import SylvesterForm, solve_sylvester, sylvester_residual
from .moments import MomentVector, SylvesterSolution, moment_derivative_oracle, moments_finite, moments_markov
from .reduction import (
    BasisEquivalence,
    KrylovBasis,
    MatchCertificate,
    Reduction,
    basis_equivalence,
    descriptor_companion_family,
    family_left,
    family_right,
    krylov_basis,
    markov_krylov_basis,
    mirror_points,
    ph_gain,
    project,
    realify_generator,
    reduce_descriptor_markov,
    reduce_ph_finite,
    reduce_ph_krylov,
    reduce_ph_markov,
)
from .simulation import SimResult, energy_audit, simulate_left, simulate_right, sinusoid_phasor
from .systems import (
    DescriptorModel,
    GeneratorLeft,
    GeneratorRight,
    LtiSystem,
    PortHamiltonianSystem,
    expansion_at_infinity,
    ladder_system,
    markov_parameters,
    smib_system,
    transfer_eval,
)
from .verification import (
    Check,
    VerificationReport,
    check_ph_structure,
    passivity_check,
    passivity_data,
    ph_from_certificate,
    ph_from_certificate_left,
    verify_certificate,
    verify_finite_match,
    verify_markov_match,
    verify_moments,
)

__version__ = "0.1.0"


def fixture_path(name: str):
    """Path to a shipped JSON fixture such as ``'ladder.json'``."""
    return _files(__name__).joinpath("data", name)


__all__ = [
    "BasisEquivalence", "Check", "DescriptorModel", "GeneratorLeft", "GeneratorRight", "KrylovBasis",
    "LtiSystem", "MatchCertificate", "MomentVector", "PortHamiltonianSystem", "Reduction", "SimResult",
    "SylvesterForm", "SylvesterSolution", "VerificationReport", "basis_equivalence", "check_ph_structure",
    "descriptor_companion_family", "energy_audit", "expansion_at_infinity", "family_left", "family_right",
    "fixture_path", "krylov_basis", "ladder_system", "load_document", "markov_krylov_basis",
    "markov_parameters", "mirror_points", "moment_derivative_oracle", "moments_finite", "moments_markov",
    "parse_document", "passivity_check", "passivity_data", "ph_from_certificate", "ph_from_certificate_left",
    "ph_gain", "project", "realify_generator", "reduce_descriptor_markov", "reduce_ph_finite",
    "reduce_ph_krylov", "reduce_ph_markov", "save_document", "simulate_left", "simulate_right",
    "sinusoid_phasor", "smib_system", "solve_sylvester", "sylvester_residual", "transfer_eval",
    "verify_certificate", "verify_finite_match", "verify_markov_match", "verify_moments", "write_document",
] + list(_err_all)
