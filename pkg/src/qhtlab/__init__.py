"""Holonomy-diffeomorphisms, translations and a Bott-Dirac operator on a truncated lattice 3-torus."""

from .bott_dirac import assemble_bott_dirac, bott_dirac_square, commutator_growth_profile, spectrum, verify_square_closed_form
from .fock import FermionState, clifford_c, clifford_cbar, exterior_power_map, ext, ext_op, int_, int_op
from .fock_rep import FockRepresentation, FockSectorState, SigmaSpaceVector
from .forms import AnalyticConnection, Connection, LatticeSpinor, OneForm
from .holonomy import apply_holonomy_diffeo, holonomy, load_connection, save_connection, transport
from .lattice import LatticeTorus, VectorField, build_torus, flow_jacobian, integrate_flow, pullback_oneform
from .operators import BasisSpec, TruncatedOperator
from .oscillator import BosonicState, ModeParams, embed_vacuum, mode_matrices, vacuum
from .qhd import QHDRepresentation, YMState
from .sobolev import SobolevBasis, SobolevParams, build_sobolev_basis, coords_to_connection, hodge_laplacian, sobolev_inner

__version__ = "0.1.0"

__all__ = [
    "AnalyticConnection",
    "BasisSpec",
    "BosonicState",
    "Connection",
    "FermionState",
    "FockRepresentation",
    "FockSectorState",
    "LatticeSpinor",
    "LatticeTorus",
    "ModeParams",
    "OneForm",
    "QHDRepresentation",
    "SigmaSpaceVector",
    "SobolevBasis",
    "SobolevParams",
    "TruncatedOperator",
    "VectorField",
    "YMState",
    "apply_holonomy_diffeo",
    "assemble_bott_dirac",
    "bott_dirac_square",
    "build_sobolev_basis",
    "build_torus",
    "clifford_c",
    "clifford_cbar",
    "commutator_growth_profile",
    "coords_to_connection",
    "embed_vacuum",
    "exterior_power_map",
    "ext",
    "ext_op",
    "flow_jacobian",
    "hodge_laplacian",
    "holonomy",
    "int_",
    "int_op",
    "integrate_flow",
    "load_connection",
    "mode_matrices",
    "pullback_oneform",
    "save_connection",
    "sobolev_inner",
    "spectrum",
    "transport",
    "vacuum",
    "verify_square_closed_form",
]
