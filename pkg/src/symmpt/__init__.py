"""Symmetry-partitioned multi-reference perturbation theory toolkit.

The pipeline: parse molecular integrals (FCIDUMP), declare a Z2 symmetry
model over spin orbitals, split the Hamiltonian so the reference part
keeps every declared parity, solve the reference sector, and evaluate
second-order corrections (exact, contracted, or mean-field).  Companion
modules select determinants for variational CI and map everything to
Pauli form for qubit-tapering resource estimates.
"""

from .integrals import (IntegralSet, parse_fcidump, load_fcidump, emit_fcidump,
                        freeze_core)
from .symmetry import (Z2Generator, SymmetryModel, irrep_of, enumerate_sector,
                       count_sector, sector_labels, load_grouping, save_grouping,
                       suggest_grouping)
from .hamiltonian import (FermTerm, PartitionedHamiltonian, PartitioningError,
                          build_terms, classify_term, partition_hamiltonian,
                          matrix_element, diagonal_values, build_sector_matrix,
                          apply_block, materialize_block, full_hamiltonian_matrix,
                          SectorMatrix)
from .eigensolver import (EigenPair, lowest_eigenpairs, full_spectrum,
                          ConvergenceError, CapacityError)
from .pt2 import (SectorSolution, PerturberState, PT2Result, IntruderStateError,
                  reference_energy, first_order, perturber_states,
                  second_order_uc, second_order_sc, second_order_en, run_pt2)
from .sci import SCISelection, select, sci_energy, save_selection, load_selection
from .qubits import (PauliHamiltonian, TaperingPlan, jordan_wigner,
                     jordan_wigner_terms, plan_tapering, taper,
                     sector_basis_states, pauli_matrix, resource_report,
                     SymmetryViolationError, PlanError)

__version__ = "0.1.0"
