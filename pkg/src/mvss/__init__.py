"""Persistent Mayer-Vietoris spectral sequences over prime fields.

Filtered cell complexes and their persistent homology, covers and nerves,
diagrams of complexes with their blowup realizations, acyclic carriers, the
spectral sequence engine and comparison tools for pairs of covers.
"""
from .linalg import BACKEND, use_backend
from .complex import (Cell, ComplexError, FilteredComplex, FiltrationGrid, SubComplex, build_cubical,
                      build_simplicial, build_vietoris_rips, closure)
from .persistence import (Barcode, HomologyBasis, ModuleMorphism, PersistenceModule, bottleneck,
                          compose_left_right, compute_ph, homology_module)
from .covers import Cover, CoverError, common_refinement, find_refinement, interpolation, nerve, whole
from .diagrams import (BlowupComplex, Diagram, DiagramError, cover_diagram, join_diagram, multinerve,
                       pi0_diagram, realization, total_complex_check)
from .spectral import (DoubleComplex, PageMorphism, SpectralSequence, check_page_interleaving, compute_pages,
                       double_complex, e_infinity_check, induced_page_morphism)
from .carriers import (Carrier, EquivalencePack, check_acyclic, compose, lattice_carrier, synthesize_chain_map,
                       synthesize_homotopy, verify_equivalence, vr_carrier)
from .serre import (CoverSS, HypothesisError, cover_ss, cover_stability, inverse_refinement, local_checks,
                    refinement_ss_morphism, theta)

__version__ = "0.1.0"
