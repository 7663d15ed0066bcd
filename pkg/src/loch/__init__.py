"""Finite-dimensional laboratory for locally Hilbert spaces.

Directed index sets, strictly inductive systems of measure and Hilbert
spaces (including the Hata tree-like set), coherent operator nets and their
spectral theory: spectral measures, Borel calculus, multiplicity and
multiplication-operator models.
"""

from .errors import (ClassificationError, ConsistencyAlarm, DegenerateCarrier, DomainError,
                     IncompatibleSystems, InvalidIndex, LochError, MalformedInput, PreconditionError,
                     Report, ValidationError, Violation)
from .hata import (Approximation, Branch, IfsParams, apply_map, branch_measure, build_inductive_system,
                   check_connectivity, compose_word, enumerate_branches, generate_approximation,
                   render_svg)
from .hilbert import (InductiveHilbertSystem, build_inoue_space, check_representing, projection_onto,
                      validate_hilbert_system)
from .measure import (InductiveMeasureSystem, MeasureSpaceNode, atomic_node, check_local_sigma_additivity,
                      discretize_l2, discretize_system, extended_measure, is_in_omega_tilde,
                      limit_measure, segment_node, validate_system)
from .operator import (CoherentOperator, LocFunction, SpectrumSet, adjoint, classify, compose,
                       essential_range, fuglede_putnam_check, multiplication_operator, seminorm,
                       spectrum, validate_coherent)
from .order import (ChainWitness, DirectedSet, check_directed, down_set, is_sequentially_finite,
                    upper_bound)
from .spectral import (FunctionalModel, LocalSpectralMeasure, MultiplicityModel, borel_calculus,
                       direct_integral_view, functional_model, integrate, multiplicity_model,
                       spectral_measure)

__version__ = "0.1.0"
