"""Cellular methods on graded posets and cohomology of orbit configuration spaces."""

from .cellular import (
    CellularForm,
    NotCellular,
    cellular_chain,
    construct_cellular_form,
    form_morphism,
    product_form,
    verify_cellular_form,
)
from .intlinalg import (
    ChainComplex,
    HomologySummary,
    IntMatrix,
    homology,
    kernel_basis,
    smith_normal_form,
    solve_unique,
)
from .oracle import GMOracle, TorComplex, gm_cohomology
from .orbit import (
    Graph,
    PartialMatrix,
    bond_lattice,
    build_intersection_lattice,
    build_lkm,
    fiber_of,
    independence,
    join_theta,
    perm_sign,
    phi_product,
)
from .osalg import OSAlgebra, nbc_basis, os_multiply, os_vs_cellular
from .posets import GradedPoset, build_poset, enumerate_chains, join, moebius, product_poset
from .ring import RingPresentation, cohomology_presentation, real_gr_presentation
from .sheaves import Copresheaf, FHom, Presheaf, delta_sheaf, pullback, star_fhom
from .verify import verify_full

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
