"""Promise valued CSPs: exact relaxations, colour refinement and a distributed decider."""

from .arith import INF, format_ext, parse_ext
from .decomp import decompose, verify_decomposition
from .distsim import build_network, run, simulate, step
from .errors import PvcspError
from .lpcore import LinearProgram, solve_lp
from .maps import MapDistribution
from .model import (
    ValuedStructure,
    instance,
    k_fold_twist,
    load_structure,
    opt,
    parse_structure,
    serialize_structure,
    template,
    val,
)
from .morph import dual_frac_hom, frac_hom, power_lp, sym_frac_polymorphism
from .relax import decide, opt_blp, opt_sa1, opt_sa1_reduced
from .wl import equiv1, refine, weak_congruent

__version__ = "0.1.0"


def data_path(name):
    """Path of a bundled fixture such as ``ex1_A.vcsp``."""
    from importlib.resources import files

    return str(files(__name__) / "data" / name)
