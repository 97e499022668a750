"""
freechaos: contraction calculus and moment machinery for free Wigner and free
Poisson multiple integrals, with a harness that certifies joint-moment
convergence of kernel sequences to free Poisson targets.
"""

__version__ = "0.1.0"

from .errors import DomainError, InconsistencyError, ResourceLimitError, ShapeError  # noqa: E402
from .kernels import (  # noqa: E402
    Grid,
    KernelBounds,
    StepKernel,
    arc_contract,
    bounds,
    check_arc_cauchy_schwarz,
    check_star_bound,
    inner,
    mirror_adjoint,
    norm,
    star_contract,
    tensor,
)
from .partitions import (  # noqa: E402
    ContractionWord,
    Partition,
    count_R,
    enumerate_nc,
    enumerate_nc2,
    enumerate_nc_ge2,
    enumerate_words,
    is_noncrossing,
    kernel_partition,
    leq_refinement,
    partition_to_word,
    word_to_partition,
)
from .chaos import (  # noqa: E402
    ChaosElement,
    StarWord,
    adjoint,
    eval_arc_word,
    eval_star_word,
    expectation,
    integral,
    poisson_moment,
    poisson_multiply,
    wigner_moment,
    wigner_multiply,
)
from .distributions import (  # noqa: E402
    EqualParamSpec,
    FreeFamilySpec,
    charlier,
    cumulant,
    equalparam_moment_closed,
    free_poisson_moment_single,
    semicircle_moment,
    target_moment,
)

__all__ = [name for name in dir() if not name.startswith("_")]
