"""Hardy Z, a surrogate ladder map phi1, and pulled-back Jacobi basis checks."""

from .errors import CapExceededError, ConvergenceError, DomainError, OutOfRangeError, ResolutionError
from .special_fn import (
    EULER_GAMMA,
    ThetaEval,
    double_factorial,
    log_double_factorial,
    log_gamma_complex,
    prime_pi,
    prime_pi_many,
    theta,
)
from .zeta_engine import (
    GridPolicy,
    HardyEval,
    HardyGrid,
    hardy_z,
    hardy_z_em,
    hardy_z_rs,
    hardy_z_rs_array,
    zeta_critical_em,
    zsq_grid,
)
from .jacobi_basis import Family, JacobiSpec, evaluate, jacobi_norm, norm_constant, specialization_prefactor, weight_mass
from .quad import QuadRule, TSpaceResult, gauss_jacobi, integrate_reference, integrate_t_space
from .ladder import (
    LadderTable,
    WindowPair,
    build_ladder,
    invert,
    ladder_for_window,
    load_ladder,
    save_ladder,
    tilde_z_sq,
    window_preimage,
)
from .verify_harness import (
    AsymptoticScan,
    GramReport,
    asymptotic_scan,
    gram_transformed,
    substitution_check,
    window_distance_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
