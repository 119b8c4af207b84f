"""interface_lab: a numerical laboratory for diffusion across a sharp interface.

Simulates the physical diffusion built from skew Brownian motion (exact in
law at every grid time), estimates first-passage and occupation-time
functionals, solves the matching backward interface PDE, and cross-checks
the two against each other and against closed forms.
"""

from ._backend import BACKEND, HAVE_COMPILED, backend_name
from .config import DEFAULT_SEED, RunConfig, default_config
from .functionals import (
    FptSample,
    OccupationRecord,
    TestFunction,
    first_passage,
    make_test_function,
    martingale_residual,
    occupation_times,
)
from .medium import (
    TwoSidedMedium,
    flux_continuity_lambda,
    make_medium,
    medium_from_upwelling,
)
from .pde import (
    Grid,
    PdeProblem,
    PdeSolution,
    interface_flux_residual,
    solve,
    survival_curve,
)
from .report import ExperimentReport, SummaryStat, summarize
from .rng import RngStream, compose_stream_id
from .sbm import (
    PhysicalPath,
    SkewPath,
    bridge_no_hit_prob,
    physical_path,
    sample_path,
    step,
    transition_cdf,
    transition_density,
)
from .experiments import (
    run_experiment,
    run_fpt_experiment,
    run_kernel_check,
    run_martingale_experiment,
    run_occupation_experiment,
    run_pde_vs_mc,
)

__version__ = "0.1.0"
