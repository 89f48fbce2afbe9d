"""Ultraweak DPG solver for the Kirchhoff-Love plate bending model.

Field unknowns (deflection, bending moments) live element-wise in L2;
skeleton unknowns carry deflection/slope traces and moment/shear traces.
Optimal test functions are approximated in an enriched broken polynomial
space, giving a symmetric positive definite condensed system and a
built-in residual error estimator that drives adaptive refinement.
"""

from .driver import (ConvergenceRecord, ExperimentConfig, dorfler_mark, eoc,
                     run_experiment, solve_problem)
from .dpg import (EstimatorField, GlobalSystem, LocalSystem, Solution,
                  assemble, condense, estimate, local_b, local_gram,
                  local_load)
from .errors import (ConfigurationError, MeshStructureError, SPDError,
                     SolverConvergenceError)
from .linalg import SolveReport, dense_cholesky, spd_solve
from .mesh import (Mesh, mesh_from_arrays, mesh_from_text, mesh_to_text,
                   nvb_refine, reference_triangle_mesh, uniform_refine,
                   unit_square_mesh, vertex_patch)
from .polyquad import (QuadRuleEdge, QuadRuleTri, ScalarBasis, TensorBasis,
                       edge_rule, eval_scalar, eval_tensor, tri_rule)
from .problems import (ExactSolution, MaterialLaw, ProblemSpec,
                       builtin_square_problem, builtin_zshape_problem,
                       c_apply, cinv_apply, fourier_eval, l2_errors,
                       singular_eval, zshape_mesh)
from .spaces import (BCSpec, DofMap, build_dofmap, extract_qhat,
                     extract_uhat, interpolate_uhat_bc, qhat_pair_local,
                     simply_supported_bc, uhat_pair_local)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
