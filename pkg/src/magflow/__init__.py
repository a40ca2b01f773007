"""Right-invariant magnetic geodesic flows on Lie groups.

The library covers the Lorentz-force construction on a catalog of low-
dimensional Lie algebras (plus a Fourier truncation of vector fields on the
circle), the critical energy value of an exact magnetic system, the induced
Randers-Finsler geometry with variational two-point connectivity at
prescribed supercritical energy, and a pseudospectral solver for the
magnetically forced EPDiff equation on the circle.
"""

from .algebra import (CATALOG, ControlPath, DimensionMismatchError,
                      GroupPoint, LieAlgebra, bracket, coad, compose, evolve,
                      group_exp, group_inverse, group_log, heisenberg3,
                      identity, jacobi_residual, make_algebra, se2, so3,
                      vect_s1)
from .checks import SUITES, CheckResult, run_suite
from .config import ConfigError, ExperimentConfig, load_config
from .epdiff import (BlowUpError, CFLError, EPDiffTrajectory, FourierField,
                     SobolevInertia, decay_monitor, energy, epdiff_rhs,
                     integrate_epdiff, lorentz_field)
from .finsler import (ConnectOptions, ConvergenceError, RandersMetric,
                      SubcriticalEnergyError, action_gap,
                      check_equivalence_bounds, connect_at_energy,
                      finsler_energy, finsler_eval, finsler_length,
                      fundamental_tensor, geodesic_residual,
                      minimize_finsler_energy, reparametrize_to_speed)
from .flow import (IntegrationError, PhasePoint, Trajectory, hamiltonian,
                   integrate_hamiltonian, integrate_magnetic,
                   inverse_legendre, legendre, magnetic_exp, magnetic_rhs)
from .magnetics import (InertiaOperator, MagneticSystem, annihilator_basis,
                        derived_subalgebra_basis, dual_norm, kinetic_energy,
                        lorentz, mane_certificate, mane_critical_value,
                        metric_norm, optimal_primitive, sigma_at_identity,
                        sigma_flat)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
