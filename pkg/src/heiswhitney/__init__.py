"""Whitney extension, finiteness checks and Lusin approximation for
horizontal curves in the first Heisenberg group."""

from .area_velocity import (AVScanReport, area_discrepancy, av_ratio_scan, discrete_area,
                            discrete_av_scan, discrete_velocity, left_invariance_audit,
                            omega_velocity, ratio_of_constants)
from .errors import (AdmissibilityError, CoverageError, DomainError, HeisWhitneyError,
                     InconsistentDataError, ResolutionError, ValidationError)
from .extension import (ExtensionConstants, Gap, PerturbationPair, PiecewiseSmoothCurve,
                        extend_cinfty, extend_horizontal, horizontality_repair,
                        vertical_redefine, whitney_extend_scalar)
from .finiteness import FinitenessReport, equivalence_audit, finiteness_check
from .heisenberg import (HPoint, SampledCurve, frame_at, group_inv, group_mul,
                         horizontality_residual, leibniz_vertical_jet)
from .jets import (HorizontalJetTriple, SampleSet, ScalarJet, WhitneyFieldReport,
                   cm_decay_diagnostic, remainder, validate_cmw)
from .lusin import (L1wEstimate, LusinResult, UniformParameterReport, integrate_l1w,
                    l1w_estimate, lusin_approximate, lusin_cinfty, uniform_parameter_set,
                    vertical_l1w)
from .modulus import ModulusOfContinuity, eval_modulus, holder_seminorm
from .polynomials import (NodeSet, Polynomial, divided_differences, integral_abs,
                          markov_derivative_bound, newton_interpolant, taylor_from_jet)
from .smooth import Bump, smoothstep

__version__ = "0.1.0"
