"""Morse complexes of height-like functions on compact manifolds with boundary."""

from . import catalog
from .chains import (HomologyResult, IntPolynomial, IntegerChainComplex,
                     double_manifold_check, duality_symmetry_check,
                     morse_inequality_quotient, smith_normal_form)
from .critical import CriticalPoint, CriticalSet, find_critical_set
from .fields import MorseField, boundary_restriction_derivatives, validate_morse
from .geometry import (BoundaryConstraint, MetricField, Point, QuotientChart,
                       RegionChart, boundary_data, normalize_point,
                       path_orientation_sign)
from .params import DEFAULT, Tolerances
from .pipeline import MorsePackage, build_package, invariance_check
from .pseudogradient import (AdaptednessCertificate, PseudoGradientField,
                             build_adapted, certify_adapted)
from .flow import (ConnectingOrbit, IncidenceCount, Trajectory,
                   count_connecting_orbits, integrate, intersection_pairing)

__version__ = "0.1.0"
