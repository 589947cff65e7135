"""m-ovoids of elliptic quadrics Q^-(2r+1, q): construction, verification and search."""

from .admissibility import AdmissibilityReport, admissible_report, lower_bound
from .certificates import ParseError, VerificationFailed, load_certificate, make_certificate
from .constructions import (
    FieldReductionMap, OneSystem, extract_line_spread, field_reduce, is_one_system,
    one_system_from_reduction,
)
from .gf import Field, NotAPrimePower, field_make
from .ovoid import PointSet, WeightedOvoid, is_m_ovoid, is_weighted_ovoid, tangent_profile
from .projgeom import ResourceLimit, Subspace
from .quadric import Quadric, quadric_make
from .search import SearchOutcome, SearchProblem, search_m_ovoid, search_one_system

__version__ = "0.1.0"
