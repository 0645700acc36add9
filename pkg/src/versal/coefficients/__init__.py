from .field import Gaussian, I, format_scalar, gaussian, parse_scalar, phase, to_scalar
from .rings import (
    GROUND, LocalRing, RingMap, SeriesElement, format_element, identity_map,
    make_local_ring, parse_polynomial, series_invert, series_mul,
)
from .cones import ConeCompletion, ConeMonoid, cone_completion, is_strongly_convex, toric_binomials
from .novikov import (
    LambdaPoint, NovikovElement, lambda_point_specialize, large_volume_specialize,
    novikov_valuation,
)
