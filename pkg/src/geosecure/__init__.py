"""Geodesic counting, blocking sets and entropy checks on flat tori, the
genus-2 hyperbolic surface and their products."""
from __future__ import annotations

__version__ = "0.1.0"

from .core import (Configuration, CountCurve, GeodesicSegment, PassageRecord, SpaceMismatchError,
                   UnsupportedSpaceError, count_connecting, count_curve, count_joining, count_through,
                   passage_times, split_at_blocker, trim_to_connecting)
from .flat_torus import (BlockingCertificate, LatticeTorus, TorusPoint, certify_blocking_all,
                         injectivity_radius, make_torus, midpoint_blocking_set, unit_torus)
from .hyperbolic import (FuchsianSurface, NonBlockingCertificate, OrbitElement, count_joining_hyp,
                         enumerate_orbit, make_genus2, non_blocking_certificate, systole)
from .product import ProductGeodesic, ProductSpace, enumerate_product, product_blocking_set
from .blocking import BlockReport, ThresholdBound, search_min_blocking, verify_blocking_finite
from .analysis import (BoundCheck, GrowthFit, berger_bott_check, check_entropy_window, check_mn_bound,
                       check_split_bound, check_uniform_security_bound, fit_growth, mane_estimate)
from .spaces import space_from_json

__all__ = [name for name in dir() if not name.startswith("_")]
