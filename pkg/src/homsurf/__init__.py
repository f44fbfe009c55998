"""Surfaces in the homogeneous 3-manifolds E(kappa, tau): fundamental data,
compatibility equations, sister and twin correspondences, reconstruction."""

from .ambient import AmbientVector, ChartDomainError, ModelSpace, cross, curvature_tensor, inner
from .compatibility import CompatReport, verify
from .correspondence import Phase, phase_angle, sign_flip, sister, twin
from .immersion import Grid, QuadrupleField, SurfacePatch, catalog, fundamental_data, mean_curvature
from .reconstruction import connection_forms, integrate_frame, reconstruct

__version__ = "0.1.0"
