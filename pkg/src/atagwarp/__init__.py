"""Training-free garment warping between poses.

Sleeves follow the arm bones through an anatomy-aware polar transform about
the elbow; the torso follows a landmark thin plate spline.
"""
from .atag import (
    AtagCorrespondence, AtagParams, FlexionWarning, angular_map, atag_field, atag_point,
    atag_points, blend_h, gate_g, radial_map, weight_f,
)
from .errors import (
    AbsentLandmarkError, AtagWarpError, DegenerateGeometryError, DimensionError,
    EmptyPartError, FitError, InputError, NumericError,
)
from .geometry import (
    ArmChain, Point2, WedgeCoordinates, angle_between, wedge_angle_of_chain, wedge_coordinates,
)
from .metrics import SsimParams, pixel_stats, ssim
from .pipeline import LandmarkSet, TryOnInputs, WarpConfig, WarpResult, run_warp
from .raster import SourceMap, backward_warp, composite, sample_bilinear
from .tps import Correspondence, TpsModel, tps_eval, tps_field, tps_fit

__version__ = "0.1.0"
