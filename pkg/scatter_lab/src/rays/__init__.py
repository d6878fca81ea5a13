from .ray_path import Crossing, RayPath
from .tracer import broken_exponential, trace_geodesic, trace_normal_geodesic
from .symbols import dt_symbol, transmission_factor
from .regularity import RegularityReport, regularity_check
from .transfer_matrix import LayeredMedium, Pulse, interface_coefficients
