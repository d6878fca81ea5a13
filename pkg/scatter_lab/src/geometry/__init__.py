from .grid import Grid, mask_diameter, neighbour_any
from .regions import Box, Complement, Dilation, Disk, GridLevelSet, HalfSpace, Interval, Polygon, Region, Union, region_from_config
from .interfaces import CircleInterface, Interface, PointInterface, PolylineInterface
from .speed_model import SpeedModel, build_speed_model, eval_speed, homogeneous_model, load_speed_model
from .depth import DepthField, level_regions, solve_depth
from .domain_chain import DomainChain
from .shrink import shrink_sequence
