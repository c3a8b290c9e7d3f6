from app.models.multiindex import MultiIndex, multi_indices, multi_indices_of_degree
from app.models.trigpoly import TrigPoly
from app.models.domain import Domain, FunctionSpace
from app.models.grid import GridField, GridPoint, GridSpec
from app.models.diffop import Analytic, Constant, DiffOp, Sampled
