"""Haar paraproducts on truncated dyadic grids, their Schatten norms and Besov norms."""

__version__ = "0.1.0"

from .dyadic_grid import (
    DyadicInterval,
    DyadicRectangle,
    Grid,
    Window,
    children,
    covering_interval,
    m_fold_children,
    scale_separated_family,
)
from .errors import ParaproductError
from .haar_system import (
    HaarIndex,
    StepFunction,
    expand_indicator,
    haar0,
    haar1,
    tensor_haar,
)
from .paraproduct_operators import (
    OperatorMatrix,
    a_m_operator,
    decompose,
    h_mJ,
    haar_paraproduct,
    projection,
    rank_one_sum,
    s_m_operator,
    t1_lower_operator,
)
from .schatten import (
    basis_image_sum,
    entry_bound,
    schatten_norm,
    singular_values,
    triangle_check,
)
from .symbols_besov import (
    SymbolCoefficients,
    besov_dyadic_norm,
    bmo_dyadic_diagnostic,
    coefficients_of,
    difference_besov_norm_1d,
    difference_besov_norm_2d,
    lp_norm,
)
