"""Exact and numeric verification of q-series reciprocity identities."""

__version__ = "0.1.0"

from .catalog import (  # noqa: E402
    CATALOG,
    evaluate_identity,
    f,
    get_entry,
    h,
    list_identities,
    residual,
    residual_num,
    rho,
    rho0,
    xi,
)
from .hypergeom import Kernel, Poch, SeriesSpec, VWPSpec, build_vwp, growth_check, sum_series  # noqa: E402
from .numeric import NumericConfig, eval_sum_num  # noqa: E402
from .qfunctions import INF, poch, qbinom  # noqa: E402
from .series import LaurentSeries, QMonomial  # noqa: E402

__all__ = [
    "CATALOG",
    "INF",
    "Kernel",
    "LaurentSeries",
    "NumericConfig",
    "Poch",
    "QMonomial",
    "SeriesSpec",
    "VWPSpec",
    "build_vwp",
    "eval_sum_num",
    "evaluate_identity",
    "f",
    "get_entry",
    "growth_check",
    "h",
    "list_identities",
    "poch",
    "qbinom",
    "residual",
    "residual_num",
    "rho",
    "rho0",
    "sum_series",
    "xi",
]
