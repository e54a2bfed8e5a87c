"""CSP instances, CSP-to-SAT encodings, instance features and a
cluster-based solver portfolio."""

from .cnf import CnfFormula, count_models, parse_dimacs, write_dimacs
from .csp import CspInstance, count_solutions, normalize, parse_native, render_native
from .encode import ALL_CONFIGS, EncodingConfig, decode_model, encode
from .features import CSP_SCHEMA, SAT_SCHEMA, csp_features, sat_features
from .portfolio import (PortfolioConfig, PortfolioModel, cross_validate, par_score, select,
                        train)
from .xcsp import parse_xcsp

__version__ = "0.1.0"
