"""Popov-type robust mean-square stability tests for uncertain linear quantum systems."""

__version__ = "0.1.0"

from .certificate import Certificate, certify, stability_constants, synthesize_P, verify_certificate
from .model import PlantSpec, embed_blocks, load_plant, make_structure, parse_plant, validate_doubled
from .oracle import OracleReport, consistency_sweep, covariance_trajectory, mss_check
from .plant import StateSpace, build_state_space, closed_loop_A, eval_G, reduce_annihilation_only
from .popov import (FrequencyGrid, PopovAnalysis, default_grid, min_gamma, popov_plot, search_theta,
                    spr_margin)
from .systems import opa_plant
