"""Fractional heat potentials J_alpha, their inverse, and the nonlinear inequality f <= K (J_alpha f)^lambda."""
from .errors import DomainError, RegionError, ToleranceError, UnsupportedVariantError
from .quadrature import QuadratureSpec
from .kernels import KernelParams, phi, phi_scaled, symbol, spatial_fourier_phi, phi_lr_norm
from .special import log_gamma, sharp_constant, mbar_constant, riesz_constant, heat_ball_mass
from .fields import Field, Sampled, Sum, Rescaled, closed_form_lp_norm, rescale
from .grammar import parse_field
from .potentials import SlabRegion, j_alpha, j_scaled, riemann_liouville, riesz, v_alpha
from .inverse import InverseSpec, j_inverse, recover
from .analysis import RegionLabel, classify, sup_bounds, gamma_sequence, picard, box_norm, limit_scan
from .report import Report

__version__ = "0.1.0"
