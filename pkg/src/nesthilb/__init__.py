"""Symbolic intersection theory and equivariant localization for nested
Hilbert schemes of points and curves on surfaces.

Subpackages:

- ringcore: exact graded ring model, Chern/Segre series, determinantal
  expressions, K-class arithmetic
- bundles: projective and Grassmann bundle models with pushforwards
- surface: surface numerics and toric fixed-point data
- porteous: expression trees for virtual-cycle pushforward formulas
- hilbloc: torus fixed points, characters, Atiyah-Bott integration
- vw: rank-2 monopole contributions and universality fits
- cli: batch front-end
"""

from .ringcore import (Ring, GradedClass, KClass, series_invert, delta_det,
                       k_twist, k_dual, rational_str, parse_rational)

__all__ = ["Ring", "GradedClass", "KClass", "series_invert", "delta_det",
           "k_twist", "k_dual", "rational_str", "parse_rational"]

__version__ = "0.1.0"
