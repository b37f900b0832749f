"""Numerical verification engine for neutral-signature Walker-type
four-geometries: curvature spinors, spin coefficients, conformal
rescaling laws, and the reduced second-order field equation, all
evaluated through exact jet arithmetic at sample points."""

__version__ = "0.1.0"
