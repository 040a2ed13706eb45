"""
Mixed Trigonometric Polynomial Prover

Certified positivity proofs for mixed trigonometric polynomial functions on
sub-intervals of (0, pi/2): one-sided Taylor bounds, multiple-angle reduction
and exact Sturm-sequence decisions over Q[pi], packaged as replayable
certificates.
"""

__version__ = "0.1.0"
