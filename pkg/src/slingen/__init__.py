"""slingen: a compiler for fixed-size linear algebra programs.

Takes programs written in a small matrix language (Cholesky factors,
triangular solves, Sylvester/Lyapunov equations mixed with explicit
matrix arithmetic) and produces optimized single-source C, scalar or
vectorized, verified against a dense reference implementation.
"""

__version__ = "0.1.0"
