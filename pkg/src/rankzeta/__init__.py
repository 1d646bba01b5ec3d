"""Elliptic-curve, quadratic Dirichlet and zeta L-functions: values, zeros, zero statistics.

Modules: ``arith`` (sieves, characters, discriminants), ``curve`` (Weierstrass
models, a(p)), ``zeta``, ``lfunc`` (self-dual L-functions), ``bias`` (prime
sums of a(p)), ``predict`` (theoretical predictions), ``stats`` (empirical
zero statistics) and ``cli``.
"""
try:
    from importlib.metadata import version as _version
    __version__ = _version("artifact")
except Exception:  # pragma: no cover - running from a source tree
    __version__ = "0.1.0"

from .errors import RankZetaError

__all__ = ["RankZetaError", "__version__"]
