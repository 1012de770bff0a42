"""Markov-code mutual information maximization.

Thin wrapper around the compiled extension; everything lives in C++.
"""

try:
    from ._ammi import *  # noqa: F401,F403
    from ._ammi import __doc__ as _doc
except ImportError:  # build-tree layout: extension next to this package
    from _ammi import *  # noqa: F401,F403
    from _ammi import __doc__ as _doc

__doc__ = _doc
__version__ = "0.1.0"
