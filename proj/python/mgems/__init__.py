"""Microgrid two-phase energy management simulator.

Thin re-export of the compiled extension; see the project README for the
config and CSV schemas.
"""

try:
    from ._mgems import *  # noqa: F401,F403  (installed wheel layout)
    from ._mgems import __doc__ as _doc
except ImportError:  # build-tree layout: _mgems.so on PYTHONPATH
    from _mgems import *  # noqa: F401,F403
    from _mgems import __doc__ as _doc

__doc__ = _doc
__version__ = "0.1.0"
