"""Secret-key rates and bit-error thresholds for BB84 and 6-state protocols
with added noise and repetition-block preprocessing.

The heavy lifting lives in the compiled extension ``keyrate._core``; this
package re-exports its public names, including the ``oracle`` submodule of
brute-force reference implementations.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _doc, __version__, oracle  # noqa: F401

__doc__ = _doc if _doc else __doc__
