# SPDX-License-Identifier: Apache-2.0
"""Multi-robot unsupervised semantic mapping and map fusion.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from semfuse._core import *  # noqa: F401,F403
from semfuse._core import __doc__  # noqa: F401

__version__ = "0.1.0"
