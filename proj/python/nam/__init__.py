"""Neural association models: Pr(E2|E1) over KB triples and cause-effect events."""

from nam._nam import *  # noqa: F401,F403
from nam._nam import __doc__  # noqa: F401
