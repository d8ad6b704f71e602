from ._newsalpha import *  # noqa: F401,F403
from ._newsalpha import __version__
