"""Families, catalog vectors, potential tables and commutator tables."""

from .families import *  # noqa: F401,F403
from .vectors import *  # noqa: F401,F403
from .free_functions import *  # noqa: F401,F403
from .tables import *  # noqa: F401,F403
from .commutators import *  # noqa: F401,F403
