"""Dimension and enumeration guards shared by all modules.

Everything in this toolkit is dense and exact, so sizes are capped rather
than degraded.  The dense-dimension guard can be overridden per call or
globally through the ``COHQ_GUARD_DIM`` environment variable.
"""

import os

DEFAULT_GUARD_DIM = 4096
DEFAULT_GUARD_ENUM = 2 ** 20

_ENV_VAR = "COHQ_GUARD_DIM"


class GuardExceeded(ValueError):
    """A dense dimension or enumeration size exceeds the configured guard."""


def guard_dim(override=None):
    """Return the active dense-dimension guard."""
    if override is not None:
        return int(override)
    env = os.environ.get(_ENV_VAR)
    return int(env) if env else DEFAULT_GUARD_DIM


def check_dim(dim, override=None, what="joint dimension"):
    """Raise :class:`GuardExceeded` if ``dim`` is over the dense guard."""
    limit = guard_dim(override)
    if dim > limit:
        raise GuardExceeded(
            "%s %d exceeds the dense guard %d "
            "(set %s or pass guard= to override)" % (what, dim, limit, _ENV_VAR)
        )
    return int(dim)


def check_enum(count, limit=None, what="sequence enumeration"):
    """Raise :class:`GuardExceeded` if an enumeration is too large."""
    limit = DEFAULT_GUARD_ENUM if limit is None else int(limit)
    if count > limit:
        raise GuardExceeded(
            "%s of size %d exceeds the enumeration guard %d" % (what, count, limit)
        )
    return int(count)
