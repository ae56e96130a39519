"""Optional numba acceleration for the per-block kernels.

``ORTHOSTEG_DISABLE_NUMBA=1`` (or a missing numba install) selects the
pure-numpy kernels. Both paths produce bit-identical stego images.
"""

import os

ENV_FLAG = "ORTHOSTEG_DISABLE_NUMBA"


def _noop_jit(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(f):
        return f

    return wrap


def _have_numba():
    try:
        import numba  # noqa: F401

        return True
    except ImportError:
        return False


def _env_disabled():
    return os.environ.get(ENV_FLAG, "").strip().lower() not in ("", "0", "false", "no")


HAVE_NUMBA = _have_numba()
USE_NUMBA = HAVE_NUMBA and not _env_disabled()

if HAVE_NUMBA:
    from numba import njit
else:
    njit = _noop_jit


def default_backend():
    return "numba" if USE_NUMBA else "numpy"
