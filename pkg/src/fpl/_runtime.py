"""Process-level tuning shared by the CLI, demos and the test suite."""

import ctypes
import ctypes.util

_M_TRIM_THRESHOLD = -1
_M_MMAP_THRESHOLD = -3


def tune_allocator(threshold: int = 1 << 30) -> bool:
    """Keep mid-sized numpy temporaries on the glibc heap.

    By default glibc serves blocks above ~128 KiB with fresh ``mmap`` pages,
    and every training step then pays page faults on each temporary; raising
    the threshold makes elementwise work several times faster.  Returns
    False where glibc is unavailable.
    """
    name = ctypes.util.find_library("c")
    if not name:
        return False
    try:
        libc = ctypes.CDLL(name)
        return bool(libc.mallopt(_M_MMAP_THRESHOLD, threshold)) and bool(
            libc.mallopt(_M_TRIM_THRESHOLD, threshold)
        )
    except (OSError, AttributeError):
        return False
