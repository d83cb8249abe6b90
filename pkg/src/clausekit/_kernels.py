"""Select the compiled kernels when available, else the pure-Python ones.

Set ``CLAUSEKIT_PURE=1`` to force the fallback.
"""

import os

from clausekit import _purekernels as pure

compiled = None
if not os.environ.get("CLAUSEKIT_PURE"):
    try:
        from clausekit import _speedups as compiled
    except ImportError:  # extension not built
        compiled = None

_impl = compiled if compiled is not None else pure

BACKEND = _impl.BACKEND
walk = _impl.walk
unify = _impl.unify
apply = _impl.apply
match = _impl.match
subsumes_literals = _impl.subsumes_literals
louvain_local_moves = _impl.louvain_local_moves
ordered_matmul = _impl.ordered_matmul
segment_sorted_sums = _impl.segment_sorted_sums


def backends():
    """Available kernel modules, pure first."""
    return [pure] + ([compiled] if compiled is not None else [])
