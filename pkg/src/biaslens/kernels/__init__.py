"""Hot numeric kernels, each in two interchangeable backends.

Every kernel exists as a numba @njit version and a pure-numpy fallback with
the same signature.  Set BIASLENS_NUMBA=0 to force the numpy path; the
default prefers numba when it imports cleanly.

Backend parity: the forest split/predict and Viterbi kernels are bit
identical across backends (integer logic plus elementwise float ops in the
same order).  The embedding and SGD training kernels can differ in the last
float bits between backends because reductions are ordered differently;
each backend on its own is fully deterministic for a fixed seed.
"""
from __future__ import annotations

import os


def _numba_requested() -> bool:
    flag = os.environ.get("BIASLENS_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


NUMBA_ENABLED = False
if _numba_requested():
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False

from .forest_numpy import best_split_binary as best_split_binary_np
from .forest_numpy import forest_votes as forest_votes_np
from .crf_numpy import viterbi as viterbi_np
from .sgns_numpy import sgns_sentence as sgns_sentence_np
from .sgd_numpy import hinge_epoch as hinge_epoch_np

if NUMBA_ENABLED:
    from .forest_numba import best_split_binary, forest_votes
    from .crf_numba import viterbi
    from .sgns_numba import sgns_sentence
    from .sgd_numba import hinge_epoch

    BACKEND = "numba"
else:
    best_split_binary = best_split_binary_np
    forest_votes = forest_votes_np
    viterbi = viterbi_np
    sgns_sentence = sgns_sentence_np
    hinge_epoch = hinge_epoch_np

    BACKEND = "numpy"

__all__ = [
    "BACKEND",
    "NUMBA_ENABLED",
    "best_split_binary",
    "forest_votes",
    "viterbi",
    "sgns_sentence",
    "hinge_epoch",
    "best_split_binary_np",
    "forest_votes_np",
    "viterbi_np",
    "sgns_sentence_np",
    "hinge_epoch_np",
]
