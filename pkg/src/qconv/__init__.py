"""Coherified permutation tensors, 2-unitary gates and their diagnostics."""
import os as _os

# QCONV_THREADS caps BLAS parallelism; it must be applied before numpy loads
if "QCONV_THREADS" in _os.environ:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["QCONV_THREADS"])

__version__ = "0.1.0"
