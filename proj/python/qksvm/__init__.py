"""Quantum-kernel SVM toolkit: fidelity kernels, alignment training, SVMs and the cloud-mask pipeline."""

from ._qksvm import *  # noqa: F401,F403
from ._qksvm import Error, RasterPatch, SvmModel  # noqa: F401

__version__ = "0.1.0"
