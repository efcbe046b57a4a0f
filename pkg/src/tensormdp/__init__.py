"""Low-Tucker-rank state/action representation learning for MDPs.

Pipeline: estimate the importance-weighted mean-embedding tensor from a
trajectory, fit a low-Tucker-rank transition tensor (HOOI), read state and
action embedding maps off its factors, and cluster the embeddings into
discrete abstractions. Comparison estimators and an experiment CLI are
included.
"""

from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
