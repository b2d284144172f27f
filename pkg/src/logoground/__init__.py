"""Reward computation and evaluation engine for visually-grounded
logo-recognition rollouts.

Core pieces:

- ``geometry``: boxes, IoU, Hungarian matching, threshold indicators
- ``parsing``: rollout text -> structured responses and detection JSON
- ``rewards``: composite reward components and group advantages
- ``judge``: reasoning-quality judge prompt/verdict handling
- ``dataset``: record validation and multi-image concatenation layout
- ``evaluation``: dataset-level accuracy/F1, grounding P/R, AP50
- ``scoring``: batch scoring shared by the CLI and the HTTP service
"""

from ._backend import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
