"""qclab: second-order quantum coherence tensors and their conservation laws"""

from .core.config import settings

__version__ = settings.VERSION
