"""Decision procedure for BSR clause sets with simple linear integer arithmetic."""

from __future__ import annotations

__version__ = "0.1.0"
