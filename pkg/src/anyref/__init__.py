"""Any-resolution tiling, multi-granularity feature fusion, hybrid region
referring, dense-alignment prompts and referring/grounding metrics."""

__version__ = "0.1.0"
