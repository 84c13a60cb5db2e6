"""
SparQ Attention and KV-cache sparsity baselines over an instrumented key-value cache.
"""

__version__ = "0.1.0"
