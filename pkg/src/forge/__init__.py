"""compliance-forge: statute-seeded compliance benchmarking toolkit."""

__version__ = "0.1.0"
