"""ringkit: ring PPG/ACC vital-sign estimation and benchmarking toolkit."""

__version__ = "1.0.0"
