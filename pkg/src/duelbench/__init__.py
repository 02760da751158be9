"""Adversarial utility-based dueling bandits: algorithms, environments, harness."""

__version__ = "0.1.0"
