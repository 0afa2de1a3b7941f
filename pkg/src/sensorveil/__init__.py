"""Privacy-preserving transformations for multi-channel sensor time-series.

Two trainable mechanisms plus classical baselines and an evaluation harness:

- replacement: an autoencoder that rewrites windows of sensitive activities
  so they look like neutral ones, passing everything else through.
- anonymization: an adversarially trained encoder/decoder that strips
  user-identifying patterns while keeping activities recognizable.
"""

__version__ = "0.1.0"
