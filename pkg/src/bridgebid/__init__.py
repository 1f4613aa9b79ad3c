"""Two-network contract bridge bidding: encoding, scoring, double dummy
analysis, supervised and self-play training, and evaluation."""

__version__ = "0.1.0"
