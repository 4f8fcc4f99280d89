"""Benchmark harness for AI-based intrusion detectors on KDD'99-style traffic.

Five detector families share one evaluation pipeline: an adaptive hybrid of a
random forest (misuse) and E-DBSCAN (anomaly) with ROC-driven traffic
reallocation, a stacked restricted-Boltzmann-machine classifier, and three
tabular reinforcement-learning agents (Q-learning, SARSA, TD).  Traffic is
replayed through a simulated clustered sensor network and scored by a common
metrics engine.
"""

__version__ = "0.1.0"
