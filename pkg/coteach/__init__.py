"""Cooperative learning-to-teach: agents that learn a task while learning to advise each other."""

__version__ = "1.0.0"
