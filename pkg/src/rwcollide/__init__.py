"""Hitting times, meeting times and three-walker collision races on finite Markov chains."""

__version__ = "0.1.0"
