"""Nearest-neighbour graphs and their modularity."""
