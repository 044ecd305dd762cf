"""slimeways: particle-based slime mould transport-network simulator and
planar proximity-graph toolkit."""

__version__ = "0.1.0"
