"""collabarm: policy-expert collaborated manipulation and learning on a
planar ten-task bench."""

__version__ = "0.1.0"
