"""splatflow: splat-scene buffer rendering, artifact simulation, and
flow-matching video refinement at desk scale."""

__version__ = "0.1.0"
