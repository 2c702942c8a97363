"""Sequential vs single-stage seeding under the independent cascade model."""

__version__ = "0.1.0"
