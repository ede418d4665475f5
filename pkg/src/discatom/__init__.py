"""Cover-term synthesis and atomicity checks for definable pre-orders on
finitely generated free algebras of discriminator varieties."""

__version__ = "0.1.0"
