"""NourID+ desk-scale digital energy identity platform.

Subpackages cover the simulated government registries, identity and
document verification, the DE-ID request workflow, DE-ID/QR issuance,
consumption analytics, the HTTP service, and the scenario CLI.
"""

__version__ = "0.1.0"
