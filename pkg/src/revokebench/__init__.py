"""revokebench: certificate-revocation schemes behind one workbench.

CRL family (full, delta, sliding-window, segmented, redirect), one-way-chain
status tokens, revocation trees, windowed revocation, an online responder,
depender-graph distribution, and a deterministic simulator that measures
their bandwidth / request-rate / freshness trade-offs.
"""

__version__ = "0.1.0"
