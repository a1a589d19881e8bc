"""hodgelab: Hodge theory for the second page of spectral sequences.

hodgelab computes the pages of the Frölicher and foliated spectral sequences
on finite-dimensional models (invariant forms on nilmanifolds and a periodic
Fourier grid), builds the pseudo-differential Laplacians whose kernels compute
the second page, and checks the metric degeneration certificates and operator
identities that go with them.
"""

__all__ = ["__version__"]
__version__ = "0.1.0"
