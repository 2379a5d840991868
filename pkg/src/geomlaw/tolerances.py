"""Central numeric tolerances.

Kept in one place so the CLI's ``--tolerance`` flag can override them
coherently: validation and membership checks share VALIDATION, oracle
comparisons use ORACLE, Monte Carlo bands are 3 sigma plus 1/N.
"""

VALIDATION = 1e-12     # parameter validation and sequence-membership slack
ORACLE = 1e-10         # analytic-vs-oracle comparisons
HANKEL_EIG = 1e-10     # allowed negativity of Hankel eigenvalues
PMF_CLAMP = 1e-10      # rounding residue clamped to zero in pmf
MC_SIGMAS = 3.0        # Monte Carlo band width in standard deviations
