"""Verification engine for the computable claims of a Harman-sieve argument.

Modules:
    buchstab       Buchstab's omega with error bounds
    expr           bound expressions with point and interval evaluation
    regions        target regions and the three options on a length profile
    sieve_sets     exact sifted counts on integer intervals
    quadrature     nested omega integrals with error estimates
    exponents      branch-and-bound certification of exponent inequalities
    decomposition  remainder-term catalog and its verification
    combinatorics  adversarial falsification of the tuple-family claims
    cli            command-line driver and JSON reports
"""

__version__ = "0.1.0"
