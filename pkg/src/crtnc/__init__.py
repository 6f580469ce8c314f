"""Random network coding over the Chinese remainder theorem.

Packets carry residues of the hidden message(s) plus a two-prime header;
nodes merge congruences and re-reduce modulo a picked prime pair.
"""
from .crt import CongruenceClass, Incompatible, ext_gcd, merge, solve_system
from .primes import PrimePool, generate_primes, is_prime, min_bit_length
from .coding import (
    Full,
    Packet,
    PartialMod,
    RecodePath,
    RecodePolicy,
    SessionConfig,
    SourceIdentity,
    Unrecovered,
)
from .topology import Topology, butterfly, generate_layered
from .simulator import RecoveryReport, recover_rate, r_prime, run_session

__version__ = "0.1.0"
