"""Fixed-width big-endian packet codec.

Layout for a session with prime bit length ``m`` and ``u`` residues::

    | p : ceil(m/8) | q : ceil(m/8) | r_1 : ceil(2m/8) | ... | r_u : ceil(2m/8) |

Widths depend on ``m`` alone, so every packet of a session has the same
length and fits a fixed radio frame.
"""
from __future__ import annotations

from .coding import Packet
from .errors import WireFormatError
from .primes import is_prime

__all__ = ["header_width", "residue_width", "wire_length", "encode_wire", "decode_wire"]


def header_width(m: int) -> int:
    """Bytes taken by the two header primes."""
    return 2 * ((m + 7) // 8)


def residue_width(m: int) -> int:
    return (2 * m + 7) // 8


def wire_length(m: int, u: int) -> int:
    return header_width(m) + u * residue_width(m)


def encode_wire(pkt: Packet, m: int, u: int) -> bytes:
    if pkt.u != u:
        raise WireFormatError(f"packet has {pkt.u} residues, session expects {u}")
    pw, rw = (m + 7) // 8, residue_width(m)
    try:
        parts = [p.to_bytes(pw, "big") for p in pkt.pair]
        parts += [r.to_bytes(rw, "big") for r in pkt.residues]
    except OverflowError as exc:
        raise WireFormatError(f"packet {pkt} does not fit an m={m} frame") from exc
    return b"".join(parts)


def decode_wire(data: bytes, m: int, u: int) -> Packet:
    expected = wire_length(m, u)
    if len(data) != expected:
        raise WireFormatError(f"expected {expected} bytes, got {len(data)}")
    pw, rw = (m + 7) // 8, residue_width(m)
    p = int.from_bytes(data[:pw], "big")
    q = int.from_bytes(data[pw : 2 * pw], "big")
    for prime in (p, q):
        if not is_prime(prime):
            raise WireFormatError(f"header field {prime} is not prime")
    if p == q:
        raise WireFormatError("header primes must differ")
    off = 2 * pw
    residues = tuple(
        int.from_bytes(data[off + i * rw : off + (i + 1) * rw], "big") for i in range(u)
    )
    for r in residues:
        if r >= p * q:
            raise WireFormatError(f"residue {r} is not below {p}*{q}")
    return Packet(residues, (p, q))
