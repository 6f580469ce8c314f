import random

from crtnc.coding import SessionConfig
from crtnc.simulator import run_session
from crtnc.topology import generate_layered


def random_layered_session(seed, policy="per-node", path="full", trace=True):
    """A small random multi-source session; returns (topology, messages, report)."""
    rng = random.Random(seed)
    m = rng.randint(8, 16)
    u = rng.randint(1, 2)
    topo = generate_layered(
        rng.randint(1, 6),
        rng.randint(2, 10),
        rng.randint(1, 3),
        rng.randint(1, 4),
        rng.choice([0.5, 0.8, 1.0]),
        rng,
    )
    config = SessionConfig(m=m, u=u, recode_policy=policy, recode_path=path, seed=seed)
    messages = [tuple(rng.getrandbits(config.n) for _ in range(u)) for _ in topo.sources]
    report = run_session(topo, config, messages, random.Random(f"{seed}/session"), trace=trace)
    return topo, messages, report


def check_conservation(topo, messages, report):
    """Every traced packet agrees with the sources' messages prime by prime."""
    owner = {p: ident.index for ident in report.identities for p in ident.pair}
    checked = 0
    for pkt in report.edge_packets:
        if pkt is None:
            continue
        for prime in pkt.pair:
            src = owner[prime]
            for slot, r in enumerate(pkt.residues):
                assert r % prime == messages[src][slot] % prime
        checked += 1
    return checked
