import json
import random

import pytest
from conftest import check_conservation, random_layered_session

from crtnc.coding import Full, PartialMod, SessionConfig, Unrecovered
from crtnc.errors import ConfigurationError
from crtnc.simulator import (
    ReceiverReport,
    RecoveryReport,
    average_rows,
    experiment_table2,
    recover_rate,
    run_session,
    table2_session,
)
from crtnc.topology import Topology, butterfly, generate_layered


def butterfly_report(message=200):
    return run_session(
        butterfly(),
        SessionConfig(m=4, n=8, mode="single"),
        [message],
        random.Random(0),
        pool=(3, 11, 5, 7),
        picks={"c": [(7, 11)]},
        trace=True,
    )


def test_butterfly_example():
    rep = butterfly_report()
    topo = butterfly()
    labels = {e: str(p) for e, p in zip(topo.edges, rep.edge_packets)}
    assert labels[("s", "a")] == "[2 | 3,11]"
    assert labels[("s", "b")] == "[25 | 5,7]"
    assert labels[("c", "d")] == "[46 | 7,11]"
    t1, t2 = rep.receivers
    assert t1.solution[0].residue == 200 and t1.solution[0].modulus == 231
    assert t1.outcomes == ((Full(200),),) and t2.outcomes == ((Full(200),),)


def test_butterfly_zero_message():
    rep = butterfly_report(0)
    assert all(p.residues == (0,) for p in rep.edge_packets)
    t1, t2 = rep.receivers
    # 0 and 231 are both 8-bit members of 0 mod 231
    assert t1.outcomes == ((PartialMod(0, 231),),)
    assert t2.outcomes == ((Full(0),),)


def test_single_source_random_picks_always_consistent():
    for seed in range(50):
        rep = run_session(butterfly(), SessionConfig(m=6, n=10, mode="single"), [777], random.Random(seed))
        for r in rep.receivers:
            cls = r.solution[0]
            assert cls.contains(777)
            out = r.outcomes[0][0]
            assert out == Full(777) or (isinstance(out, PartialMod) and 777 % out.modulus == out.residue)


def test_single_source_rejects_many_sources():
    topo = generate_layered(2, 3, 1, 2, 1.0, random.Random(0))
    with pytest.raises(ConfigurationError):
        run_session(topo, SessionConfig(m=8, n=8, mode="single"), [1])


def test_single_source_u_slots():
    rep = run_session(
        butterfly(), SessionConfig(m=8, n=12, u=3, mode="single"), [(1, 2000, 4095)], random.Random(2)
    )
    for r in rep.receivers:
        assert [c.contains(x) for c, x in zip(r.solution, (1, 2000, 4095))] == [True] * 3


def test_k1_multi_source_full():
    topo = generate_layered(1, 5, 3, 4, 0.4, random.Random(3))
    rep = run_session(topo, SessionConfig(m=12), [12345], random.Random(1))
    assert all(r.outcomes == ((Full(12345),),) for r in rep.receivers)
    rates, mean = recover_rate(rep)
    assert rates == [1.0] * 4 and mean == 1.0


@pytest.mark.parametrize("policy", ["per-node", "per-edge"])
def test_congruence_conservation(policy):
    for seed in range(100):
        topo, messages, rep = random_layered_session(seed, policy=policy)
        assert check_conservation(topo, messages, rep) > 0


def test_receiver_modulus_is_product_of_collected_primes():
    for seed in range(100):
        _, messages, rep = random_layered_session(seed, policy="per-edge")
        for r in rep.receivers:
            N = r.solution[0].modulus if r.solution else 1
            prod = 1
            for p in r.collected_primes:
                prod *= p
            assert N == prod
            dividing = {p for p in rep.session_primes if N % p == 0}
            assert dividing == r.collected_primes


def test_outcomes_match_messages_and_divisibility():
    for seed in range(100):
        _, messages, rep = random_layered_session(seed, policy="per-edge")
        for r in rep.receivers:
            N = r.solution[0].modulus if r.solution else 1
            for ident in rep.identities:
                p, q = ident.pair
                outs = r.outcomes[ident.index]
                if N % p == 0 and N % q == 0:
                    assert outs == tuple(Full(x) for x in messages[ident.index])
                elif N % p == 0 or N % q == 0:
                    assert all(isinstance(o, PartialMod) for o in outs)
                else:
                    assert all(isinstance(o, Unrecovered) for o in outs)
        rates, _ = recover_rate(rep)
        for r, rate in zip(rep.receivers, rates):
            N = r.solution[0].modulus if r.solution else 1
            scan = sum(N % i.pair[0] == 0 and N % i.pair[1] == 0 for i in rep.identities)
            assert rate == scan / rep.k


def test_determinism():
    a = random_layered_session(5, policy="per-edge", trace=False)[2]
    b = random_layered_session(5, policy="per-edge", trace=False)[2]
    assert a.to_dict() == b.to_dict()


def test_recover_rate_counts():
    mk = lambda outs: ReceiverReport("t", 1, frozenset(), None, tuple((o,) for o in outs))
    rep = RecoveryReport(
        "multi", 4, 1, 0, (), (mk([Full(1), Unrecovered(), Full(3), PartialMod(1, 7)]),)
    )
    assert recover_rate(rep) == ([0.5], 0.5)
    all_full = RecoveryReport("multi", 2, 1, 0, (), (mk([Full(1), Full(2)]),))
    assert recover_rate(all_full)[1] == 1.0
    none = RecoveryReport("multi", 2, 1, 0, (), (mk([Unrecovered(), Unrecovered()]),))
    assert recover_rate(none)[1] == 0.0


def test_report_json_serializable():
    _, _, rep = random_layered_session(1)
    text = json.dumps(rep.to_dict())
    assert json.loads(text)["k"] == rep.k


def test_unreached_internal_node_is_silent():
    topo = Topology(
        ("s", "x", "t"),
        (("s", "t"),),
        roles={"s": "source", "x": "internal", "t": "receiver"},
    )
    rep = run_session(topo, SessionConfig(m=8), [5], random.Random(0))
    assert rep.receivers[0].outcomes == ((Full(5),),)


def test_table2_session_correctness():
    """Every full recovery on a full-size layered network equals the injected message."""
    for seed in range(2):
        topo, rep = table2_session(200, 5, seed, policy="per-edge")
        msg_rng = random.Random(f"{seed}/messages")
        messages = [msg_rng.getrandbits(30) for _ in range(100)]
        assert len(rep.receivers) == 10
        for r in rep.receivers:
            for i, outs in enumerate(r.outcomes):
                if isinstance(outs[0], Full):
                    assert outs[0].value == messages[i]


def test_experiment_rows_sorted_and_averaged():
    rows = experiment_table2([20, 10], [1], [1, 0])
    assert [(r.M, r.seed) for r in rows] == [(10, 0), (10, 1), (20, 0), (20, 1)]
    means = average_rows(rows)
    assert [(r.M, r.seed) for r in means] == [(10, None), (20, None)]
    assert means[0].r_prime == pytest.approx((rows[0].r_prime + rows[1].r_prime) / 2)
    assert all(len(r.t) == 10 for r in rows)
    assert all(0 <= r.r_prime <= 1 for r in rows)
