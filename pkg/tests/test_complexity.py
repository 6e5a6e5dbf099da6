
from phasenas.complexity import count_structure, estimate_complexity
from phasenas.encoding import (
    EncodingConfig,
    NetworkArchitecture,
    NetworkGenome,
    PhaseGraph,
    decode_network,
    encode_phase,
    parse_genome,
    random_genome,
)

CFG = EncodingConfig()


def arch_of(text, cfg=CFG):
    return decode_network(parse_genome(text, cfg), cfg)


def test_empty_with_skips_is_free():
    a = arch_of(" ".join(["0-00-000-0000-00000-1"] * 3))
    r = estimate_complexity(a)
    assert (r.params, r.flops, r.active_nodes, r.active_connections) == (0, 0, 0, 0)


def test_single_node_closed_form():
    pg = PhaseGraph(n_o=1, active_nodes=frozenset({1}), edges=frozenset(),
                    input_attached=frozenset({1}), output_attached=frozenset({1}), skip=False)
    a = NetworkArchitecture((pg,), (32,), channel_width=16, input_channels=16)
    r = estimate_complexity(a)
    assert r.flops == 9 * 16 * 16 * 32 * 32 == 2_359_296
    assert r.params == 9 * 256 + 32 == 2_336


def test_first_phase_input_nodes_read_input_channels():
    cfg = EncodingConfig(n_p=1, n_o=3, input_channels=3, channel_width=16)
    r = estimate_complexity(arch_of("1-00-0", cfg))  # 1 -> 2
    conv_in, conv_mid = 9 * 3 * 16, 9 * 16 * 16
    assert r.params == conv_in + conv_mid + 2 * 32
    assert r.flops == (conv_in + conv_mid) * 32 * 32


def test_count_structure_empty():
    assert count_structure(arch_of(" ".join(["0-00-000-0000-00000-0"] * 3))) == (0, 0)


def test_count_structure_fully_connected_three_nodes():
    cfg = EncodingConfig(n_p=1, n_o=3)
    assert count_structure(arch_of("1-11-0", cfg)) == (3, 5)


def _add_random_edge(rng, g: NetworkGenome):
    bits = g.to_array()
    zeros = [i for i in range(len(bits)) if bits[i] == 0 and (i + 1) % 16 != 0]
    if not zeros:
        return None
    bits[rng.choice(zeros)] = 1
    return NetworkGenome.from_array(bits, g.n_p)


def test_adding_edges_never_decreases_anything(rng):
    for _ in range(500):
        g = random_genome(rng, CFG)
        h = _add_random_edge(rng, g)
        if h is None:
            continue
        a, b = estimate_complexity(decode_network(g, CFG)), estimate_complexity(decode_network(h, CFG))
        assert b.flops >= a.flops and b.params >= a.params
        assert b.active_nodes >= a.active_nodes


def test_bridging_edge_can_lower_connection_count():
    # 1->2 and 3->4 are separate chains (2 edges, 2 inputs, 2 outputs); 2->3
    # joins them into one chain and retires an input and an output attachment
    cfg = EncodingConfig(n_p=1, n_o=4)
    before = count_structure(arch_of("1-00-001-0", cfg))
    after = count_structure(arch_of("1-01-001-0", cfg))
    assert before == (4, 6) and after == (4, 5)


def test_halving_resolution_quarters_flops(rng):
    for _ in range(50):
        g = random_genome(rng, CFG)
        hi = estimate_complexity(decode_network(g, EncodingConfig(input_resolution=32)))
        lo = estimate_complexity(decode_network(g, EncodingConfig(input_resolution=16)))
        assert lo.flops * 4 == hi.flops
        assert lo.params == hi.params


def test_deterministic(rng):
    g = random_genome(rng, CFG)
    assert estimate_complexity(decode_network(g, CFG)) == estimate_complexity(decode_network(g, CFG))


# (nodes, connections) profiles in increasing-complexity order, realized as
# concrete phases; placed in the middle phase so the network input is not involved
TABLE_PROFILES = [
    ((3, 4), [(1, 2), (2, 3)]),
    ((4, 6), [(1, 2), (1, 3), (2, 4), (3, 4)]),
    ((4, 7), [(1, 2), (1, 3), (2, 4), (3, 4), (1, 4)]),
    ((5, 9), [(1, 2), (2, 3), (3, 4), (4, 5), (1, 3), (2, 4), (3, 5)]),
    ((5, 10), [(1, 2), (2, 3), (3, 4), (4, 5), (1, 3), (2, 4), (3, 5), (1, 4)]),
    ((6, 13), [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 3), (2, 4), (3, 5),
               (4, 6), (1, 4), (2, 5)]),
]


def test_table_profiles_ordering():
    empty = encode_phase([], 6, False)
    reports = []
    for (nodes, conns), edges in TABLE_PROFILES:
        g = NetworkGenome((empty, encode_phase(edges, 6, False), empty))
        r = estimate_complexity(decode_network(g, CFG))
        assert (r.active_nodes, r.active_connections) == (nodes, conns)
        reports.append(r)
    for a, b in zip(reports, reports[1:]):
        assert b.params >= a.params and b.flops >= a.flops
        if b.active_nodes > a.active_nodes:
            assert b.params > a.params and b.flops > a.flops
        else:
            # summed inputs keep every node's cost independent of its fan-in
            assert (b.params, b.flops) == (a.params, a.flops)
