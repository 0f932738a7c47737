import pytest

from flipdist import instanceio
from flipdist.errors import (IllegalScriptError, Not3ConnectedError,
                             NotACoverError, NotPlanarError)
from flipdist.gadgets import blocking_set, channel_mouths
from flipdist.geometry import pt
from flipdist.reduction import (ReductionInstance, audit_script, build_instance,
                                convex_drawing, cover_to_script,
                                drawing_from_coords, eliminate_sharp,
                                instance_coord_bits, region_to_pointset)
from flipdist.search import FlipScript, exact_distance, lower_bound
from flipdist.triangulation import FlipMove, Triangulation, edge, validate
from flipdist.vertexcover import Graph, exact_vc

K4_EDGES = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
PRISM_EDGES = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5),
               (0, 3), (1, 4), (2, 5)]


@pytest.fixture(scope="module")
def c3_instance():
    pos = {0: pt(0, 0), 1: pt(1200, 0), 2: pt(600, 1000)}
    d = drawing_from_coords(pos, [(0, 1), (1, 2), (0, 2)])
    return build_instance(d, k_input=2, t_outer=0)


@pytest.fixture(scope="module")
def k4_instance():
    d = convex_drawing([0, 1, 2, 3], K4_EDGES, outer=[0, 1, 2])
    d2, t = eliminate_sharp(d)
    return build_instance(d2, k_input=3, t_outer=t), d2, t


@pytest.fixture(scope="module")
def prism_instance():
    d = convex_drawing(list(range(6)), PRISM_EDGES, outer=[0, 1, 2])
    d2, t = eliminate_sharp(d)
    return build_instance(d2, k_input=4, t_outer=t), d2, t


def test_convex_drawing_k4():
    d = convex_drawing([0, 1, 2, 3], K4_EDGES, outer=[0, 1, 2])
    assert len(d.faces()) == 4
    assert sorted(d.outer_face) == [0, 1, 2]
    # the inner vertex lies strictly inside the outer triangle
    from flipdist.geometry import orientation
    a, b, c = (d.pos[v] for v in d.outer_face)
    s = orientation(a, b, c)
    assert all(orientation(p, q, d.pos[3]) == s
               for p, q in ((a, b), (b, c), (c, a)))


def test_convex_drawing_prism_faces():
    d = convex_drawing(list(range(6)), PRISM_EDGES, outer=[0, 1, 2])
    assert len(d.faces()) == 5


def test_convex_drawing_rejects_bad_graphs():
    with pytest.raises(Not3ConnectedError):
        convex_drawing([0, 1, 2, 3, 4],
                       [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)])
    k5 = [(i, j) for i in range(5) for j in range(i + 1, 5)]
    with pytest.raises(NotPlanarError):
        convex_drawing(list(range(5)), k5)


def test_eliminate_sharp_counts():
    d = convex_drawing([0, 1, 2, 3], K4_EDGES, outer=[0, 1, 2])
    d2, t = eliminate_sharp(d)
    assert t == 3
    assert len(d2.pos) == 10          # 1 inner + 3 chains of 3
    assert len(d2.edges) == 12        # |E| + 2t
    assert d2.sharp_vertices() == []
    assert all(d2.degree(v) in (2, 3) for v in d2.pos)


def test_eliminate_sharp_identity_when_clean():
    pos = {0: pt(0, 0), 1: pt(1200, 0), 2: pt(600, 1000)}
    d = drawing_from_coords(pos, [(0, 1), (1, 2), (0, 2)])
    d2, t = eliminate_sharp(d)
    assert t == 0 and d2 is d


def test_sharp_equivalence_vc():
    for name, edges, outer in (("K4", K4_EDGES, [0, 1, 2]),
                               ("prism", PRISM_EDGES, [0, 1, 2])):
        d = convex_drawing(sorted({v for e in edges for v in e}), edges, outer)
        d2, t = eliminate_sharp(d)
        base, _ = exact_vc(Graph(sorted({v for e in edges for v in e}), edges))
        lifted, _ = exact_vc(Graph(d2.pos.keys(), d2.edges))
        assert lifted == base + t


def test_c3_instance_valid(c3_instance):
    inst = c3_instance
    assert validate(inst.t1).ok and validate(inst.t2).ok
    assert len(inst.channels) == 3 and len(inst.gadgets) == 3
    assert inst.threshold == 2 * 2 + 28 * 3 == 88
    only1, only2 = inst.t1.edges - inst.t2.edges, inst.t2.edges - inst.t1.edges
    assert len(only1) == len(only2) == 3 * 11


def test_k4_instance_shape(k4_instance):
    inst, _, t = k4_instance
    assert t == 3
    assert len(inst.channels) == 12 and len(inst.gadgets) == 10
    assert inst.k_prime == 6
    assert inst.threshold == 2 * 6 + 28 * 12 == 348
    delta = len(inst.t1.edges - inst.t2.edges) + len(inst.t2.edges - inst.t1.edges)
    assert delta == 12 * 22


def test_gadget_audit_blocking_sets(c3_instance, k4_instance):
    for inst in (c3_instance, k4_instance[0]):
        locks = {v: inst.gadgets[v].lock for v in inst.gadgets}
        per_gadget = {v: [] for v in inst.gadgets}
        for key, rec in inst.channels.items():
            for v, cap in rec.caps.items():
                found = blocking_set(inst.t1, cap, edge(*rec.gates[v]))
                assert found == set(rec.blocking[v])
                assert len(found) == 3
                assert locks[v] in found
                per_gadget[v].append(found)
        for v, sets in per_gadget.items():
            for i in range(len(sets)):
                for j in range(i + 1, len(sets)):
                    assert sets[i] & sets[j] == {locks[v]}


def test_gadget_audit_mouths(c3_instance):
    inst = c3_instance
    pts = inst.region.points
    for key, rec in inst.channels.items():
        upper = [pts[i] for i in rec.upper]
        lower = [pts[i] for i in rec.lower]
        for v, cap in rec.caps.items():
            end = 0 if rec.gates[v] == (rec.upper[0], rec.lower[0]) else 1
            m = channel_mouths(upper, lower, end)
            assert m.narrow.is_subset_of(m.wide)
            assert m.narrow.strictly_contains(pts[cap])
            g = inst.gadgets[v]
            for name, idx in g.points.items():
                if idx != cap:
                    assert not m.wide.contains(pts[idx])


def test_cover_to_script_c3(c3_instance):
    inst = c3_instance
    script = cover_to_script(inst, {0, 1})
    assert len(script) == 2 * 2 + 28 * 3 == 88
    end = script.replay(inst.t1)
    assert end.edges == inst.t2.edges
    # unlocking every vertex is still legal
    script_all = cover_to_script(inst, {0, 1, 2})
    assert len(script_all) == 2 * 3 + 28 * 3
    assert script_all.replay(inst.t1).edges == inst.t2.edges
    with pytest.raises(NotACoverError):
        cover_to_script(inst, {0})


def test_cover_to_script_min_covers(k4_instance, prism_instance):
    for inst, d2, t in (k4_instance, prism_instance):
        g = Graph(inst.graph_vertices, inst.graph_edges)
        size, witness = exact_vc(g)
        script = cover_to_script(inst, witness)
        assert len(script) == 2 * size + 28 * len(inst.channels)
        assert script.replay(inst.t1).edges == inst.t2.edges
        report = audit_script(inst, script)
        assert report.unlocked == set(witness)
        assert report.uncapped == set()
        assert report.lower_bound == len(script)
        assert report.implied_cover_size == size


def test_audit_rejects_wrong_scripts(c3_instance):
    inst = c3_instance
    with pytest.raises(IllegalScriptError):
        audit_script(inst, FlipScript(inst.t1.canonical_key(), ()))
    good = cover_to_script(inst, {0, 1})
    with pytest.raises(IllegalScriptError):
        audit_script(inst, FlipScript(good.start_key, good.moves[:-1]))


def test_audit_uncapped_channel_accounting(c3_instance):
    # transform one channel bare-handed (36 flips), the rest via one gadget
    inst = c3_instance
    from flipdist.gadgets import channel_triangulations, Channel
    rec = inst.channels[(0, 1)]
    pts = inst.region.points
    ch = Channel(upper=tuple(pts[i] for i in rec.upper),
                 lower=tuple(pts[i] for i in rec.lower))
    _, t_left, t_right = channel_triangulations(ch)
    res = exact_distance(t_left, t_right)
    assert res.distance == 36
    mapping = dict(zip(range(14), rec.upper + rec.lower))
    bare = [FlipMove(edge(mapping[m.removed[0]], mapping[m.removed[1]]),
                     edge(mapping[m.inserted[0]], mapping[m.inserted[1]]))
            for m in res.script.moves]
    moves = []
    g2 = inst.gadgets[2]
    moves.append(FlipMove(g2.lock, g2.unlock_insert))
    for key in ((0, 2), (1, 2)):
        rec2 = inst.channels[key]
        cap_moves = rec2.cap_scripts[2]
        from flipdist.gadgets import capped_transform_moves, reverse_moves
        moves.extend(cap_moves)
        moves.extend(capped_transform_moves(rec2.upper, rec2.lower,
                                            rec2.caps[2], cap_at_far_end=True))
        moves.extend(reverse_moves(cap_moves))
    moves.append(FlipMove(g2.unlock_insert, g2.lock))
    script = FlipScript(inst.t1.canonical_key(), tuple(bare + moves))
    report = audit_script(inst, script)
    assert report.unlocked == {2}
    assert report.uncapped == {(0, 1)}
    assert report.script_length == 36 + 2 + 28 * 2 == 94
    assert report.lower_bound == 2 * 1 + 36 * 1 + 28 * 2 == 94


def test_pipeline_determinism(c3_instance):
    pos = {0: pt(0, 0), 1: pt(1200, 0), 2: pt(600, 1000)}
    d = drawing_from_coords(pos, [(0, 1), (1, 2), (0, 2)])
    again = build_instance(d, k_input=2, t_outer=0)
    assert instanceio.dumps(again.to_doc()) == instanceio.dumps(c3_instance.to_doc())


def test_instance_doc_roundtrip(c3_instance):
    doc = c3_instance.to_doc()
    text = instanceio.dumps(doc)
    loaded = instanceio.loads(text)
    assert instanceio.dumps(loaded) == text
    inst2 = ReductionInstance.from_doc(loaded)
    assert inst2.threshold == c3_instance.threshold
    script = cover_to_script(inst2, {1, 2})
    assert script.replay(inst2.t1).edges == inst2.t2.edges


def test_coord_bits_polynomial_family(c3_instance, k4_instance, prism_instance):
    sq = {0: pt(0, 0), 1: pt(1000, 0), 2: pt(1000, 1000), 3: pt(0, 1000)}
    c4 = build_instance(
        drawing_from_coords(sq, [(0, 1), (1, 2), (2, 3), (3, 0)]),
        k_input=2, t_outer=0)
    family = [("C3", c3_instance), ("C4", c4), ("prism", prism_instance[0]),
              ("K4", k4_instance[0])]
    sizes = []
    for name, inst in family:
        bits = instance_coord_bits(inst.region)
        n = len(inst.region.points)
        sizes.append((name, n, bits))
        # generous polynomial budget: the meter stays far below quadratic
        assert bits <= 40 + n
    assert all(bits <= 200 for _, _, bits in sizes), sizes


def test_region_to_pointset_c3(c3_instance):
    inst = c3_instance
    psi = region_to_pointset(inst, multiplicity=1)
    assert validate(psi.t1).ok and validate(psi.t2).ok
    assert (psi.t1.edges - psi.t2.edges) == (inst.t1.edges - inst.t2.edges)
    assert (psi.t2.edges - psi.t1.edges) == (inst.t2.edges - inst.t1.edges)
    # hole and pocket fills are identical across the pair
    assert (psi.t1.edges - inst.t1.edges) == (psi.t2.edges - inst.t2.edges)
    assert lower_bound(psi.t1, psi.t2) == lower_bound(inst.t1, inst.t2)


def test_region_to_pointset_default_multiplicity(c3_instance):
    inst = c3_instance
    psi = region_to_pointset(inst)
    assert psi.multiplicity == inst.threshold + 1
    assert all(len(v) == psi.multiplicity for v in psi.sliver_points.values())
    assert psi.protected_edges and \
        all(e in inst.region.mandatory_edges for e in psi.protected_edges)


def test_capping_one_channel_leaves_siblings_blocked(k4_instance):
    # after unlocking a gadget and capping one of its channels, its sibling
    # channels are still separated from their caps by at least two edges
    inst, _, _ = k4_instance
    deg3 = next(v for v in inst.gadgets if
                sum(v in k for k in inst.channels) == 3)
    keys = sorted(k for k in inst.channels if deg3 in k)
    g = inst.gadgets[deg3]
    t = inst.t1.apply_flip(FlipMove(g.lock, g.unlock_insert))
    first = keys[0]
    for m in inst.channels[first].cap_scripts[deg3]:
        t = t.apply_flip(m)
    for other in keys[1:]:
        rec = inst.channels[other]
        remaining = blocking_set(t, rec.caps[deg3], edge(*rec.gates[deg3]))
        assert len(remaining) >= 2


def test_theta_graph_pipeline():
    # both degree-3 hubs of a theta graph are sharp (all edges point one
    # way); the replacement windows must adapt to the drawing orientation
    pos = {0: pt(0, 0), 1: pt(2000, 0),
           2: pt(1000, 900), 3: pt(1000, 200), 4: pt(1000, -800)}
    d = drawing_from_coords(pos, [(0, 2), (2, 1), (0, 3), (3, 1), (0, 4), (4, 1)])
    d2, t = eliminate_sharp(d)
    assert t == 2 and d2.sharp_vertices() == []
    inst = build_instance(d2, k_input=2, t_outer=t)
    size, witness = exact_vc(Graph(d2.pos.keys(), d2.edges))
    script = cover_to_script(inst, witness)
    assert len(script) == 2 * size + 28 * len(inst.channels)
    rep = audit_script(inst, script)
    assert rep.unlocked == set(witness) and not rep.uncapped


def test_gadget_scripts_replay_from_their_start_states(c3_instance):
    from flipdist.reduction import gadget_scripts
    from flipdist.gadgets import reverse_moves, canonical_capped_edges
    inst = c3_instance
    key = (0, 1)
    for vertex in key:
        s = gadget_scripts(inst, vertex, key)
        assert (len(s.unlock), len(s.cap), len(s.capped_transform),
                len(s.canonical_half)) == (1, 2, 24, 12)
        t = inst.t1.apply_script(s.unlock).apply_script(s.cap)
        rec = inst.channels[key]
        a, b = rec.gates[vertex]
        cap = rec.caps[vertex]
        assert edge(cap, a) in t.edges and edge(cap, b) in t.edges
        t_half = t.apply_script(s.canonical_half)
        assert canonical_capped_edges(rec.upper, rec.lower, cap) <= t_half.edges
        t2 = t.apply_script(s.capped_transform)
        t2 = t2.apply_script(reverse_moves(s.cap))
        t2 = t2.apply_script(reverse_moves(s.unlock))
        # that channel now right-inclined, everything else untouched
        from flipdist.gadgets import right_edges
        assert right_edges(rec.upper, rec.lower) <= t2.edges
        other = set(inst.t1.edges) - set(left_edges_for(rec))
        assert other <= t2.edges


def left_edges_for(rec):
    from flipdist.gadgets import left_edges
    return left_edges(rec.upper, rec.lower)
