import itertools
import random

import pytest

from matchfix.brackets import Bracket
from matchfix.coupling import (
    CHECK_NAMES,
    BracketClass,
    classify_bracket,
    invert_sigma_i,
    invert_sigma_j,
    make_context,
    meet_round,
    naive_sigma_j,
    oriented_pairs,
    sigma_i,
    sigma_j,
    verify_coupling,
    verify_tournament,
)
from matchfix.errors import InvalidParameters, LimitExceeded, NotBadBracket, PlayerSetMismatch
from matchfix.tournament import Tournament, enumerate_tournaments, generate_witness, parse_tournament

from conftest import random_tournament


def lower_wins_except(n, upsets):
    """Lower index wins every match except the listed ``(winner, loser)`` upsets."""
    upsets = set(upsets)
    return Tournament.from_edges(n, [(b, a) if (b, a) in upsets else (a, b) for a, b in itertools.combinations(range(n), 2)])


# players: i=0 j=1 k=2 k1=3 i1=4 j1=5 u=6 v=7
NAIVE_T = lower_wins_except(8, [(1, 0), (2, 1), (4, 1)])
B3 = Bracket((4, 0, 1, 5, 2, 3, 6, 7))  # i meets j in round 2, k arrives in round 3
B4 = Bracket((1, 0, 2, 3, 4, 5, 6, 7))  # i meets j in round 1, and i1 is the latest to beat j

# the sigma_j example needs i's round-2 opponent to beat j, so i and j meet in
# round 3 and k arrives in round 4: 16 leaves.
# i=0 j=1 k=2 i1=3 i2=4 i2b=5 j1=6 j2=7 j2b=8, the rest filler
B2_T = lower_wins_except(16, [(1, 0), (2, 1), (4, 1)])
B2 = Bracket((0, 3, 4, 5, 1, 6, 7, 8, 2, 9, 10, 11, 12, 13, 14, 15))


def test_meet_round():
    assert meet_round(0, 1) == 1
    assert meet_round(1, 2) == 2
    assert meet_round(3, 4) == 3


def test_classification_examples():
    t = generate_witness("three_cycle_padded", 3)
    # i=1 loses to j=0 and to nobody else; 2 knocks j out
    assert classify_bracket(t, 1, 0, Bracket((1, 3, 2, 0))) is BracketClass.GOOD_NONMEETING
    assert classify_bracket(t, 1, 0, Bracket((1, 2, 0, 3))) is BracketClass.GOOD_J_CHAMPION
    assert classify_bracket(t, 1, 0, Bracket((1, 0, 2, 3))) is BracketClass.BAD
    assert classify_bracket(t, 1, 0, Bracket((1, 0, 3, 2))) is BracketClass.BAD
    t2 = lower_wins_except(4, [(1, 0)])
    assert classify_bracket(t2, 0, 1, Bracket((0, 1, 2, 3))) is BracketClass.GOOD_J_CHAMPION


def test_preconditions():
    t = generate_witness("three_cycle_padded", 3)
    with pytest.raises(InvalidParameters):
        classify_bracket(t, 0, 1, Bracket((0, 1, 2, 3)))
    with pytest.raises(PlayerSetMismatch):
        classify_bracket(t, 1, 0, Bracket((0, 1, 2, 5)))
    with pytest.raises(NotBadBracket):
        make_context(t, 1, 0, Bracket((1, 2, 0, 3)))
    with pytest.raises(LimitExceeded):
        verify_coupling(B2_T, 0, 1)


def test_sigma_i_example():
    # i=0 i1=3 j=1 j1=4 k=2 k1=5; i beats i1, j beats i, k beats j
    t = lower_wins_except(8, [(1, 0), (2, 1)])
    b1 = Bracket((0, 3, 1, 4, 2, 5, 6, 7))
    ctx = make_context(t, 0, 1, b1)
    assert (ctx.meet_round, ctx.k_player, ctx.k_round) == (2, 2, 3)
    image = sigma_i(ctx)
    assert image.leaves == (2, 5, 1, 4, 0, 3, 6, 7)
    assert classify_bracket(t, 0, 1, image) is BracketClass.GOOD_NONMEETING
    assert invert_sigma_i(t, 0, 1, image) == b1


def test_sigma_j_example_with_subswap():
    ctx = make_context(B2_T, 0, 1, B2)
    assert (ctx.meet_round, ctx.k_player, ctx.k_round) == (3, 2, 4)
    assert ctx.opponents_i == (3, 4)
    image = sigma_j(ctx)
    # i2's pair moves to j's side, j2's pair comes over, then j's quarter trades places with k's
    assert image.leaves == (0, 3, 7, 8, 2, 9, 10, 11, 1, 6, 4, 5, 12, 13, 14, 15)
    assert classify_bracket(B2_T, 0, 1, image) is not BracketClass.BAD
    assert invert_sigma_j(B2_T, 0, 1, image) == B2
    assert naive_sigma_j(ctx).leaves == (0, 3, 4, 5, 2, 9, 10, 11, 1, 6, 7, 8, 12, 13, 14, 15)


def test_naive_sigma_j_collides_full_does_not():
    c3, c4 = make_context(NAIVE_T, 0, 1, B3), make_context(NAIVE_T, 0, 1, B4)
    assert (c3.meet_round, c3.k_player) == (2, 2)
    assert (c4.meet_round, c4.k_player) == (1, 4)
    collided = (4, 0, 2, 3, 1, 5, 6, 7)
    assert naive_sigma_j(c3).leaves == naive_sigma_j(c4).leaves == collided
    assert sigma_j(c3) != sigma_j(c4)
    assert sigma_j(c3).leaves == (5, 0, 2, 3, 1, 4, 6, 7)
    naive = verify_coupling(NAIVE_T, 0, 1, sigma_j_map=naive_sigma_j)
    full = verify_coupling(NAIVE_T, 0, 1)
    assert not naive.checks["injective_j"]
    assert full.checks["injective_j"] and full.checks["roundtrip_j"]


def test_three_cycle_certificate():
    t = generate_witness("three_cycle_padded", 3)
    rec = verify_coupling(t, 1, 0)
    assert rec.passed and rec.total == 24
    assert rec.bad == 8 and rec.good == 16


def test_condorcet_winner_has_no_bad_brackets():
    t = lower_wins_except(4, [])
    for i in (1, 2, 3):
        rec = verify_coupling(t, i, 0)
        assert rec.bad == 0 and rec.passed


def test_round_trips_exhaustive_n4():
    for t in enumerate_tournaments(4):
        for i, j in oriented_pairs(t):
            for leaves in itertools.permutations(range(4)):
                b = Bracket(leaves)
                if classify_bracket(t, i, j, b) is not BracketClass.BAD:
                    continue
                ctx = make_context(t, i, j, b)
                assert classify_bracket(t, i, j, sigma_i(ctx)) is not BracketClass.BAD
                assert classify_bracket(t, i, j, sigma_j(ctx)) is not BracketClass.BAD
                assert invert_sigma_i(t, i, j, sigma_i(ctx)) == b
                assert invert_sigma_j(t, i, j, sigma_j(ctx)) == b


def test_round_trips_sampled_n8():
    r = random.Random(5)
    for _ in range(3):
        t = random_tournament(8, r)
        i, j = oriented_pairs(t)[r.randrange(28)]
        bad = 0
        for _ in range(400):
            leaves = list(range(8))
            r.shuffle(leaves)
            b = Bracket(tuple(leaves))
            if classify_bracket(t, i, j, b) is not BracketClass.BAD:
                continue
            bad += 1
            ctx = make_context(t, i, j, b)
            assert invert_sigma_i(t, i, j, sigma_i(ctx)) == b
            assert invert_sigma_j(t, i, j, sigma_j(ctx)) == b


# Found by the n=8 verifier: sigma_i and sigma_j reach the same bracket from
# two different bad brackets.  In the shared image player 6 meets j before i
# (the sigma_i pattern) and player 7 meets i before j (the sigma_j pattern),
# so the separator holds for each map with its own k and does not tell the
# images apart.
COLLISION_T = parse_tournament("""8
-1111100
0-011011
01-01001
001-1001
0000-000
01111-10
101110-0
1000111-
""")


def test_images_can_overlap_at_n8():
    image = Bracket((0, 5, 2, 6, 1, 7, 3, 4))
    ci = make_context(COLLISION_T, 1, 0, Bracket((0, 5, 1, 7, 2, 6, 3, 4)))
    cj = make_context(COLLISION_T, 1, 0, Bracket((7, 5, 2, 6, 1, 0, 3, 4)))
    assert (ci.meet_round, ci.k_player, ci.k_round) == (2, 6, 3)
    assert (cj.meet_round, cj.k_player, cj.k_round) == (1, 7, 3)
    assert sigma_i(ci) == sigma_j(cj) == image
    rec = verify_coupling(COLLISION_T, 1, 0)
    assert not rec.checks["disjoint"] and rec.shared_images > 0
    assert all(rec.checks[name] for name in CHECK_NAMES if name != "disjoint")


def test_n4_exhaustive_and_record_shape():
    records = [rec for t in enumerate_tournaments(4) for rec in verify_tournament(t)]
    assert len(records) == 64 * 6
    assert all(rec.passed for rec in records)
    d = records[0].as_dict()
    assert set(d["checks"]) == set(CHECK_NAMES)
