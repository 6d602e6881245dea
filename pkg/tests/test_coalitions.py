from __future__ import annotations

import pytest

from game_core.coalitions import (
    EXACT_PLAYER_LIMIT,
    Coalition,
    PlayerRole,
    PlayerUniverse,
    enumerate_subsets,
    membership_matrix,
    subset_masks,
)
from game_core.errors import ArgumentError, CapacityError


def test_coalition_rejects_bits_outside_universe():
    with pytest.raises(ArgumentError):
        Coalition(0b1000, 3)


def test_membership_union_and_removal_are_pure():
    c = Coalition.from_players([0, 2], 4)
    d = Coalition.from_players([1], 4)
    assert c.contains(2) and not c.contains(1)
    assert c.union(d).players() == (0, 1, 2)
    assert c.remove(2).players() == (0,)
    assert c.players() == (0, 2)
    assert c.add(3).size == 3
    assert d.is_subset(c.union(d))


def test_enumerate_two_free_players_excluding_pair():
    subsets = list(enumerate_subsets(Coalition.from_players([0, 1], 3), 3))
    assert [s.bits for s in subsets] == [0b000, 0b100]


def test_enumerate_empty_free_set():
    subsets = list(enumerate_subsets(Coalition.from_players([0, 1], 2), 2))
    assert [s.bits for s in subsets] == [0]


def test_enumerate_full_universe_is_ascending_and_distinct():
    bits = [s.bits for s in enumerate_subsets(Coalition.empty(4), 4)]
    assert bits == list(range(16))


def test_subset_masks_skip_excluded_players():
    masks = subset_masks(0b0101, 5).tolist()
    assert len(masks) == 8
    assert masks == sorted(masks)
    assert all(m & 0b0101 == 0 for m in masks)


def test_enumeration_beyond_cap_names_the_limit():
    with pytest.raises(CapacityError, match=str(EXACT_PLAYER_LIMIT)):
        list(enumerate_subsets(Coalition.empty(25), 25))


def test_universe_layout_is_contiguous():
    universe = PlayerUniverse(2, 3)
    assert universe.n_players == 5
    assert universe.roles == (PlayerRole.VISUAL,) * 2 + (PlayerRole.QUESTION,) * 3
    assert universe.question_player(0) == 2
    assert universe.visual_bits == 0b00011
    assert universe.question_bits == 0b11100
    with pytest.raises(ArgumentError):
        universe.visual_player(2)


def test_membership_matrix_rows_match_bits():
    rows = membership_matrix([0b101, 0b010], 3)
    assert rows.tolist() == [[True, False, True], [False, True, False]]
