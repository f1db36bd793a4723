import pytest

from rwcollide.errors import InvalidParameter
from rwcollide.families import FAMILY_NAMES, build_families, build_family, chain_label, parse_families, parse_range


def test_parse_range():
    assert parse_range("3..5") == [3, 4, 5]
    assert parse_range("7") == [7]
    for bad in ("5..3", "a..b", "3-5", ""):
        with pytest.raises(InvalidParameter):
            parse_range(bad)


def test_parse_families():
    items = parse_families("cycle:3..4,hypercube:2:eps=0.3, complete:5")
    assert items == [("cycle", 3, {}), ("cycle", 4, {}), ("hypercube", 2, {"eps": 0.3}), ("complete", 5, {})]
    for bad in ("torus:3", "cycle", "cycle:3:eps", "cycle:3:eps=x", ""):
        with pytest.raises(InvalidParameter):
            parse_families(bad)


def test_build_every_family():
    for name in FAMILY_NAMES:
        chain = build_family(name, 3)
        assert chain.n >= 3
        assert chain_label(chain)
    assert build_family("trap", 3, c=20).params["c"] == 20.0
    with pytest.raises(InvalidParameter):
        build_family("torus", 3)


def test_build_families_labels():
    labels = [chain_label(c) for c in build_families("hypercube:2..3:eps=0.5,cycle:4")]
    assert len(labels) == 3 and len(set(labels)) == 3
