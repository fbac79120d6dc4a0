import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given

from etalecorr import serialize
from etalecorr.bundles import function_bundle, identity_correspondence_bundle
from etalecorr.generators import (
    random_bundle,
    random_coefficient_correspondence,
    random_groupoid,
    random_gset,
    small_correspondence,
)
from etalecorr.groupoid import FiniteGroupoid
from etalecorr.invsemi import symmetric_inverse_monoid
from etalecorr.serialize import InstanceError, Suite, dumps, load, loads

from conftest import rng_for, seeds

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


def round_trip(obj):
    back = loads(dumps(obj))
    assert back == obj
    assert dumps(back) == dumps(obj)


@given(seeds)
def test_groupoids_round_trip(seed):
    round_trip(random_groupoid(rng_for(seed)))


@given(seeds)
def test_actions_round_trip(seed):
    rng = rng_for(seed)
    round_trip(random_gset(rng, random_groupoid(rng), 5))


@given(seeds)
def test_correspondences_round_trip(seed):
    round_trip(small_correspondence(rng_for(seed), max_points=6))


@given(seeds)
def test_bundles_round_trip(seed):
    rng = rng_for(seed)
    round_trip(random_bundle(rng, random_groupoid(rng, 4), 2))


@given(seeds)
def test_equivariant_correspondences_round_trip(seed):
    rng = rng_for(seed)
    round_trip(random_coefficient_correspondence(rng, random_groupoid(rng, 4), 2))


def test_inverse_semigroups_and_suites_round_trip():
    round_trip(symmetric_inverse_monoid(2))
    round_trip(Suite(["cutoff", "identity"], seed=3, tolerance=1e-9, max_size=5))


def test_complex_entries_survive():
    from etalecorr.bundles import GCStarBundle
    from etalecorr.cstar import matrix_algebra
    G = FiniteGroupoid.point()
    A = matrix_algebra(2)
    B = GCStarBundle(G, {0: A}, (np.eye(4, dtype=complex),))
    text = dumps(B)
    assert '"re"' in text
    assert loads(text) == B


def test_format_version_is_checked():
    data = serialize.to_data(FiniteGroupoid.pair(2))
    data["format_version"] = 99
    with pytest.raises(InstanceError, match="format_version"):
        serialize.from_data(data)


def test_out_of_range_index_names_field_and_line():
    text = dumps(FiniteGroupoid.pair(2)).replace("[-1, -1, 2, 3]", "[-1, -1, 2, 9]")
    with pytest.raises(InstanceError) as info:
        loads(text)
    err = info.value
    assert err.field == "$.comp[3][3]"
    assert text.splitlines()[err.line - 1].strip().startswith("[-1, -1, 2, 9]")


def test_missing_field():
    with pytest.raises(InstanceError, match="missing field 'src'"):
        loads('{"format_version": 1, "kind": "groupoid", "units": [0]}')


def test_invalid_json_reports_line():
    with pytest.raises(InstanceError) as info:
        loads('{"format_version": 1,\n "kind": }')
    assert info.value.line == 2


def test_unknown_kind():
    with pytest.raises(InstanceError, match="unknown kind"):
        loads('{"format_version": 1, "kind": "monoid"}')


def test_bundled_pair_groupoid():
    G = load(INSTANCES / "pair2.groupoid")
    assert G == FiniteGroupoid.pair(2)


def test_bad_composition_gives_axiom_diagnostic():
    with pytest.raises(InstanceError) as info:
        load(INSTANCES / "bad_comp.groupoid")
    assert info.value.report is not None
    assert "axiom violated" in str(info.value)


def test_composite_file_is_composed():
    from etalecorr.correspondence import compose, find_bispace_isomorphism
    c = load(INSTANCES / "composite.correspondence")
    parts = [load(INSTANCES / p) for p in ("identity_z2.correspondence", "z2_to_point.correspondence")]
    assert find_bispace_isomorphism(c, compose(*parts)) is not None


@pytest.mark.parametrize("path", sorted(p.name for p in INSTANCES.iterdir() if p.name != "bad_comp.groupoid"))
def test_every_bundled_instance_loads(path):
    obj = load(INSTANCES / path)
    round_trip(obj)


def test_constructed_bundle_file(tmp_path):
    a = random_gset(rng_for(1), FiniteGroupoid.group([[0, 1], [1, 0]]), 3)
    serialize.dump(a, tmp_path / "x.action")
    (tmp_path / "f.bundle").write_text(json.dumps(
        {"format_version": 1, "kind": "bundle", "construct": "function", "action": "x.action"}))
    (tmp_path / "e.equivariant").write_text(json.dumps(
        {"format_version": 1, "kind": "equivariant_correspondence", "construct": "identity", "bundle": "f.bundle"}))
    assert load(tmp_path / "f.bundle") == function_bundle(a)
    assert load(tmp_path / "e.equivariant") == identity_correspondence_bundle(function_bundle(a))


def test_reference_of_wrong_kind(tmp_path):
    serialize.dump(FiniteGroupoid.pair(1), tmp_path / "g.groupoid")
    (tmp_path / "b.bundle").write_text(json.dumps(
        {"format_version": 1, "kind": "bundle", "construct": "function", "action": "g.groupoid"}))
    with pytest.raises(InstanceError, match="expected a action"):
        load(tmp_path / "b.bundle")
