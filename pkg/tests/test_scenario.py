import copy
import json

import pytest
from hypothesis import given, settings, strategies as st

from chainsim import fixtures
from chainsim.scenario import (
    MissingReferenceError,
    ScenarioSyntaxError,
    ScenarioValidationError,
    bundle_from_dict,
    parse_scenario,
    serialize_scenario,
    validate_bundle,
)


def _text(doc):
    return json.dumps(doc)


def test_host_millicores_derived_from_cores():
    b = parse_scenario(_text(fixtures.reference_document()))
    host = b.host_types["ref_host"]
    assert host.cores == 4
    assert host.capacities["millicores"] == 4000
    assert host.capacities["in_bw"] == pytest.approx(1.25e8)
    assert host.capacities["blkio_bw"] == pytest.approx(6.57e8)


def test_table3_thread_row():
    b = parse_scenario(_text(fixtures.reference_document()))
    t = b.thread_models("S1", "f1")[0]
    assert t.instructions == 1_400_000_000
    assert t.cpi == 0.7432
    assert t.mem_accesses == 310_000_000
    assert t.cache_refs == 1_000_000 and t.cache_misses_ref == 100_000
    assert t.cache_miss_penalty == 4
    assert t.blkio_rw == 0 and t.idle_time == 0
    assert t.cmc_coeffs == (0.0, 0.0) and t.cmt_coeffs == (0.0, 0.0)


def test_optional_thread_fields():
    doc = fixtures.reference_document()
    doc["prototypes"]["microservices"]["S1"]["f1"] = [[1e6, 1.0, 10, 10, 1, 2, 0, "2ms", 0.1, 0.2, 0.3, 0.4]]
    t = parse_scenario(_text(doc)).thread_models("S1", "f1")[0]
    assert t.idle_time == 2_000_000
    assert t.cmc_coeffs == (0.1, 0.2) and t.cmt_coeffs == (0.3, 0.4)


@pytest.mark.parametrize("doc", [fixtures.reference_document(), fixtures.suite_document(), fixtures.large_chain_document()])
def test_reference_bundles_validate_clean(doc):
    assert validate_bundle(bundle_from_dict(doc)) == []


def test_empty_cluster_scenarios():
    doc = fixtures.reference_document()
    doc["cluster_scenarios"] = {}
    with pytest.raises(ScenarioValidationError, match="no cluster scenario"):
        parse_scenario(_text(doc))


def test_malformed_json():
    with pytest.raises(ScenarioSyntaxError):
        parse_scenario("{ not json")


def test_cache_misses_exceed_refs_is_one_error():
    doc = fixtures.reference_document()
    doc["prototypes"]["microservices"]["S1"]["f1"][0][4] = 2e6
    diags = validate_bundle(bundle_from_dict(doc))
    assert len(diags) == 1
    assert diags[0].severity == "error"
    assert diags[0].path == "prototypes.microservices.S1.f1[0]"


def test_contradictory_affinity_is_one_error():
    doc = fixtures.reference_document()
    doc["affinity_rulesets"] = {"rs": {"affinity": {"S1": ["S2"]}, "anti-affinity": {"S1": ["S2"]}}}
    diags = validate_bundle(bundle_from_dict(doc))
    assert len(diags) == 1 and "affine" in diags[0].message


def test_affinity_matrix_form():
    doc = fixtures.reference_document()
    doc["affinity_rulesets"] = {"rs": {"affinity": [[0, 1, 0], [0, 0, 0], [0, 0, 0]], "anti-affinity": {}}}
    rs = bundle_from_dict(doc).affinity_rulesets["rs"]
    assert rs.partners("S2") == {"S1"} and rs.partners("S1") == {"S2"}


def test_dangling_reference_names_path():
    doc = fixtures.reference_document()
    doc["cluster_scenarios"]["idle"]["service_chains"]["single"]["traffic_type"] = "nope"
    with pytest.raises(MissingReferenceError) as err:
        parse_scenario(_text(doc))
    assert "cluster_scenarios.idle.service_chains.single.traffic_type" in str(err.value)


def test_negative_capacity():
    doc = fixtures.reference_document()
    doc["prototypes"]["hosts"]["ref_host"][2]["mem"] = -1
    with pytest.raises(ScenarioValidationError):
        parse_scenario(_text(doc))


def test_wrong_millicores():
    doc = fixtures.reference_document()
    doc["prototypes"]["hosts"]["ref_host"][2]["millicores"] = 3000
    assert any("millicores" in d.message for d in validate_bundle(bundle_from_dict(doc)))


def test_limits_below_requests():
    doc = fixtures.reference_document()
    doc["res_alloc_scenarios"] = {"bad": {"cpu_requests": 500, "cpu_limits": 200}}
    assert len(validate_bundle(bundle_from_dict(doc))) == 1


def test_conflicting_settings_across_chains():
    doc = fixtures.suite_document()
    cs = doc["cluster_scenarios"]["s001"]
    cs["service_chains"]["C4"] = {"traffic_type": "r1", "nodes_settings": {"S1": {"replica_count": 3}}}
    msgs = [d.message for d in validate_bundle(bundle_from_dict(doc))]
    assert any("conflict" in m for m in msgs)


def test_cgroup_values():
    from chainsim.scenario import ResourceAllocScenario

    rs = ResourceAllocScenario({"cpu_requests": 2000.0}, cpu_limits=2000.0)
    assert rs.cpu_share == 2048
    assert rs.cpu_quota_us == 200_000 and rs.cpu_period_us == 100_000
    assert ResourceAllocScenario().cpu_share == 1024 and not ResourceAllocScenario().guaranteed


def test_round_trip_reference_bundles():
    for doc in (fixtures.suite_document(), fixtures.large_chain_document(seed=4)):
        b = parse_scenario(_text(doc))
        assert parse_scenario(serialize_scenario(b)) == b


def test_parse_is_pure():
    text = _text(fixtures.suite_document())
    assert parse_scenario(text) == parse_scenario(text)


_num = st.floats(min_value=0, max_value=1e10, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(
    threads=st.lists(st.tuples(st.integers(0, 10**10), st.floats(0.01, 5), _num, st.integers(1, 10**7),
                               st.floats(0, 1), _num, st.integers(0, 10**9)), min_size=1, max_size=3),
    rate=st.floats(0.01, 100), duration=st.floats(0.5, 1000), batch=st.integers(1, 5),
    cpu=st.one_of(st.none(), st.floats(1, 4000)),
)
def test_round_trip_property(threads, rate, duration, batch, cpu):
    doc = fixtures.reference_document()
    doc["prototypes"]["microservices"]["S1"]["f1"] = [
        [i, c, m, r, round(r * f), p, b] for i, c, m, r, f, p, b in threads
    ]
    doc["prototypes"]["traffics"]["once"] = [rate, duration, batch]
    if cpu is not None:
        doc["res_alloc_scenarios"] = {"g": {"cpu_requests": cpu, "cpu_limits": cpu}}
    b = parse_scenario(_text(doc))
    again = parse_scenario(serialize_scenario(b))
    assert again == b
    assert copy.deepcopy(b) == b
