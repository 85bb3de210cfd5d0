import csv
import io
import json

import numpy as np
import pytest

from conftest import two_node
from stateabs import (AnytimeConfig, NetworkError, ParamStyle, abstract_iter, evaluate_exact,
                      gen_commuter, gen_traffic, TrafficConfig)
from stateabs.io import (NODE_COLUMNS, SUMMARY_COLUMNS, FormatError, parse_network, read_network,
                         read_summary, render_plot, trace_rows, write_network, write_trace)


def test_round_trip_byte_identical():
    for net in (two_node(), gen_commuter(5, ParamStyle.deterministic(), 3),
                gen_traffic(TrafficConfig(stages=1, states_per_node=6, seed=2))):
        text = write_network(net)
        back = read_network(text)
        assert back == net
        assert write_network(back) == text


def test_bounds_omitted_when_absent():
    text = write_network(two_node())
    assert "bounds" not in text
    assert '"bounds": [6, 8]' in write_network(gen_commuter(2, None, 0))


def test_two_node_document_evaluates():
    net = read_network(write_network(two_node()))
    np.testing.assert_allclose(evaluate_exact(net)["b"], [0.29, 0.71], atol=1e-12)


def _doc(**variable):
    base = {"name": "x", "states": ["s0", "s1"], "parents": [], "cpt": [[0.5, 0.5]]}
    base.update(variable)
    return json.dumps({"name": "t", "variables": [base]})


def test_single_state_rejected():
    with pytest.raises(NetworkError, match="m >= 2"):
        read_network(_doc(states=["only"], cpt=[[1.0]]))


def test_row_length_mismatch_names_variable():
    with pytest.raises(NetworkError, match="'x'.*dimension"):
        read_network(_doc(cpt=[[0.2, 0.3, 0.5]]))


def test_syntax_error_location():
    with pytest.raises(FormatError, match="line 2"):
        parse_network('{"name": "t",\n "variables": [}')


def test_schema_errors():
    with pytest.raises(FormatError):
        parse_network("[]")
    with pytest.raises(FormatError):
        parse_network(_doc(states="s0"))
    with pytest.raises(FormatError):
        parse_network(_doc(cpt=[["a", "b"]]))
    with pytest.raises(NetworkError):
        read_network(_doc(cpt=[[0.7, 0.7]]))


@pytest.fixture(scope="module")
def commuter_trace():
    net = gen_commuter(8, ParamStyle.uniform(), 1)
    ev = {"LH": 2}
    return abstract_iter(net, ev, AnytimeConfig(score_against=evaluate_exact(net, ev), fixed_clock=True))


def test_trace_shape(commuter_trace):
    summary, nodes = trace_rows(commuter_trace, "r1")
    assert len(summary) == 8 and len(nodes) == 8 * 11
    assert all(len(r) == len(SUMMARY_COLUMNS) for r in summary)
    assert [r[-1] for r in summary] == [""] * 7 + ["fully-refined"]
    assert float(summary[-1][7]) == pytest.approx(1.0, abs=1e-9)
    assert "LH" not in {r[2] for r in nodes}


def test_unscored_trace_has_empty_scores():
    trace = abstract_iter(two_node(), {"b": 0})
    summary, nodes = trace_rows(trace, "x")
    assert all(r[7] == "" for r in summary)
    assert all(r[4] == "" for r in nodes)


def test_write_and_append(tmp_path, commuter_trace):
    write_trace(commuter_trace, "a", tmp_path)
    write_trace(commuter_trace, "b", tmp_path, append=True)
    raw = (tmp_path / "summary.csv").read_bytes()
    assert b"\r" not in raw
    rows = read_summary(tmp_path / "summary.csv")
    assert len(rows) == 16 and {r["run_id"] for r in rows} == {"a", "b"}
    with open(tmp_path / "nodes.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header == NODE_COLUMNS


def test_plot(commuter_trace):
    summary, _ = trace_rows(commuter_trace, "solo")
    rows = list(csv.DictReader(io.StringIO(",".join(SUMMARY_COLUMNS) + "\n"
                                           + "\n".join(",".join(r) for r in summary))))
    svg = render_plot(rows)
    assert svg.count('class="series"') == 1
    points = svg.split('points="')[1].split('"')[0].split()
    assert len(points) == 8
    three = [dict(r, run_id=name) for name in ("test1", "test2", "test3") for r in rows]
    svg3 = render_plot(three)
    assert svg3.count('class="series"') == 3
    assert all(f'data-run="{n}"' in svg3 and f">{n}</text>" in svg3 for n in ("test1", "test2", "test3"))


def test_plot_rejects_empty_and_unscored():
    with pytest.raises(ValueError):
        render_plot([])
    with pytest.raises(ValueError):
        render_plot([{"run_id": "x", "iteration": "0", "elapsed_ms": "0", "avg_relscore": ""}])
