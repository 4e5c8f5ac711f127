import json
import os

import numpy as np
import pytest

from airig import (
    IterRecord,
    PolyhedralSet,
    atomic_write_text,
    build_instance,
    generate_data,
    load_dataset,
    load_instance,
    load_problem,
    polyhedron_from_dict,
    polyhedron_to_dict,
    read_trace,
    save_dataset,
    save_instance,
    save_problem,
    write_trace,
)
from helpers import random_small_problem


def test_atomic_write_creates_parents_and_leaves_no_temp(tmp_path):
    target = tmp_path / "a" / "b" / "out.txt"
    atomic_write_text(target, "hello\n")
    assert target.read_text() == "hello\n"
    assert [p.name for p in target.parent.iterdir()] == ["out.txt"]


def test_atomic_write_overwrites(tmp_path):
    target = tmp_path / "out.txt"
    atomic_write_text(target, "one")
    atomic_write_text(target, "two")
    assert target.read_text() == "two"


def test_problem_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    for i in range(5):
        prob = random_small_problem(rng)
        path = tmp_path / f"prob{i}.json"
        save_problem(prob, path)
        back = load_problem(path)
        assert back.n == prob.n and back.m == prob.m
        assert back.phi_mode == prob.phi_mode
        assert np.array_equal(back.J, prob.J)
        assert np.array_equal(back.box.lower, prob.box.lower)
        x = rng.normal(size=prob.n)
        assert back.phi_value(x) == pytest.approx(prob.phi_value(x), abs=1e-12)
        assert back.f_value(x) == pytest.approx(prob.f_value(x), abs=1e-12)
        gb = back.f_subgrad_total(x)
        ga = prob.f_subgrad_total(x)
        assert np.allclose(gb, ga, atol=1e-12)


def test_problem_without_specs_refuses_to_serialize(tmp_path):
    from airig import AgentBlock, BoxSet, ProblemSpec

    blk = AgentBlock(f=lambda x: (0.0, np.zeros(2)), h=lambda x: (-1.0, np.zeros(2)))
    prob = ProblemSpec(n=2, blocks=(blk,), box=BoxSet.cube(2, 1.0))
    with pytest.raises(ValueError, match="only data-built problems serialize"):
        save_problem(prob, tmp_path / "nope.json")


def test_polyhedron_round_trip():
    poly = PolyhedralSet(
        C=[[1.0, 0.0], [0.0, 1.0]], d=[1.0, 2.0], E=[[1.0, -1.0]], e=[0.5]
    )
    back = polyhedron_from_dict(polyhedron_to_dict(poly))
    assert np.array_equal(back.C, poly.C)
    assert np.array_equal(back.d, poly.d)
    assert np.array_equal(back.E, poly.E)
    assert np.array_equal(back.e, poly.e)
    ineq_only = PolyhedralSet(C=[[1.0, 1.0]], d=[3.0])
    data = polyhedron_to_dict(ineq_only)
    assert data["E"] is None and data["e"] is None
    back2 = polyhedron_from_dict(data)
    assert back2.n_eq == 0 and back2.n_ineq == 1


def test_instance_round_trip(tmp_path):
    ds = generate_data(8, 3, seed=4)
    inst = build_instance(ds, m=3, lam=2.5)
    path = tmp_path / "inst.json"
    save_instance(inst, path, meta={"note": "test"})
    back = load_instance(path)
    assert back.lam == 2.5
    assert back.n_features == 3 and back.n_samples == 8
    assert back.dataset is None
    x = np.random.default_rng(0).normal(size=inst.dim)
    assert back.problem.phi_value(x) == pytest.approx(
        inst.problem.phi_value(x), abs=1e-12)
    assert np.array_equal(back.poly.C, inst.poly.C)
    meta = json.loads(path.read_text())["meta"]
    assert meta["note"] == "test"


def test_dataset_round_trip_is_exact(tmp_path):
    ds = generate_data(12, 4, seed=9)
    path = tmp_path / "data.csv"
    save_dataset(ds, path)
    back = load_dataset(path)
    # 17 significant digits round-trip float64 exactly
    assert np.array_equal(back.features, ds.features)
    assert np.array_equal(back.labels, ds.labels)
    header = path.read_text().splitlines()[0]
    assert header == "label,f0,f1,f2,f3"


def test_dataset_header_validation(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,f0\n1,0.5\n")
    with pytest.raises(ValueError, match="label"):
        load_dataset(path)


def test_trace_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(3)
    records = [
        IterRecord(
            k=k,
            f_bar=rng.normal() * 10.0 ** float(rng.integers(-8, 8)),
            phi_bar=abs(rng.normal()),
            f_last=rng.normal(),
            phi_last=abs(rng.normal()) * 1e-13,
            gamma_k=1.0 / np.sqrt(1.0 + k),
            eta_k=(1.0 + k) ** -0.25,
            elapsed_s=0.01 * k,
        )
        for k in range(1, 40)
    ]
    path = tmp_path / "trace.csv"
    write_trace(records, path)
    back = read_trace(path)
    assert len(back) == len(records)
    for a, b in zip(records, back):
        assert a == b  # bitwise identical after the 17-digit round trip


def test_trace_header_validation(tmp_path):
    path = tmp_path / "bad_trace.csv"
    path.write_text("k,f_bar\n1,0.5\n")
    with pytest.raises(ValueError, match="unexpected trace header"):
        read_trace(path)


def test_trace_file_layout(tmp_path):
    rec = IterRecord(k=7, f_bar=1.5, phi_bar=0.0, f_last=2.0, phi_last=0.25,
                     gamma_k=0.5, eta_k=0.75, elapsed_s=0.125)
    path = tmp_path / "one.csv"
    write_trace([rec], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "k,f_bar,phi_bar,f_last,phi_last,gamma_k,eta_k,elapsed_s"
    assert lines[1] == "7,1.5,0,2,0.25,0.5,0.75,0.125"


def test_save_json_is_sorted_and_indented(tmp_path):
    from airig.io import save_json

    path = tmp_path / "obj.json"
    save_json({"b": 1, "a": [1, 2]}, path)
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")
