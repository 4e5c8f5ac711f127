"""File formats: problem/instance JSON, dataset CSV, trace CSV.

All writes are atomic (temp file in the target directory, then rename) so a
crashed run never leaves a half-written artifact. All indices are 0-based;
matrices are nested lists in row-major order. Trace CSVs carry 17 significant
digits, enough to round-trip float64.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .oracles import build_oracle
from .problem import AgentBlock, BoxSet, ProblemSpec
from .qp import PolyhedralSet
from .solver import IterRecord
from .svm import SvmDataset, SvmInstance

__all__ = [
    "atomic_write_text",
    "save_json",
    "load_json",
    "problem_to_dict",
    "problem_from_dict",
    "save_problem",
    "load_problem",
    "polyhedron_to_dict",
    "polyhedron_from_dict",
    "save_instance",
    "load_instance",
    "save_dataset",
    "load_dataset",
    "write_trace",
    "read_trace",
    "TRACE_HEADER",
]

TRACE_HEADER = ["k", "f_bar", "phi_bar", "f_last", "phi_last", "gamma_k", "eta_k", "elapsed_s"]


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_json(obj, path: str | Path) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load_json(path: str | Path):
    with open(path) as fh:
        return json.load(fh)


# problem JSON


def problem_to_dict(problem: ProblemSpec) -> dict:
    blocks = []
    for i, blk in enumerate(problem.blocks):
        if blk.f_spec is None or blk.h_spec is None:
            raise ValueError(
                f"block {i} carries no oracle specs; only data-built problems serialize"
            )
        blocks.append(
            {
                "A": None if blk.A is None else blk.A.tolist(),
                "b": None if blk.b is None else blk.b.tolist(),
                "f": blk.f_spec,
                "h": blk.h_spec,
            }
        )
    return {
        "n": problem.n,
        "phi_mode": problem.phi_mode,
        "J": problem.J.tolist(),
        "box": {"lower": problem.box.lower.tolist(), "upper": problem.box.upper.tolist()},
        "blocks": blocks,
    }


def problem_from_dict(data: dict) -> ProblemSpec:
    blocks = []
    for blk in data["blocks"]:
        blocks.append(
            AgentBlock(
                f=build_oracle(blk["f"]),
                h=build_oracle(blk["h"]),
                A=None if blk.get("A") is None else np.asarray(blk["A"], dtype=float),
                b=None if blk.get("b") is None else np.asarray(blk["b"], dtype=float),
                f_spec=blk["f"],
                h_spec=blk["h"],
            )
        )
    return ProblemSpec(
        n=int(data["n"]),
        blocks=tuple(blocks),
        box=BoxSet(np.asarray(data["box"]["lower"]), np.asarray(data["box"]["upper"])),
        J=np.asarray(data.get("J", []), dtype=np.intp),
        phi_mode=data.get("phi_mode", "hinge"),
    )


def save_problem(problem: ProblemSpec, path: str | Path) -> None:
    save_json(problem_to_dict(problem), path)


def load_problem(path: str | Path) -> ProblemSpec:
    return problem_from_dict(load_json(path))


# polyhedron JSON


def polyhedron_to_dict(poly: PolyhedralSet) -> dict:
    return {
        "C": poly.C.tolist() if poly.n_ineq else None,
        "d": poly.d.tolist() if poly.n_ineq else None,
        "E": poly.E.tolist() if poly.n_eq else None,
        "e": poly.e.tolist() if poly.n_eq else None,
        "dim": poly.dim,
    }


def polyhedron_from_dict(data: dict) -> PolyhedralSet:
    return PolyhedralSet(
        C=data.get("C"), d=data.get("d"),
        E=data.get("E"), e=data.get("e"),
        dim=int(data["dim"]),
    )


# SVM instance JSON (problem + polyhedron + metadata)


def save_instance(instance: SvmInstance, path: str | Path, meta: dict | None = None) -> None:
    payload = {
        "problem": problem_to_dict(instance.problem),
        "polyhedron": polyhedron_to_dict(instance.poly),
        "meta": {
            "lam": instance.lam,
            "n_features": instance.n_features,
            "n_samples": instance.n_samples,
            **(meta or {}),
        },
    }
    save_json(payload, path)


def load_instance(path: str | Path) -> SvmInstance:
    data = load_json(path)
    meta = data["meta"]
    return SvmInstance(
        problem=problem_from_dict(data["problem"]),
        poly=polyhedron_from_dict(data["polyhedron"]),
        lam=float(meta["lam"]),
        n_features=int(meta["n_features"]),
        n_samples=int(meta["n_samples"]),
        dataset=None,
    )


# dataset CSV


def save_dataset(dataset: SvmDataset, path: str | Path) -> None:
    lines = ["label," + ",".join(f"f{j}" for j in range(dataset.n_features))]
    for v, row in zip(dataset.labels, dataset.features):
        lines.append(f"{int(v)}," + ",".join(f"{x:.17g}" for x in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_dataset(path: str | Path) -> SvmDataset:
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "label":
            raise ValueError(f"{path}: expected a 'label' first column")
        labels, rows = [], []
        for rec in reader:
            if not rec:
                continue
            labels.append(float(rec[0]))
            rows.append([float(x) for x in rec[1:]])
    return SvmDataset(features=np.array(rows), labels=np.array(labels))


# trace CSV


def write_trace(records: list[IterRecord], path: str | Path) -> None:
    lines = [",".join(TRACE_HEADER)]
    for rec in records:
        lines.append(
            f"{rec.k},{rec.f_bar:.17g},{rec.phi_bar:.17g},{rec.f_last:.17g},"
            f"{rec.phi_last:.17g},{rec.gamma_k:.17g},{rec.eta_k:.17g},{rec.elapsed_s:.17g}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_trace(path: str | Path) -> list[IterRecord]:
    out = []
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRACE_HEADER:
            raise ValueError(f"{path}: unexpected trace header {header}")
        for rec in reader:
            if not rec:
                continue
            out.append(
                IterRecord(
                    k=int(rec[0]),
                    f_bar=float(rec[1]),
                    phi_bar=float(rec[2]),
                    f_last=float(rec[3]),
                    phi_last=float(rec[4]),
                    gamma_k=float(rec[5]),
                    eta_k=float(rec[6]),
                    elapsed_s=float(rec[7]),
                )
            )
    return out
