import functools
import json
import os

import pytest

from symmpt import (freeze_core, load_fcidump, load_grouping,
                    partition_hamiltonian)

FIXTURES = os.path.join(os.path.dirname(__file__), os.pardir, "fixtures")


def fixture_path(*parts):
    return os.path.abspath(os.path.join(FIXTURES, *parts))


@functools.lru_cache(maxsize=None)
def manifest(family):
    with open(fixture_path(family, "manifest.json")) as fh:
        return json.load(fh)


@functools.lru_cache(maxsize=None)
def integrals(family, tag, frozen=True):
    s = load_fcidump(fixture_path(family, "points", f"{tag}.fcidump"))
    if frozen:
        core = manifest(family)["frozen_core"]
        if core:
            s = freeze_core(s, core)
    return s


@functools.lru_cache(maxsize=None)
def grouping(family, name, tag=None):
    tag = tag or manifest(family)["points"][0]["tag"]
    s = integrals(family, tag)
    return load_grouping(fixture_path(family, "groupings", f"{name}.json"),
                         s.n_alpha, s.n_beta)


@functools.lru_cache(maxsize=None)
def partitioned(family, name, tag="r1.8"):
    s = integrals(family, tag)
    model, target = grouping(family, name, tag)
    return partition_hamiltonian(s, model), target


def ref_energy(family, tag):
    for p in manifest(family)["points"]:
        if p["tag"] == tag:
            return p["ref_energy"]
    raise KeyError(tag)


def scan_tags(family):
    return [p["tag"] for p in manifest(family)["points"]]


@pytest.fixture(scope="session")
def h2o_r18():
    return integrals("h2o_sto3g", "r1.8")


@pytest.fixture(scope="session")
def n2_r18():
    return integrals("n2_sto3g", "r1.8")


@pytest.fixture(scope="session")
def h2():
    return integrals("h2_sto3g", "r0.74")
