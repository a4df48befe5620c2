import pytest

from hochcat import fincat as fc
from hochcat import fixtures as fx
from hochcat import graded as gr


@pytest.fixture(scope="session")
def vposet():
    return fx.vposet_cat()


@pytest.fixture(scope="session")
def kv(vposet):
    return fx.free_graded(vposet, "kv")


@pytest.fixture(scope="session")
def kv_chain_legs(vposet, kv):
    cover = fc.chain_cover(vposet)
    return [gr.restrict(kv, incl)[1] for _, incl in cover.chains]


@pytest.fixture(scope="session")
def lam():
    return fx.dual_numbers()


@pytest.fixture(scope="session")
def t2():
    return fx.t2_graded()
