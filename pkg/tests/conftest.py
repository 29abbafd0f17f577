import pytest
from hypothesis import settings

from parikh.grammar import parse_grammar

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")

G1_TEXT = "S -> a S b | \n"
G2_TEXT = "S -> A b\nA -> c A d | e\n"
DYCK_TEXT = "S -> S S | l S r | \n"
EPS_TEXT = "S -> \n"


@pytest.fixture
def g1():
    return parse_grammar(G1_TEXT)


@pytest.fixture
def g2():
    return parse_grammar(G2_TEXT)


@pytest.fixture
def dyck():
    return parse_grammar(DYCK_TEXT)


@pytest.fixture
def eps():
    return parse_grammar(EPS_TEXT)
