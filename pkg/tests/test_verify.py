import copy
import json
from fractions import Fraction

import pytest

from ugrowth.conjugators import proximal_normal_form
from ugrowth.linalg import Mat
from ugrowth.pingpong import certify_ping, certify_table_tennis
from ugrowth.scalars import Place
from ugrowth.sl2 import sl2_corpus, sl2_free_pair
from ugrowth.verify import verify_certificate

F = Fraction
R = Place.real()
ROT = [["3/5", "-4/5"], ["4/5", "3/5"]]
IDENT = [["1", "0"], ["0", "1"]]


@pytest.fixture(scope="module")
def ping():
    a = Mat.diag([100, F(1, 100)])
    cert = certify_ping(proximal_normal_form(a, R), Mat.from_record(ROT), F(1, 10), R)
    return json.loads(json.dumps(cert.to_record()))


@pytest.fixture(scope="module")
def tennis():
    cert = certify_table_tennis(Mat([[1, 2], [0, 1]]), Mat([[1, 0], [2, 1]]), R)
    return json.loads(json.dumps(cert.to_record()))


@pytest.fixture(scope="module")
def balls():
    x = Mat.diag([9, F(1, 9)])
    r = Mat.from_record(ROT)
    cert = certify_table_tennis(x, r * x * r.inverse(), R)
    return json.loads(json.dumps(cert.to_record()))


@pytest.fixture(scope="module")
def trace():
    return json.loads(json.dumps(sl2_free_pair(sl2_corpus()["sanov2"]).to_record()))


def tampered(rec, edit):
    r = copy.deepcopy(rec)
    edit(r)
    return verify_certificate(r)


def failing(rep):
    return {name for name, ok, _ in rep.checks if not ok}


def test_untouched_records_verify(ping, tennis, balls, trace):
    for rec in (ping, tennis, balls, trace):
        assert verify_certificate(rec).ok


PING_EDITS = {
    "b_identity": (lambda r: r["elements"].__setitem__("b", IDENT), "b_moves_e1"),
    "eps_too_big": (lambda r: r.__setitem__("eps", "1/2"), "eps_range"),
    "weaker_a": (lambda r: r["elements"].__setitem__("a", [["10", "0"], ["0", "1/10"]]), "pair"),
    "pair_entry": (lambda r: r["conclusion"]["pair"][1][0].__setitem__(0, "61"), "pair"),
    "claims_group": (lambda r: r["conclusion"].__setitem__("free", "group"), "conclusion_kind"),
    "wrong_place": (lambda r: r.__setitem__("place", "5"), "lipschitz"),
}


@pytest.mark.parametrize("name", sorted(PING_EDITS))
def test_tampered_ping_rejected(ping, name):
    edit, check = PING_EDITS[name]
    rep = tampered(ping, edit)
    assert not rep.ok and check in failing(rep)


def test_tampered_table_tennis_rejected(tennis, balls):
    rep = tampered(tennis, lambda r: r["elements"].__setitem__("y", [["1", "0"], ["1", "1"]]))
    assert not rep.ok
    rep = tampered(tennis, lambda r: r["domains"][0]["params"].__setitem__("R", "1/10"))
    assert not rep.ok
    rep = tampered(tennis, lambda r: r["domains"][1]["arcs"][0].__setitem__(1, ["1", "1"]))
    assert not rep.ok
    x = tennis["conclusion"]["pair"][0]
    rep = tampered(tennis, lambda r: r["conclusion"].__setitem__("pair", [x, x]))
    assert "pair" in failing(rep)
    rep = tampered(balls, lambda r: r.__setitem__("eps", "1/2"))
    assert not rep.ok
    rep = tampered(balls, lambda r: r["elements"].__setitem__("y", r["elements"]["x"]))
    assert "distinct" in failing(rep)


def test_tampered_trace_rejected(trace):
    rep = tampered(trace, lambda r: r["words"].__setitem__("x", "1.3"))
    assert "word:x" in failing(rep)
    rep = tampered(trace, lambda r: r["sigma"]["matrices"].__setitem__(1, [["1", "3"], ["0", "1"]]))
    assert not rep.ok


def test_garbage_reports_instead_of_raising():
    assert not verify_certificate({"kind": "bogus"}).ok
    assert not verify_certificate({"kind": "ping", "place": "real"}).ok
    rep = verify_certificate({"kind": "ping", "place": "real", "elements": {"a": IDENT, "b": ROT, "h": [["0", "0"], ["0", "0"]]}, "eps": "1/10"})
    assert not rep.ok
