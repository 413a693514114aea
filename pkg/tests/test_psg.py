import pytest

from hazardctl import psg as P
from hazardctl.psg import Edge, PsgError, parse_psg, serialize, validate

MINIMAL = """
(psg
  (vertex pc :kind program-counter :width 4)
  (vertex one :kind const :width 4 :value 1)
  (vertex nxt :kind logic :width 4 :op inc)
  (edge pc . q -> nxt . a :role data)
  (edge nxt . q -> pc . d :role data)
  (arch pc)
)
"""


def test_minimal_document():
    g = parse_psg(MINIMAL)
    assert g.pc == "pc"
    assert g.arch == frozenset({"pc"})
    assert validate(g) == []


def test_single_vertex_document():
    g = parse_psg(
        """(psg (vertex pc :kind program-counter :width 8)
                (vertex z :kind const :width 8 :value 0)
                (edge z . q -> pc . d :role data)
                (arch pc))"""
    )
    assert len(g.vertices) == 2
    assert g.vertices["pc"].width == 8


def test_missing_pc_rejected():
    with pytest.raises(PsgError, match="no program counter"):
        parse_psg("(psg (vertex a :kind const :width 1 :value 0))")


def test_duplicate_id_rejected():
    with pytest.raises(PsgError, match="duplicate id"):
        parse_psg(
            """(psg (vertex pc :kind program-counter :width 4)
                    (vertex pc :kind const :width 1 :value 0))"""
        )


def test_unknown_kind_rejected():
    with pytest.raises(PsgError, match="unknown kind"):
        parse_psg("(psg (vertex pc :kind banana :width 4))")


def test_unknown_op_rejected():
    with pytest.raises(PsgError, match="unknown logic op"):
        parse_psg("(psg (vertex f :kind logic :width 4 :op froz))")


def test_width_mismatch_rejected():
    with pytest.raises(PsgError, match="width"):
        parse_psg(
            """(psg (vertex pc :kind program-counter :width 4)
                    (vertex w :kind const :width 3 :value 0)
                    (edge w . q -> pc . d :role data)
                    (arch pc))"""
        )


def _valid_graph():
    return parse_psg(MINIMAL)


def test_control_edge_to_non_storage_diagnosed():
    g = _valid_graph()
    bad = g.replaced(edges=g.edges + [Edge(("one", "q"), ("nxt", "a"), "enable")])
    codes = {d.code for d in validate(bad)}
    assert "control-to-non-storage" in codes or "role-mismatch" in codes


def test_two_drivers_diagnosed_with_both_edges():
    g = _valid_graph()
    bad = g.replaced(edges=g.edges + [Edge(("one", "q"), ("pc", "d"), "data")])
    diags = [d for d in validate(bad) if d.code == "multiple-drivers"]
    assert len(diags) == 1
    assert set(diags[0].elements) >= {"nxt", "one"}


def test_pipe_register_requires_stall_and_clear():
    text = """(psg
      (vertex pc :kind program-counter :width 4)
      (vertex z4 :kind const :width 4 :value 0)
      (vertex r :kind pipe-register :width 4)
      (edge z4 . q -> pc . d :role data)
      (edge z4 . q -> r . d :role data)
      (arch pc))"""
    with pytest.raises(PsgError, match="missing-control"):
        parse_psg(text)


def test_mux_select_width_checked():
    text = """(psg
      (vertex pc :kind program-counter :width 4)
      (vertex z4 :kind const :width 4 :value 0)
      (vertex s2 :kind const :width 2 :value 0)
      (vertex m :kind mux :width 4)
      (edge z4 . q -> pc . d :role data)
      (edge s2 . q -> m . sel :role select)
      (edge z4 . q -> m . in0 :role data)
      (edge z4 . q -> m . in1 :role data)
      (arch pc))"""
    with pytest.raises(PsgError, match="select must be 1 bits"):
        parse_psg(text)


def test_roundtrip_serialize_parse():
    g = _valid_graph()
    again = parse_psg(serialize(g))
    assert again == g


def test_parse_op():
    assert P.parse_op("slice_3_0") == ("slice", (3, 0))
    assert P.parse_op("zext_8") == ("zext", (8,))
    assert P.parse_op("add") == ("add", ())
    with pytest.raises(PsgError):
        P.parse_op("slice_x_0")
