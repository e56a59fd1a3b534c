from qsuperopt.circuit import parse_circuit
from qsuperopt.eccset import Ecc, EccSet
from qsuperopt.gatedef import builtin_gate_set
from qsuperopt.pruning import (
    dedup_sequences,
    prune,
    prune_common_subcircuit,
    share_boundary_gate,
    simplify_eccs,
)

from conftest import generated, pruned


def _ecc(nam, q, m, *texts):
    return Ecc([parse_circuit(t, q, m, nam) for t in texts])


def test_nam_n2_counts():
    es = generated("nam", 2, 3)
    assert es.num_circuits() == 400
    s = simplify_eccs(es)
    assert s.num_circuits() == 50
    p = pruned("nam", 2, 3)
    assert p.num_circuits() == 50 and p.counts()["transformations"] == 62


def test_simplify_compacts_unused_qubits_and_params(nam):
    es = EccSet(nam, [_ecc(nam, 3, 2, "rz p1 2; rz p1 2", "rz 2*p1 2"), _ecc(nam, 3, 2, "rz p0 0; rz p0 0", "rz 2*p0 0")])
    s = simplify_eccs(es)
    assert len(s) == 1
    assert (s.eccs[0].q, s.eccs[0].m) == (1, 1)
    assert s.eccs[0].circuits[0].text() == "rz p0 0; rz p0 0"


def test_param_permutation_merge(nam):
    es = EccSet(nam, [_ecc(nam, 1, 2, "rz p0 0; rz p1 0", "rz p0+p1 0"), _ecc(nam, 1, 2, "rz p1 0; rz p0 0", "rz p0+p1 0")])
    assert len(simplify_eccs(es)) == 2
    assert len(simplify_eccs(es, param_permutations=True)) == 1


def test_dedup_sequences_collapses_reorderings(nam):
    e = _ecc(nam, 2, 0, "h 0; h 1", "h 1; h 0")
    assert len(dedup_sequences(e)) == 1


def test_boundary_gate_modes(nam):
    a = parse_circuit("h 0; x 1; cx 0 1", 2, 0, nam)
    b = parse_circuit("x 1; h 0; cx 0 1", 2, 0, nam)
    assert not share_boundary_gate(parse_circuit("h 0; x 1", 2, 0, nam), parse_circuit("x 1; cx 0 1", 2, 0, nam))
    assert share_boundary_gate(a, b, "dag")
    assert share_boundary_gate(a, b, "sequence")  # same last gate


def test_common_subcircuit_drops_members(nam):
    es = EccSet(nam, [_ecc(nam, 1, 0, "", "h 0; h 0", "x 0; x 0"), _ecc(nam, 2, 0, "cx 0 1; h 0; h 0", "h 0; h 0; cx 0 1", "cx 0 1")])
    out = prune_common_subcircuit(es)
    assert [len(e) for e in out.eccs] == [3, 2]


def test_rigetti_degeneracy():
    a, b = pruned("rigetti", 2, 3), pruned("rigetti", 3, 3)
    assert a.counts()["transformations"] == 66
    assert [e.key() for e in a.eccs] == [e.key() for e in b.eccs]


def test_prune_is_idempotent():
    p = pruned("nam", 2, 3)
    assert [e.key() for e in prune(p).eccs] == [e.key() for e in p.eccs]
