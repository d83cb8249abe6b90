import numpy as np
import pytest

from clausekit.tptp import (
    ArityError,
    TptpSyntaxError,
    UnknownRoleError,
    format_problem,
    parse_clause,
    parse_tptp_cnf,
    read_problem,
)

from _util import C, random_problem_text


def test_roles_split_axioms_and_conjecture():
    p = parse_tptp_cnf(
        """
        % a comment
        cnf(a1, axiom, p(a) | ~q(X, f(X))).
        /* block
           comment */
        cnf(h1, hypothesis, (r)).
        cnf(g, negated_conjecture, ~p(c)).
        """
    )
    assert [c.id for c in p.clauses] == [0, 1, 2]
    assert p.neg_conjecture == [C("~p(c)")]
    assert p.axioms[0] == C("p(a) | ~q(Y, f(Y))")
    assert p.axioms[1].origin.role == "hypothesis" and p.axioms[1].origin.name == "h1"
    assert p.symbols["q"] == (2, "pred") and p.symbols["f"] == (1, "func")


def test_false_is_the_empty_clause():
    p = parse_tptp_cnf("cnf(e, axiom, $false).")
    assert p.axioms[0].is_empty


def test_variables_are_clause_local():
    p = parse_tptp_cnf("cnf(a, axiom, p(X)). cnf(b, axiom, q(Y, X)).")
    assert p.axioms[0].literals == ((True, ("p", 0)),)
    assert p.axioms[1].literals == ((True, ("q", 0, 1)),)


def test_syntax_error_reports_position():
    with pytest.raises(TptpSyntaxError) as exc:
        parse_tptp_cnf("cnf(a, axiom, p(a)).\ncnf(b, axiom, p(a) | ).")
    assert exc.value.line == 2


def test_unexpected_character():
    with pytest.raises(TptpSyntaxError):
        parse_tptp_cnf("cnf(a, axiom, p(a) & q).")


def test_arity_clash():
    with pytest.raises(ArityError):
        parse_tptp_cnf("cnf(a, axiom, p(a)). cnf(b, axiom, p(a, b)).")
    with pytest.raises(ArityError):
        parse_tptp_cnf("cnf(a, axiom, p(f)). cnf(b, axiom, f).")


def test_unknown_role():
    with pytest.raises(UnknownRoleError):
        parse_tptp_cnf("cnf(a, conjecture, p).")


def test_errors_are_value_errors():
    with pytest.raises(ValueError):
        parse_tptp_cnf("fof(a, axiom, p).")


def test_parse_clause_rejects_trailing_input():
    with pytest.raises(TptpSyntaxError):
        parse_clause("p(a) q")


@pytest.mark.parametrize("seed", range(100))
def test_round_trip(seed):
    rng = np.random.default_rng(seed)
    p = parse_tptp_cnf(random_problem_text(rng, int(rng.integers(1, 6)), int(rng.integers(0, 3))))
    again = parse_tptp_cnf(format_problem(p))
    assert again.structurally_equal(p)
    assert [c.origin.name for c in again.clauses] == [c.origin.name for c in p.clauses]


def test_read_problem(tmp_path):
    path = tmp_path / "x.p"
    path.write_text("cnf(a, axiom, p).\ncnf(b, negated_conjecture, ~p).\n")
    p = read_problem(path)
    assert len(p.clauses) == 2 and p.name == str(path)
