import csv
import io
import json

import pytest

from rootbench.bench import (
    EXEMPT_METHODS,
    TABLE_NUMBERS,
    TABLE_ROW_ORDER,
    TABLE_SETUP,
    BenchRow,
    BenchSpec,
    BenchTable,
    diff_against_reference,
    load_reference,
    parse_cell,
    render_csv,
    render_diff_text,
    render_json,
    render_text,
    reproduce_table,
    run_bench,
)
from rootbench.driver import IterationTrace, RunStatus
from rootbench.exprlang import DifferentiableFn
from rootbench.mpreal import Precision, make


def table_of(cells_by_method, table_no=7) -> BenchTable:
    rows = [BenchRow(mid, {}, list(cells)) for mid, cells in cells_by_method.items()]
    return BenchTable(table_no, "synthetic", 2048, rows)


class TestFixture:
    def test_all_tables_load(self):
        for n in TABLE_NUMBERS:
            ref = load_reference(n)
            assert [r.method_id for r in ref.rows] == [m for m, _ in TABLE_ROW_ORDER]
            assert all(len(r.cells) == 3 for r in ref.rows)
            for row in ref.rows:
                for cell in row.cells:
                    parse_cell(cell)  # must not raise

    def test_known_quirky_cells_preserved(self):
        assert ".136e-3" in [c for r in load_reference(3).rows for c in r.cells]
        assert parse_cell(".136e-3") == ("136", -3)

    def test_dgt_cells_only_in_table3(self):
        dgt = {
            n: sum(c == "dgt" for r in load_reference(n).rows for c in r.cells)
            for n in TABLE_NUMBERS
        }
        assert dgt[3] == 3 and sum(dgt.values()) == 3

    def test_bad_table_number(self):
        with pytest.raises(ValueError):
            load_reference(9)
        with pytest.raises(ValueError):
            reproduce_table(1)


class TestParseCell:
    @pytest.mark.parametrize(
        "text,want",
        [
            ("0.336e-665", ("336", -665)),
            (".136e-3", ("136", -3)),
            ("0.271e+1", ("271", 1)),
            ("0", ("0", 0)),
            ("dgt", None),
        ],
    )
    def test_examples(self, text, want):
        assert parse_cell(text) == want

    def test_rejects_junk(self):
        with pytest.raises(ValueError):
            parse_cell("3.36e-5")


@pytest.fixture(scope="module")
def table7():
    return reproduce_table(7)


class TestReproduceTable:
    def test_shape(self, table7):
        assert [r.method_id for r in table7.rows] == [m for m, _ in TABLE_ROW_ORDER]
        assert all(len(r.cells) == 3 for r in table7.rows)
        assert table7.precision_digits == 2048

    def test_jc8_row_matches_reference(self, table7):
        diff = diff_against_reference(table7, load_reference(7))
        assert diff.rows_ok["jc8"], render_diff_text(diff)

    def test_non_exempt_rows_match(self, table7):
        diff = diff_against_reference(table7, load_reference(7))
        clean = {"jc8", "sharma1", "sharma2", "sharma3", "sargolzaei", "kim", "wang"}
        for mid in clean:
            assert diff.rows_ok[mid], (mid, render_diff_text(diff))

    def test_exempt_set_is_fixed(self):
        assert EXEMPT_METHODS == {
            "bi2", "bi3", "bi4", "thukral", "cordero", "soleymani1", "soleymani2"
        }


class TestDiff:
    def test_identical_tables_pass_with_zero_deltas(self):
        t = table_of({"jc8": ["0.695e-5", "0.654e-60", "0.336e-665"]})
        diff = diff_against_reference(t, t)
        assert diff.all_ok
        assert all(c.exponent_delta == 0 and not c.mantissa_rel for c in diff.cells)

    def test_exponent_drift_flagged(self):
        produced = table_of({"jc8": ["0.695e-5", "0.654e-60", "0.300e-660"]})
        reference = table_of({"jc8": ["0.695e-5", "0.654e-60", "0.336e-665"]})
        diff = diff_against_reference(produced, reference)
        assert not diff.all_ok
        flagged = diff.row("jc8")[2]
        assert flagged.exponent_delta == 5 and not flagged.ok

    def test_mantissa_checked_only_at_equal_exponent(self):
        produced = table_of({"jc8": ["0.500e-5", "0.654e-61", "0.336e-665"]})
        reference = table_of({"jc8": ["0.695e-5", "0.654e-60", "0.336e-665"]})
        diff = diff_against_reference(produced, reference)
        cells = diff.row("jc8")
        assert not cells[0].ok  # same exponent, mantissa off by 28%
        assert cells[1].ok  # exponent delta 1, mantissa not compared

    def test_both_divergent_rows_compatible(self):
        produced = table_of({"bi2": ["0.271e+1", "0.626e+3", "0.225e+5"]})
        reference = table_of({"bi2": ["dgt", "dgt", "dgt"]})
        assert diff_against_reference(produced, reference).all_ok
        assert diff_against_reference(reference, produced).all_ok

    def test_clean_reference_vs_dgt_fails(self):
        produced = table_of({"jc8": ["dgt", "dgt", "dgt"]})
        reference = table_of({"jc8": ["0.695e-5", "0.654e-60", "0.336e-665"]})
        assert not diff_against_reference(produced, reference).all_ok

    def test_shape_mismatch_rejected(self):
        a = table_of({"jc8": ["0", "0", "0"]})
        b = table_of({"wang": ["0", "0", "0"]})
        with pytest.raises(ValueError):
            diff_against_reference(a, b)


@pytest.fixture(scope="module")
def table():
    fn = DifferentiableFn.from_text("g", "cos(x) - x", known_root="0.739085133215160")
    spec = BenchSpec(
        functions=((fn, "1.5"),),
        methods=(("newton", {}), ("jc8", {})),
        iterations=3,
        precision=Precision(300),
    )
    return run_bench(spec)


class TestRendering:
    def test_text_contains_cells(self, table):
        text = render_text(table)
        for row in table.rows:
            for cell in row.cells:
                assert cell in text

    def test_csv_round_trips(self, table):
        rows = list(csv.reader(io.StringIO(render_csv(table))))
        assert rows[0] == ["table_no", "method_id", "iter_index", "cell_text"]
        cells = [r[3] for r in rows[1:]]
        assert cells == [c for row in table.rows for c in row.cells]

    def test_json_schema(self, table):
        doc = json.loads(render_json(table))
        assert set(doc) == {"caption", "precision_digits", "rows"}
        for row in doc["rows"]:
            assert set(row) == {"method_id", "params", "cells"}
            for cell in row["cells"]:
                assert cell == "dgt" or set(cell) == {"mantissa", "exponent"}

    def test_renderings_agree_on_cells(self, table):
        doc = json.loads(render_json(table))
        def rebuild(c):
            if c == "dgt":
                return "dgt"
            if c["mantissa"] == "0":
                return "0"
            return f"0.{c['mantissa']}e{c['exponent']:+d}"

        json_cells = [rebuild(c) for row in doc["rows"] for c in row["cells"]]
        csv_cells = [r[3] for r in csv.reader(io.StringIO(render_csv(table)))][1:]
        text = render_text(table)
        assert json_cells == csv_cells
        assert all(c in text for c in json_cells)

    def test_canonical_text_reproducible(self):
        fn = DifferentiableFn.from_text("g", "cos(x) - x")
        spec = BenchSpec(functions=((fn, "1.5"),), methods=(("newton", {}),),
                         iterations=2, precision=Precision(120))
        a, b = run_bench(spec), run_bench(spec)
        assert render_text(a, include_timestamp=False) == render_text(b, include_timestamp=False)


class TestDgtCells:
    def test_cells_after_divergence_marked(self):
        from rootbench.bench import _cells_from_trace

        p = Precision(120)
        trace = IterationTrace(
            method_id="newton",
            iterates=[make("1", p), make("100", p), make("1e11", p)],
            residuals=[make("1", p), make("1e4", p), make("1e22", p)],
            errors=None,
            status=RunStatus.DIVERGED,
            total_fn_evals=2,
            total_deriv_evals=2,
            precision=p,
            diverged_at=2,
        )
        assert _cells_from_trace(trace, 3) == ["0.100e+5", "dgt", "dgt"]

    def test_short_trace_padded_with_dgt(self):
        from rootbench.bench import _cells_from_trace

        p = Precision(120)
        trace = IterationTrace(
            method_id="newton",
            iterates=[make("1", p), make("2", p)],
            residuals=[make("1", p), make("0.5", p)],
            errors=None,
            status=RunStatus.DEGENERATE_STEP,
            total_fn_evals=1,
            total_deriv_evals=1,
            precision=p,
        )
        assert _cells_from_trace(trace, 3) == ["0.500e+0", "dgt", "dgt"]
