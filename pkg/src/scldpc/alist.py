"""Reading and writing parity-check matrices in alist text format.

Layout (MacKay's convention, column count first):

    N M
    max_col_degree max_row_degree
    <N column degrees>
    <M row degrees>
    N lines: 1-indexed row neighbors of each column, zero-padded
    M lines: 1-indexed column neighbors of each row, zero-padded
"""

from __future__ import annotations

from .model import SparseBinaryMatrix


def export_alist(h: SparseBinaryMatrix) -> str:
    if h.nrows < 1 or h.ncols < 1 or h.nnz == 0:
        raise ValueError("refusing to export an empty matrix")
    col_deg = [len(c) for c in h.col_rows]
    row_deg = [len(r) for r in h.row_cols]
    dmax_col = max(col_deg)
    dmax_row = max(row_deg)

    def padded(idx: tuple[int, ...], width: int) -> str:
        one_based = [v + 1 for v in idx] + [0] * (width - len(idx))
        return " ".join(str(v) for v in one_based)

    lines = [f"{h.ncols} {h.nrows}", f"{dmax_col} {dmax_row}"]
    lines.append(" ".join(str(d) for d in col_deg))
    lines.append(" ".join(str(d) for d in row_deg))
    lines.extend(padded(c, dmax_col) for c in h.col_rows)
    lines.extend(padded(r, dmax_row) for r in h.row_cols)
    return "\n".join(lines) + "\n"


def parse_alist(text: str) -> SparseBinaryMatrix:
    rows_of_ints = [[int(tok) for tok in line.split()]
                    for line in text.splitlines() if line.strip()]
    if len(rows_of_ints) < 4:
        raise ValueError("truncated alist: missing header")
    (ncols, nrows), (dmax_col, dmax_row) = rows_of_ints[0], rows_of_ints[1]
    col_deg, row_deg = rows_of_ints[2], rows_of_ints[3]
    if len(col_deg) != ncols or len(row_deg) != nrows:
        raise ValueError("alist degree list length mismatch")
    if len(rows_of_ints) < 4 + ncols + nrows:
        raise ValueError("truncated alist: missing neighbor lists")

    col_rows = []
    for j in range(ncols):
        entries = [v - 1 for v in rows_of_ints[4 + j] if v != 0]
        if len(entries) != col_deg[j]:
            raise ValueError(f"column {j}: degree does not match entries")
        if len(rows_of_ints[4 + j]) != dmax_col:
            raise ValueError(f"column {j}: line not padded to max degree")
        col_rows.append(sorted(entries))
    # Row lists are redundant given the column lists; parse and cross-check.
    row_lists = []
    for i in range(nrows):
        line = rows_of_ints[4 + ncols + i]
        entries = sorted(v - 1 for v in line if v != 0)
        if len(entries) != row_deg[i]:
            raise ValueError(f"row {i}: degree does not match entries")
        if len(line) != dmax_row:
            raise ValueError(f"row {i}: line not padded to max degree")
        row_lists.append(tuple(entries))
    h = SparseBinaryMatrix(nrows, ncols, col_rows)
    if list(h.row_cols) != row_lists:
        raise ValueError("alist row/column neighbor lists disagree")
    return h
