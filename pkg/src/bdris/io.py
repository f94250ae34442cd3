"""CSV serialization of real and complex matrices.

Complex matrices are written row-major with one ``re_j, im_j`` column pair
per matrix column; real matrices use one ``c_j`` column per matrix column.
Values are written with ``repr`` so that a read-back is exact.
"""

import csv
import io

import numpy as np


def format_float(x):
    return repr(float(x))


def matrix_to_csv(m):
    m = np.asarray(m)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    n_cols = m.shape[1]
    if np.iscomplexobj(m):
        writer.writerow([f"{p}_{j}" for j in range(n_cols) for p in ("re", "im")])
        for row in m:
            writer.writerow([format_float(v) for z in row for v in (z.real, z.imag)])
    else:
        writer.writerow([f"c_{j}" for j in range(n_cols)])
        for row in m:
            writer.writerow([format_float(v) for v in row])
    return buf.getvalue()


def write_matrix(path, m):
    with open(path, "w", newline="") as fh:
        fh.write(matrix_to_csv(m))


def matrix_from_csv(text):
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError("empty matrix file")
    header = None
    try:
        float(rows[0][0])
    except ValueError:
        header, rows = rows[0], rows[1:]
    data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("matrix file has no numeric rows")
    complex_pairs = (
        header[0].strip().lower().startswith("re") if header else data.shape[1] == 2 * data.shape[0]
    )
    if complex_pairs:
        if data.shape[1] % 2:
            raise ValueError("complex matrix file needs an even number of columns")
        return data[:, 0::2] + 1j * data[:, 1::2]
    return data


def read_matrix(path):
    with open(path, newline="") as fh:
        return matrix_from_csv(fh.read())
