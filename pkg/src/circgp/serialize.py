"""Text file formats: datasets, traces, predictions, sample matrices, and
score reports.

All writers are deterministic (floats via repr, no timestamps), so a rerun
with the same seed produces byte-identical files.  Readers validate schema
versions and report 1-based line numbers on failure.
"""

import os
import tempfile

import numpy as np

from .baselines import CoupledState, OrdinaryState
from .exceptions import DataFormatError
from .hier import HierSample, HierTrace
from .metrics import ScoreReport
from .model import Dataset, ModelState, PredictionResult, Trace
from .partition import WrapPartition, wrap_counts

TRACE_MAGIC = "#circgp-trace v1"
HIER_MAGIC = "#circgp-hier-trace v1"
SCORES_MAGIC = "#circgp-scores v1"

_STATE_COLUMNS = {
    "wgp": "kmin alpha beta tau2 theta sigma2 nu | w | z",
    "coupled": "alpha beta tau2 theta | k",
    "ordinary": "alpha beta tau2 theta eta",
}


def _fmt(value):
    return repr(float(value))


def _fmt_row(values):
    return " ".join(_fmt(v) for v in values)


# ---------------------------------------------------------------------------
# datasets


def save_dataset(path, data):
    with open(path, "w") as fh:
        fh.write("x,y\n")
        for xi, yi in zip(data.x, data.y):
            fh.write(f"{_fmt(xi)},{_fmt(yi)}\n")


def save_truth(path, x, z, k):
    with open(path, "w") as fh:
        fh.write("x,z,k\n")
        for xi, zi, ki in zip(x, z, k):
            fh.write(f"{_fmt(xi)},{_fmt(zi)},{int(ki)}\n")


def save_grouped(path, datasets, distances):
    with open(path, "w") as fh:
        fh.write("test_id,distance,frequency,phase\n")
        for i, (data, d) in enumerate(zip(datasets, distances)):
            for xi, yi in zip(data.x, data.y):
                fh.write(f"{i},{_fmt(d)},{_fmt(xi)},{_fmt(yi)}\n")


def _read_lines(path):
    try:
        with open(path) as fh:
            return fh.read().splitlines()
    except OSError as err:
        raise DataFormatError(str(err), path=path) from err


def _split_header(line, expected, path):
    cols = [c.strip() for c in line.split(",")]
    if cols != expected:
        for want in expected:
            if want not in cols:
                raise DataFormatError(
                    f"missing column '{want}' (header was {cols})", path=path, lineno=1
                )
        raise DataFormatError(
            f"expected columns {expected}, got {cols}", path=path, lineno=1
        )


def _parse_float(tok, path, lineno, column):
    try:
        return float(tok)
    except ValueError as err:
        raise DataFormatError(
            f"column '{column}': not a number: {tok!r}", path=path, lineno=lineno
        ) from err


def load_dataset(path, degrees=False, negate=False):
    """Read an x,y dataset file; optionally convert degrees to radians and
    reverse the response orientation."""
    lines = _read_lines(path)
    if not lines:
        raise DataFormatError("empty file", path=path, lineno=1)
    _split_header(lines[0], ["x", "y"], path)
    xs, ys = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        toks = line.split(",")
        if len(toks) != 2:
            raise DataFormatError(f"expected 2 fields, got {len(toks)}", path=path, lineno=lineno)
        xs.append(_parse_float(toks[0], path, lineno, "x"))
        ys.append(_parse_float(toks[1], path, lineno, "y"))
    if not xs:
        raise DataFormatError("no data rows", path=path, lineno=len(lines))
    y = np.asarray(ys)
    if degrees:
        y = np.deg2rad(y)
    y = np.mod(y, 2.0 * np.pi)
    y[y >= 2.0 * np.pi] = 0.0
    if negate:
        y = np.mod(-y, 2.0 * np.pi)
        y[y >= 2.0 * np.pi] = 0.0
    try:
        return Dataset(np.asarray(xs), y)
    except ValueError as err:
        raise DataFormatError(str(err), path=path) from err


def load_grouped(path, degrees=False, negate=False):
    """Read a test_id,distance,frequency,phase file into per-test datasets.

    Frequencies share one global scale across tests so fitted slopes are
    comparable.  Returns (datasets, distances) ordered by test id.
    """
    lines = _read_lines(path)
    if not lines:
        raise DataFormatError("empty file", path=path, lineno=1)
    _split_header(lines[0], ["test_id", "distance", "frequency", "phase"], path)
    rows = {}
    dists = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        toks = line.split(",")
        if len(toks) != 4:
            raise DataFormatError(f"expected 4 fields, got {len(toks)}", path=path, lineno=lineno)
        try:
            tid = int(toks[0])
        except ValueError as err:
            raise DataFormatError(
                f"column 'test_id': not an integer: {toks[0]!r}", path=path, lineno=lineno
            ) from err
        d = _parse_float(toks[1], path, lineno, "distance")
        f = _parse_float(toks[2], path, lineno, "frequency")
        p = _parse_float(toks[3], path, lineno, "phase")
        rows.setdefault(tid, []).append((f, p))
        if tid in dists and dists[tid] != d:
            raise DataFormatError(
                f"test {tid} has conflicting distances", path=path, lineno=lineno
            )
        dists[tid] = d
    ids = sorted(rows)
    all_f = np.concatenate([[f for f, _ in rows[t]] for t in ids])
    f_lo, f_hi = float(all_f.min()), float(all_f.max())
    datasets = []
    for t in ids:
        f = np.array([fp[0] for fp in rows[t]])
        p = np.array([fp[1] for fp in rows[t]])
        if degrees:
            p = np.deg2rad(p)
        p = np.mod(p, 2.0 * np.pi)
        p[p >= 2.0 * np.pi] = 0.0
        if negate:
            p = np.mod(-p, 2.0 * np.pi)
            p[p >= 2.0 * np.pi] = 0.0
        try:
            datasets.append(Dataset(f, p, x_lo=f_lo, x_hi=f_hi))
        except ValueError as err:
            raise DataFormatError(f"test {t}: {err}", path=path) from err
    return datasets, np.array([dists[t] for t in ids])


# ---------------------------------------------------------------------------
# traces


def _trace_header(trace):
    lines = [
        TRACE_MAGIC,
        f"#method {trace.method}",
        f"#seed {trace.seed if trace.seed is not None else 'none'}",
        f"#n {trace.n}",
        f"#x_lo {_fmt(trace.x_lo)}",
        f"#x_hi {_fmt(trace.x_hi)}",
        f"#iters {trace.iters}",
        f"#burnin {trace.burnin}",
        f"#thin {trace.thin}",
        f"#negate {int(trace.negate)}",
        "#accept " + " ".join(f"{k}={_fmt(v)}" for k, v in sorted(trace.accept.items())),
        f"#columns {_STATE_COLUMNS[trace.method]}",
    ]
    return lines


def _state_line(method, s):
    if method == "wgp":
        head = [s.part.k_min, s.alpha, s.beta, s.tau2, s.theta, s.sigma2, s.nu]
        return (
            f"{int(s.part.k_min)} " + _fmt_row(head[1:])
            + " | " + _fmt_row(s.part.w)
            + " | " + _fmt_row(s.z)
        )
    if method == "coupled":
        return (
            _fmt_row([s.alpha, s.beta, s.tau2, s.theta])
            + " | " + " ".join(str(int(k)) for k in s.k)
        )
    return _fmt_row([s.alpha, s.beta, s.tau2, s.theta, s.eta])


def save_trace(path, trace):
    if trace.method not in _STATE_COLUMNS:
        raise ValueError(f"unknown trace method {trace.method!r}")
    with open(path, "w") as fh:
        for line in _trace_header(trace):
            fh.write(line + "\n")
        for s in trace.samples:
            fh.write(_state_line(trace.method, s) + "\n")


def _parse_header_block(lines, path, start=0):
    meta = {}
    i = start
    while i < len(lines) and lines[i].startswith("#"):
        line = lines[i]
        if line.startswith("#accept"):
            meta["accept"] = {}
            for tok in line.split()[1:]:
                k, _, v = tok.partition("=")
                meta["accept"][k] = float(v)
        elif line.startswith("#columns"):
            meta["columns"] = line[len("#columns ") :]
        elif not line.startswith(("#circgp", "#test")):
            key, _, val = line[1:].partition(" ")
            meta[key] = val
        i += 1
        if i < len(lines) and lines[i].startswith("#test"):
            break
    return meta, i


def load_trace(path, for_data=None):
    """Read a trace file.  ``for_data`` (the training Dataset) is required to
    reconstruct the induced wrap counts of a wgp trace."""
    lines = _read_lines(path)
    if not lines or lines[0] != TRACE_MAGIC:
        raise DataFormatError(
            f"not a trace file (expected {TRACE_MAGIC!r})", path=path, lineno=1
        )
    meta, body_start = _parse_header_block(lines, path)
    method = meta.get("method")
    if method not in _STATE_COLUMNS:
        raise DataFormatError(f"unknown method {method!r}", path=path, lineno=2)
    if meta.get("columns") != _STATE_COLUMNS[method]:
        raise DataFormatError(
            f"column schema mismatch for method {method}", path=path, lineno=body_start
        )
    x_lo, x_hi = float(meta["x_lo"]), float(meta["x_hi"])
    seed = None if meta.get("seed") == "none" else int(meta["seed"])
    samples = []
    for lineno0 in range(body_start, len(lines)):
        line = lines[lineno0]
        if not line.strip():
            continue
        lineno = lineno0 + 1
        if method == "wgp":
            parts = line.split(" | ")
            if len(parts) != 3:
                raise DataFormatError(
                    "expected 3 sections 'fields | w | z'", path=path, lineno=lineno
                )
            head = parts[0].split()
            if len(head) != 7:
                raise DataFormatError(
                    f"expected 7 scalar fields, got {len(head)}", path=path, lineno=lineno
                )
            try:
                kmin = int(head[0])
                alpha, beta, tau2, theta, sigma2, nu = (float(t) for t in head[1:])
                w = (
                    np.array([float(t) for t in parts[1].split()])
                    if parts[1].strip()
                    else np.empty(0)
                )
                z = np.array([float(t) for t in parts[2].split()])
            except ValueError as err:
                raise DataFormatError(f"bad number: {err}", path=path, lineno=lineno) from err
            if for_data is None:
                raise ValueError("for_data is required to load a wgp trace")
            scaled = for_data.scaled_x
            part = WrapPartition(w, kmin, float(scaled[0]), float(scaled[-1]))
            samples.append(
                ModelState(part, wrap_counts(scaled, part), z, alpha, beta, tau2, theta, sigma2, nu)
            )
        elif method == "coupled":
            parts = line.split(" | ")
            if len(parts) != 2:
                raise DataFormatError(
                    "expected 2 sections 'fields | k'", path=path, lineno=lineno
                )
            try:
                alpha, beta, tau2, theta = (float(t) for t in parts[0].split())
                k = np.array([int(t) for t in parts[1].split()], dtype=np.int64)
            except ValueError as err:
                raise DataFormatError(f"bad number: {err}", path=path, lineno=lineno) from err
            samples.append(CoupledState(k, alpha, beta, tau2, theta))
        else:
            try:
                alpha, beta, tau2, theta, eta = (float(t) for t in line.split())
            except ValueError as err:
                raise DataFormatError(f"bad number: {err}", path=path, lineno=lineno) from err
            samples.append(OrdinaryState(alpha, beta, tau2, theta, eta))
    return Trace(
        method=method,
        samples=samples,
        n=int(meta["n"]),
        x_lo=x_lo,
        x_hi=x_hi,
        iters=int(meta["iters"]),
        burnin=int(meta["burnin"]),
        thin=int(meta["thin"]),
        seed=seed,
        accept=meta.get("accept", {}),
        negate=bool(int(meta.get("negate", "0"))),
    )


def save_hier_trace(path, htrace):
    with open(path, "w") as fh:
        fh.write(HIER_MAGIC + "\n")
        fh.write(f"#seed {htrace.seed if htrace.seed is not None else 'none'}\n")
        fh.write(f"#m {len(htrace.tests)}\n")
        fh.write(f"#iters {htrace.iters}\n")
        fh.write(f"#burnin {htrace.burnin}\n")
        fh.write(f"#thin {htrace.thin}\n")
        fh.write(f"#sigma_beta_sq {_fmt(htrace.sigma_beta_sq)}\n")
        fh.write("#distances " + _fmt_row(htrace.distances) + "\n")
        fh.write(f"#d_lo {_fmt(htrace.d_lo)}\n")
        fh.write(f"#d_hi {_fmt(htrace.d_hi)}\n")
        fh.write("#hier-columns tau2_delta theta_delta | delta\n")
        for s in htrace.hier_samples:
            fh.write(
                _fmt_row([s.tau2_delta, s.theta_delta]) + " | " + _fmt_row(s.delta) + "\n"
            )
        for i, trace in enumerate(htrace.tests):
            fh.write(f"#test {i}\n")
            for line in _trace_header(trace):
                fh.write(line + "\n")
            for s in trace.samples:
                fh.write(_state_line(trace.method, s) + "\n")


def load_hier_trace(path, datasets):
    """Read a hierarchical trace; ``datasets`` (per test, in id order) are
    required to reconstruct induced wrap counts."""
    lines = _read_lines(path)
    if not lines or lines[0] != HIER_MAGIC:
        raise DataFormatError(
            f"not a hierarchical trace file (expected {HIER_MAGIC!r})", path=path, lineno=1
        )
    # split into the hier block and per-test blocks
    starts = [i for i, line in enumerate(lines) if line.startswith("#test ")]
    m_meta, body_start = _parse_header_block(lines, path)
    m = int(m_meta["m"])
    if len(starts) != m:
        raise DataFormatError(
            f"expected {m} test sections, found {len(starts)}", path=path, lineno=len(lines)
        )
    if len(datasets) != m:
        raise ValueError(f"expected {m} datasets, got {len(datasets)}")
    hier_samples = []
    for lineno0 in range(body_start, starts[0]):
        line = lines[lineno0]
        if not line.strip():
            continue
        parts = line.split(" | ")
        if len(parts) != 2:
            raise DataFormatError(
                "expected 2 sections 'fields | delta'", path=path, lineno=lineno0 + 1
            )
        try:
            tau2_delta, theta_delta = (float(t) for t in parts[0].split())
            delta = np.array([float(t) for t in parts[1].split()])
        except ValueError as err:
            raise DataFormatError(f"bad number: {err}", path=path, lineno=lineno0 + 1) from err
        hier_samples.append(HierSample(delta, tau2_delta, theta_delta))

    tests = []
    bounds = starts + [len(lines)]
    for ti in range(m):
        block = lines[bounds[ti] + 1 : bounds[ti + 1]]
        with tempfile.NamedTemporaryFile(
            "w", suffix=".trace", delete=False
        ) as tmp:
            tmp.write("\n".join(block) + "\n")
            tmp_path = tmp.name
        try:
            tests.append(load_trace(tmp_path, for_data=datasets[ti]))
        finally:
            os.unlink(tmp_path)
    distances = np.array([float(t) for t in m_meta["distances"].split()])
    seed = None if m_meta.get("seed") == "none" else int(m_meta["seed"])
    return HierTrace(
        tests=tests,
        hier_samples=hier_samples,
        distances=distances,
        d_lo=float(m_meta["d_lo"]),
        d_hi=float(m_meta["d_hi"]),
        sigma_beta_sq=float(m_meta["sigma_beta_sq"]),
        iters=int(m_meta["iters"]),
        burnin=int(m_meta["burnin"]),
        thin=int(m_meta["thin"]),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# predictions and scores

PRED_COLUMNS = ["x", "mean_wrapped", "mean_unwrapped", "var", "lo95", "hi95", "k_mean", "k_var"]


def save_predictions(path, result):
    with open(path, "w") as fh:
        fh.write(",".join(PRED_COLUMNS) + "\n")
        for i in range(result.x.size):
            row = [
                result.x[i],
                result.mean_wrapped[i],
                result.mean_unwrapped[i],
                result.variance[i],
                result.lo95[i],
                result.hi95[i],
                result.k_mean[i],
                result.k_var[i],
            ]
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def load_predictions(path):
    lines = _read_lines(path)
    if not lines:
        raise DataFormatError("empty file", path=path, lineno=1)
    _split_header(lines[0], PRED_COLUMNS, path)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        toks = line.split(",")
        if len(toks) != len(PRED_COLUMNS):
            raise DataFormatError(
                f"expected {len(PRED_COLUMNS)} fields, got {len(toks)}", path=path, lineno=lineno
            )
        rows.append([_parse_float(t, path, lineno, c) for t, c in zip(toks, PRED_COLUMNS)])
    arr = np.asarray(rows)
    return PredictionResult(
        x=arr[:, 0],
        mean_wrapped=arr[:, 1],
        mean_unwrapped=arr[:, 2],
        variance=arr[:, 3],
        lo95=arr[:, 4],
        hi95=arr[:, 5],
        k_mean=arr[:, 6],
        k_var=arr[:, 7],
        y_samples=None,
    )


def save_samples(path, x, samples):
    """Write the per-point predictive sample matrix (one row per test input)."""
    samples = np.asarray(samples)
    with open(path, "w") as fh:
        fh.write("x," + ",".join(f"s{j + 1}" for j in range(samples.shape[1])) + "\n")
        for i in range(samples.shape[0]):
            fh.write(_fmt(x[i]) + "," + ",".join(_fmt(v) for v in samples[i]) + "\n")


def load_samples(path):
    lines = _read_lines(path)
    if not lines:
        raise DataFormatError("empty file", path=path, lineno=1)
    header = lines[0].split(",")
    if header[0] != "x" or len(header) < 3:
        raise DataFormatError(
            "expected header 'x,s1,s2,...'", path=path, lineno=1
        )
    xs, rows = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        toks = line.split(",")
        if len(toks) != len(header):
            raise DataFormatError(
                f"expected {len(header)} fields, got {len(toks)}", path=path, lineno=lineno
            )
        xs.append(_parse_float(toks[0], path, lineno, "x"))
        rows.append([_parse_float(t, path, lineno, "s") for t in toks[1:]])
    return np.asarray(xs), np.asarray(rows)


def save_scores(path, report):
    with open(path, "w") as fh:
        fh.write(SCORES_MAGIC + "\n")
        fh.write(f"n_test {report.n_test}\n")
        fh.write(f"rmse_circular {_fmt(report.rmse_circular)}\n")
        fh.write(f"rmse_circular_sqrt {_fmt(report.rmse_circular_sqrt)}\n")
        fh.write(f"crps {_fmt(report.crps)}\n")
        fh.write("#residuals\n")
        for r in report.residuals:
            fh.write(_fmt(r) + "\n")


def load_scores(path):
    lines = _read_lines(path)
    if not lines or lines[0] != SCORES_MAGIC:
        raise DataFormatError(
            f"not a scores file (expected {SCORES_MAGIC!r})", path=path, lineno=1
        )
    meta = {}
    resid = []
    in_resid = False
    for line in lines[1:]:
        if line == "#residuals":
            in_resid = True
            continue
        if in_resid:
            if line.strip():
                resid.append(float(line))
        elif line.strip():
            key, _, val = line.partition(" ")
            meta[key] = val
    return ScoreReport(
        n_test=int(meta["n_test"]),
        rmse_circular=float(meta["rmse_circular"]),
        rmse_circular_sqrt=float(meta["rmse_circular_sqrt"]),
        crps=float(meta["crps"]),
        residuals=np.asarray(resid),
    )
