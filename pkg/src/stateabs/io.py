"""Network JSON documents, trace CSV files and SVG plots of traces."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

from .anytime import AnytimeTrace
from .network import Cpt, Network, NetworkError, Variable, checked

SUMMARY_COLUMNS = ["run_id", "iteration", "elapsed_ms", "eval_ms", "policy", "strategy",
                   "total_superstates", "avg_relscore", "terminated"]
NODE_COLUMNS = ["run_id", "iteration", "variable", "n_superstates", "relscore"]


class FormatError(ValueError):
    pass


# -- networks ---------------------------------------------------------------

def _num(x: float) -> str:
    return format(float(x), ".17g")


def write_network(net: Network) -> str:
    """Deterministic JSON text; probabilities carry 17 significant digits."""
    out = ["{", f'  "name": {json.dumps(net.name)},', '  "variables": [']
    for i, (v, c) in enumerate(zip(net.variables, net.cpts)):
        out.append("    {")
        out.append(f'      "name": {json.dumps(v.name)},')
        out.append(f'      "states": [{", ".join(json.dumps(s) for s in v.states)}],')
        if v.bounds is not None:
            out.append(f'      "bounds": [{_num(v.bounds[0])}, {_num(v.bounds[1])}],')
        out.append(f'      "parents": [{", ".join(json.dumps(p) for p in c.parents)}],')
        out.append('      "cpt": [')
        rows = ["        [" + ", ".join(_num(x) for x in row) + "]" for row in c.table]
        out.append(",\n".join(rows))
        out.append("      ]")
        out.append("    }" + ("," if i < len(net) - 1 else ""))
    out += ["  ]", "}"]
    return "\n".join(out) + "\n"


def _require(cond, msg):
    if not cond:
        raise FormatError(msg)


def parse_network(document: str) -> Network:
    """Parse a JSON network document without the numerical validation pass."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise FormatError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    _require(isinstance(doc, dict), "top level must be an object")
    _require(isinstance(doc.get("variables"), list), 'missing "variables" array')
    name = doc.get("name", "")
    _require(isinstance(name, str), '"name" must be a string')
    variables, cpts, seen = [], [], set()
    for i, item in enumerate(doc["variables"]):
        _require(isinstance(item, dict), f"variable #{i} must be an object")
        vname = item.get("name")
        _require(isinstance(vname, str) and vname, f"variable #{i} needs a string name")
        ctx = f"variable {vname!r}"
        if vname in seen:
            raise FormatError(f"duplicate variable name {vname!r}")
        seen.add(vname)
        states = item.get("states")
        _require(isinstance(states, list) and all(isinstance(s, str) for s in states),
                 f'{ctx}: "states" must be an array of strings')
        bounds = item.get("bounds")
        if bounds is not None:
            _require(isinstance(bounds, list) and len(bounds) == 2
                     and all(isinstance(b, (int, float)) and not isinstance(b, bool) for b in bounds),
                     f'{ctx}: "bounds" must be [lo, hi]')
        parents = item.get("parents", [])
        _require(isinstance(parents, list) and all(isinstance(p, str) for p in parents),
                 f'{ctx}: "parents" must be an array of names')
        rows = item.get("cpt")
        _require(isinstance(rows, list) and rows and all(isinstance(r, list) for r in rows),
                 f'{ctx}: "cpt" must be an array of rows')
        for r in rows:
            _require(all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in r),
                     f"{ctx}: CPT entries must be numbers")
        width = {len(r) for r in rows}
        if width != {len(states)}:
            raise NetworkError(f"{ctx}: dimension mismatch, CPT rows must have {len(states)} entries")
        variables.append(Variable(vname, tuple(states), tuple(bounds) if bounds is not None else None))
        cpts.append(Cpt(tuple(parents), rows))
    return Network(name, variables, cpts)


def read_network(document: str) -> Network:
    """Parse and validate; near-unit rows come back renormalised."""
    return checked(parse_network(document))


def load_network(path) -> Network:
    return read_network(Path(path).read_text(encoding="utf-8"))


def save_network(net: Network, path) -> None:
    Path(path).write_text(write_network(net), encoding="utf-8", newline="\n")


# -- traces -----------------------------------------------------------------

def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def trace_rows(trace: AnytimeTrace, run_id: str) -> tuple[list[list[str]], list[list[str]]]:
    summary, nodes = [], []
    last = len(trace.records) - 1
    for i, rec in enumerate(trace.records):
        summary.append([
            run_id, str(rec.iteration), f"{rec.elapsed * 1e3:.3f}", f"{rec.eval_time * 1e3:.3f}",
            trace.config["policy"], trace.config["strategy"], str(rec.total_superstates),
            _fmt(rec.avg_relscore), trace.reason if i == last else "",
        ])
        counts = rec.states
        for name in rec.marginals:
            if rec.marginals.is_evidence(name):
                continue
            score = rec.relscores.get(name) if rec.relscores else None
            nodes.append([run_id, str(rec.iteration), name, str(counts[name]), _fmt(score)])
    return summary, nodes


def csv_text(header: Sequence[str] | None, rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_trace(trace: AnytimeTrace, run_id: str, out_dir, append: bool = False) -> tuple[Path, Path]:
    """Write (or append to) ``summary.csv`` and ``nodes.csv`` under ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary, nodes = trace_rows(trace, run_id)
    paths = []
    for fname, header, rows in (("summary.csv", SUMMARY_COLUMNS, summary), ("nodes.csv", NODE_COLUMNS, nodes)):
        path = out_dir / fname
        fresh = not (append and path.exists())
        with open(path, "w" if fresh else "a", encoding="utf-8", newline="") as fh:
            fh.write(csv_text(header if fresh else None, rows))
        paths.append(path)
    return paths[0], paths[1]


def read_summary(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


# -- plots ------------------------------------------------------------------

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def render_plot(summary_rows: Sequence[dict], title: str = "Average relative score") -> str:
    """SVG line chart of avg_relscore against elapsed_ms, one line per run_id."""
    if not summary_rows:
        raise ValueError("no rows to plot")
    series: dict[str, list[tuple[float, float]]] = {}
    for row in summary_rows:
        score = row.get("avg_relscore", "")
        if score in ("", None):
            raise ValueError(f"row for run {row.get('run_id')!r} iteration {row.get('iteration')} has no avg_relscore")
        series.setdefault(row["run_id"], []).append((float(row["elapsed_ms"]), float(score)))

    W, H = 640, 400
    left, right, top, bottom = 70, 160, 40, 50
    pw, ph = W - left - right, H - top - bottom
    xmax = max(x for pts in series.values() for x, _ in pts) or 1.0

    def sx(x):
        return left + pw * x / xmax

    def sy(y):
        return top + ph * (1.0 - y)

    el = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
        'font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{left + pw / 2:.2f}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>',
    ]
    for i in range(6):
        y = i / 5
        el.append(f'<line x1="{left}" y1="{sy(y):.2f}" x2="{left + pw}" y2="{sy(y):.2f}" stroke="#ddd"/>')
        el.append(f'<text x="{left - 8}" y="{sy(y) + 4:.2f}" text-anchor="end">{y:.1f}</text>')
    for i in range(6):
        x = xmax * i / 5
        el.append(f'<line x1="{sx(x):.2f}" y1="{top + ph}" x2="{sx(x):.2f}" y2="{top + ph + 5}" stroke="black"/>')
        el.append(f'<text x="{sx(x):.2f}" y="{top + ph + 18}" text-anchor="middle">{x:.4g}</text>')
    el.append(f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>')
    el.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>')
    el.append(f'<text x="{left + pw / 2:.2f}" y="{H - 10}" text-anchor="middle">elapsed (ms)</text>')
    el.append(f'<text x="18" y="{top + ph / 2:.2f}" text-anchor="middle" '
              f'transform="rotate(-90 18 {top + ph / 2:.2f})">average relscore</text>')
    for k, (run, pts) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        coords = " ".join(f"{sx(x):.2f},{sy(min(max(y, 0.0), 1.0)):.2f}" for x, y in pts)
        el.append(f'<polyline class="series" data-run="{_esc(run)}" fill="none" stroke="{color}" '
                  f'stroke-width="2" points="{coords}"/>')
        ly = top + 10 + 18 * k
        el.append(f'<line x1="{left + pw + 15}" y1="{ly}" x2="{left + pw + 35}" y2="{ly}" '
                  f'stroke="{color}" stroke-width="2"/>')
        el.append(f'<text x="{left + pw + 40}" y="{ly + 4}">{_esc(run)}</text>')
    el.append("</svg>")
    return "\n".join(el) + "\n"


def _esc(s: str) -> str:
    return (str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))
