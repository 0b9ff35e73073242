"""Text formats: network spec files, data files, parameter and experiment tables.

Network spec files are line oriented with ``#`` comments and literal section
headers::

    variables
      X1
      Y
    arcs
      X1 -> Y
    cpt
      X1 | - | 0.3
      Y | 0 | 0.2
      Y | 1 | 0.7
    signs
      X1 -> Y : +
      X3 -> Y : - | context: X1=0
    prior
      Y | * | 0.5 2

CPT rows are ``child | bits | p(child=1 | bits)`` with bits in declared parent
order (``-`` for no parents). Prior rows are ``child | bits | mode precision``;
``*`` applies a row to every configuration not listed explicitly.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import re
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from isobn.dataset import Dataset
from isobn.errors import IsobnError, ParseError, SignError
from isobn.estimation import BetaPrior, FittedNetwork
from isobn.model import Network, config_from_index, format_config, validate_network
from isobn.signs import Sign, SignedInfluence, validate_influences

log = logging.getLogger(__name__)

SECTIONS = ("variables", "arcs", "cpt", "signs", "prior")
NAME = r"[A-Za-z_][A-Za-z0-9_.\-]*"
_NAME_RE = re.compile(rf"^{NAME}$")
_ARC_RE = re.compile(rf"^\s*({NAME})\s*->\s*({NAME})\s*$")
_SIGN_RE = re.compile(rf"^\s*({NAME})\s*->\s*({NAME})\s*:\s*(\S+)\s*(?:\|\s*context\s*:\s*(.*))?$")
_CTX_RE = re.compile(rf"^\s*({NAME})\s*=\s*([01])\s*$")

PARAM_HEADER = ("variable", "config", "n", "n1", "basic", "fitted")
EXPERIMENT_HEADER = ("n", "mean_kl_unconstrained", "mean_kl_constrained", "reps_used", "reps_infinite")


def fmt(x: float) -> str:
    return format(float(x), ".10g")


def _bits(text: str, line: int, col: int, source) -> tuple[int, ...]:
    text = text.strip()
    if text in ("", "-"):
        return ()
    if not re.fullmatch(r"[01]+", text):
        raise ParseError(f"configuration {text!r} is not a bit string", line, col, source)
    return tuple(int(c) for c in text)


def _col(raw: str, token: str) -> int:
    pos = raw.find(token)
    return pos + 1 if pos >= 0 else 1


def parse_network(text: str, source=None) -> tuple[Network, list[SignedInfluence], dict[str, BetaPrior] | None]:
    """Parse a network spec; returns the network, its influences and an optional prior."""
    section = None
    variables: list[str] = []
    var_lines: dict[str, int] = {}
    arcs: list[tuple[str, str, int]] = []
    cpt_rows: dict[str, dict[tuple[int, ...], float]] = {}
    sign_rows: list[tuple[str, str, Sign, list[tuple[str, int]], int, str]] = []
    prior_rows: dict[str, dict] = {}
    saw_prior = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        head = line.strip().rstrip(":").lower()
        if head in SECTIONS and len(line.strip().split()) == 1:
            section = head
            saw_prior = saw_prior or head == "prior"
            continue
        if section is None:
            raise ParseError("content before the first section header", lineno, 1, source)
        body = line.strip()
        if section == "variables":
            if not _NAME_RE.match(body):
                raise ParseError(f"invalid variable name {body!r}", lineno, _col(raw, body), source)
            if body in var_lines:
                raise ParseError(f"duplicate variable name {body!r} (first on line {var_lines[body]})", lineno, _col(raw, body), source)
            var_lines[body] = lineno
            variables.append(body)
        elif section == "arcs":
            m = _ARC_RE.match(body)
            if not m:
                raise ParseError("expected 'parent -> child'", lineno, _col(raw, body), source)
            arcs.append((m.group(1), m.group(2), lineno))
        elif section == "cpt":
            parts = body.split("|")
            if len(parts) != 3:
                raise ParseError("expected 'child | bits | probability'", lineno, _col(raw, body), source)
            child = parts[0].strip()
            bits = _bits(parts[1], lineno, _col(raw, parts[1].strip() or "|"), source)
            try:
                p = float(parts[2])
            except ValueError:
                raise ParseError(f"probability {parts[2].strip()!r} is not a number", lineno, _col(raw, parts[2].strip()), source) from None
            rows = cpt_rows.setdefault(child, {})
            if bits in rows:
                raise ParseError(f"duplicate CPT row for {child!r} at {format_config(bits) or '-'}", lineno, 1, source)
            rows[bits] = p
        elif section == "signs":
            m = _SIGN_RE.match(body)
            if not m:
                raise ParseError("expected 'parent -> child : SIGN [| context: var=bit, ...]'", lineno, _col(raw, body), source)
            try:
                sign = Sign.parse(m.group(3))
            except SignError as exc:
                raise ParseError(str(exc), lineno, _col(raw, m.group(3)), source) from None
            ctx: list[tuple[str, int]] = []
            if m.group(4) is not None:
                for item in m.group(4).split(","):
                    cm = _CTX_RE.match(item)
                    if not cm:
                        raise ParseError(f"bad context item {item.strip()!r}; expected var=0 or var=1", lineno, _col(raw, item.strip()), source)
                    ctx.append((cm.group(1), int(cm.group(2))))
            sign_rows.append((m.group(1), m.group(2), sign, ctx, lineno, raw))
        elif section == "prior":
            parts = body.split("|")
            if len(parts) != 3:
                raise ParseError("expected 'child | bits | mode precision'", lineno, _col(raw, body), source)
            child = parts[0].strip()
            key = parts[1].strip()
            if key != "*":
                key = _bits(key, lineno, _col(raw, parts[1].strip() or "|"), source)
            vals = parts[2].split()
            try:
                mode, h = float(vals[0]), float(vals[1])
                if len(vals) != 2:
                    raise ValueError
            except (ValueError, IndexError):
                raise ParseError("prior row needs 'mode precision'", lineno, _col(raw, parts[2].strip()), source) from None
            prior_rows.setdefault(child, {})[key] = (mode, h, lineno)

    parents: dict[str, list[str]] = {}
    for p, c, lineno in arcs:
        for name in (p, c):
            if name not in var_lines:
                raise ParseError(f"arc references unknown variable {name!r}", lineno, 1, source)
        if p in parents.get(c, []):
            raise ParseError(f"duplicate arc {p} -> {c}", lineno, 1, source)
        parents.setdefault(c, []).append(p)
    net = validate_network(variables, parents, cpt_rows)

    influences: list[SignedInfluence] = []
    by_child: dict[int, list[SignedInfluence]] = {}
    for p, c, sign, ctx, lineno, raw in sign_rows:
        if c not in var_lines:
            raise ParseError(f"sign references unknown variable {c!r}", lineno, _col(raw, c), source)
        plist = net.parent_names(c)
        if p not in plist:
            raise ParseError(f"{p!r} is not a parent of {c!r}; signs need an arc", lineno, _col(raw, p), source)
        ctx_pos = []
        for name, bit in ctx:
            if name == p:
                raise ParseError(f"context of {p} -> {c} must not mention {p} itself", lineno, _col(raw, name + "="), source)
            if name not in plist:
                raise ParseError(f"context variable {name!r} is not a parent of {c!r}", lineno, _col(raw, name + "="), source)
            ctx_pos.append((plist.index(name), bit))
        inf = SignedInfluence(plist.index(p), sign, tuple(ctx_pos), net.index(c))
        try:
            validate_influences(by_child.get(inf.child, []) + [inf], len(plist))
        except SignError as exc:
            raise ParseError(str(exc), lineno, 1, source) from None
        by_child.setdefault(inf.child, []).append(inf)
        influences.append(inf)

    prior = None
    if saw_prior:
        prior = {}
        for child in prior_rows:
            if child not in var_lines:
                line = next(iter(prior_rows[child].values()))[2]
                raise ParseError(f"prior given for unknown variable {child!r}", line, 1, source)
        for name in net.names:
            k = net.n_parents(name)
            rows = prior_rows.get(name, {})
            default = rows.get("*", (0.5, 0.0, None))
            mode = np.full(1 << k, default[0])
            h = np.full(1 << k, default[1])
            for key, (m_, h_, lineno) in rows.items():
                if key == "*":
                    continue
                if len(key) != k:
                    raise ParseError(f"prior configuration width {len(key)} does not match {k} parents of {name!r}", lineno, 1, source)
                x = int("".join(map(str, key)) or "0", 2)
                mode[x], h[x] = m_, h_
            try:
                prior[name] = BetaPrior(mode, h)
            except IsobnError as exc:
                raise ParseError(f"{name}: {exc}", None, None, source) from None
    return net, influences, prior


def load_network(path) -> tuple[Network, list[SignedInfluence], dict[str, BetaPrior] | None]:
    path = Path(path)
    return parse_network(path.read_text(), source=str(path))


def format_influence(net: Network, inf: SignedInfluence) -> str:
    child = net.names[inf.child]
    plist = net.parent_names(child)
    s = f"{plist[inf.parent]} -> {child} : {inf.sign.value}"
    if inf.context:
        s += " | context: " + ", ".join(f"{plist[i]}={b}" for i, b in inf.context)
    return s


def emit_network(net: Network, influences: Sequence[SignedInfluence] = (), prior: Mapping[str, BetaPrior] | None = None) -> str:
    """Canonical spec text; ``parse_network(emit_network(...))`` reproduces the inputs."""
    out = ["variables"]
    out += [f"  {n}" for n in net.names]
    out.append("arcs")
    for c, ps in enumerate(net.parents):
        for p in ps:
            out.append(f"  {net.names[p]} -> {net.names[c]}")
    if any(t is not None for t in net.cpt):
        out.append("cpt")
        for v, table in enumerate(net.cpt):
            if table is None:
                continue
            k = len(net.parents[v])
            for x, p in enumerate(table):
                out.append(f"  {net.names[v]} | {format_config(config_from_index(x, k)) or '-'} | {p!r}")
    if influences:
        out.append("signs")
        out += ["  " + format_influence(net, inf) for inf in influences]
    if prior is not None:
        out.append("prior")
        for name in net.names:
            if name not in prior:
                continue
            k = net.n_parents(name)
            pr = prior[name]
            for x in range(1 << k):
                out.append(
                    f"  {name} | {format_config(config_from_index(x, k)) or '-'} | {float(pr.mode[x])!r} {float(pr.h[x])!r}"
                )
    return "\n".join(out) + "\n"


def parse_data(text: str, net: Network, source=None) -> Dataset:
    """Comma-separated 0/1 data with a header row; columns are reordered to the network."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("data file is empty", 1, 1, source) from None
    missing = [n for n in net.names if n not in header]
    if missing:
        raise ParseError(f"data lacks column(s) {', '.join(missing)}", 1, 1, source)
    extra = [h for h in header if h not in net.names]
    if extra:
        log.warning("ignoring data column(s) not in the network: %s", ", ".join(extra))
    idx = [header.index(n) for n in net.names]
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"row has {len(row)} cells, header has {len(header)}", lineno, 1, source)
        vals = []
        for j in idx:
            cell = row[j].strip()
            if cell not in ("0", "1"):
                raise ParseError(f"non-binary cell {cell!r} in column {header[j]!r}", lineno, j + 1, source)
            vals.append(int(cell))
        rows.append(vals)
    arr = np.array(rows, dtype=np.uint8).reshape(len(rows), len(net.names))
    return Dataset(net.names, arr, {"source": str(source) if source else None})


def load_data(path, net: Network) -> Dataset:
    path = Path(path)
    return parse_data(path.read_text(), net, source=str(path))


def format_data(data: Dataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(data.columns)
    w.writerows(data.rows.tolist())
    return buf.getvalue()


def format_param_table(fitted: FittedNetwork) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PARAM_HEADER)
    for name in fitted.network.names:
        for bits, n, n1, basic, p in fitted.fits[name].rows():
            w.writerow([name, bits or "-", n, n1, fmt(basic), fmt(p)])
    return buf.getvalue()


def parse_param_table(text: str, source=None) -> dict[str, dict[tuple[int, ...], dict]]:
    """Read a parameter table back as ``{variable: {bits: row}}``."""
    reader = csv.reader(io.StringIO(text))
    header = tuple(h.strip() for h in next(reader, ()))
    if header != PARAM_HEADER:
        raise ParseError(f"unexpected header {','.join(header)}", 1, 1, source)
    out: dict[str, dict] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(PARAM_HEADER):
            raise ParseError("wrong number of cells", lineno, 1, source)
        name, bits = row[0], _bits(row[1], lineno, 2, source)
        try:
            out.setdefault(name, {})[bits] = {
                "n": int(row[2]),
                "n1": int(row[3]),
                "basic": float(row[4]),
                "fitted": float(row[5]),
            }
        except ValueError:
            raise ParseError("malformed number", lineno, 1, source) from None
    return out


def param_table_cpts(table: Mapping[str, Mapping[tuple[int, ...], Mapping]]) -> dict[str, dict[tuple[int, ...], float]]:
    return {name: {bits: row["fitted"] for bits, row in rows.items()} for name, rows in table.items()}


def format_experiment(summary) -> str:
    has_alt = any(r.mean_kl_alternative is not None for r in summary.rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EXPERIMENT_HEADER + (("mean_kl_alternative",) if has_alt else ()))
    for r in summary.rows:
        row = [r.n, fmt(r.mean_kl_unconstrained), fmt(r.mean_kl_constrained), r.reps_used, r.reps_infinite]
        if has_alt:
            row.append(fmt(r.mean_kl_alternative) if r.mean_kl_alternative is not None else "nan")
        w.writerow(row)
    return buf.getvalue()


def format_kl(value: float) -> str:
    return "inf" if math.isinf(value) else fmt(value)
