"""Group description files.

A plain group::

    # comment
    name = G0(1)
    genus = 1
    kind = fuchsian_exact
    generator A = 2 0  1/6 0  6 0  1 0
    generator B = 2 0  -1/6 0  -6 0  1 0
    boundary = A B A^-1 B^-1

Each generator lists re/im of a, b, c, d.  A scalar containing '.', 'e' or
'inf'/'nan' is read as a float, anything else as an exact rational.

A combined group repeats ``[block N]`` sections (each a plain group plus
``height = ...``) followed by a ``[structure]`` section with ``c``, optional
``hnn_p`` and ``hnn_strip``, and ``certificates`` as one line of JSON.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .fuchsian import MarkedGroup
from .moebius import MoebiusMap, QQi
from .words import format_word, parse_word


class FormatError(ValueError):
    pass


def parse_scalar(tok):
    t = tok.strip()
    low = t.lower()
    if any(ch in low for ch in ".e") or low in ("inf", "-inf", "nan"):
        return float(t)
    return Fraction(t)


def format_scalar(x):
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


def _entry(re, im):
    if isinstance(re, Fraction) and isinstance(im, Fraction):
        return QQi(re, im)
    return complex(float(re), float(im))


def _parse_group(lines, where="group"):
    meta, gens, names = {}, [], []
    boundary = None
    for lineno, line in lines:
        key, _, val = line.partition("=")
        if not _:
            raise FormatError(f"line {lineno}: expected 'key = value'")
        key, val = key.strip(), val.strip()
        if key.startswith("generator "):
            name = key.split(None, 1)[1].strip()
            toks = val.split()
            if len(toks) != 8:
                raise FormatError(f"line {lineno}: generator {name} needs 8 scalars")
            try:
                v = [parse_scalar(t) for t in toks]
            except (ValueError, ZeroDivisionError) as e:
                raise FormatError(f"line {lineno}: bad scalar ({e})") from None
            ents = [_entry(v[2 * i], v[2 * i + 1]) for i in range(4)]
            try:
                g = MoebiusMap(*ents)
            except ValueError as e:
                raise FormatError(f"line {lineno}: {e}") from None
            names.append(name)
            gens.append(g)
        elif key == "boundary":
            try:
                boundary = parse_word(val)
            except ValueError as e:
                raise FormatError(f"line {lineno}: {e}") from None
        else:
            meta[key] = val
    if not gens:
        raise FormatError(f"{where}: no generators")
    if boundary is None:
        raise FormatError(f"{where}: missing boundary word")
    unknown = {n for n, _ in boundary} - set(names)
    if unknown:
        raise FormatError(f"{where}: boundary uses unknown generators {sorted(unknown)}")
    genus = meta.get("genus", "unknown")
    genus = int(genus) if genus.isdigit() else genus
    kind = meta.get("kind") or ("fuchsian_exact" if all(g.is_exact for g in gens)
                                else "quasifuchsian_numeric")
    try:
        G = MarkedGroup(tuple(names), tuple(gens), boundary, genus, kind, meta.get("name", "G"))
    except ValueError as e:
        raise FormatError(f"{where}: {e}") from None
    return G, meta


def _clean(text):
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((i, line))
    return out


def parse_group_text(text):
    """MarkedGroup or CombinedGroup from file text; raises :class:`FormatError`."""
    lines = _clean(text)
    if not any(l.startswith("[") for _, l in lines):
        return _parse_group(lines)[0]
    from .combiner import CombinedGroup

    sections, cur = [], None
    for lineno, line in lines:
        if line.startswith("["):
            if not line.endswith("]"):
                raise FormatError(f"line {lineno}: bad section header")
            cur = (line[1:-1].strip(), [])
            sections.append(cur)
        elif cur is None:
            raise FormatError(f"line {lineno}: content before the first section")
        else:
            cur[1].append((lineno, line))
    blocks, heights, struct = [], [], None
    for name, body in sections:
        if name.startswith("block"):
            G, meta = _parse_group(body, name)
            if "height" not in meta:
                raise FormatError(f"{name}: missing height")
            heights.append(parse_scalar(meta["height"]))
            blocks.append(G)
        elif name == "structure":
            struct = {}
            for lineno, line in body:
                k, _, v = line.partition("=")
                struct[k.strip()] = v.strip()
        else:
            raise FormatError(f"unknown section [{name}]")
    if struct is None or "c" not in struct:
        raise FormatError("combined group needs a [structure] section with c")
    try:
        c = parse_scalar(struct["c"])
        p = int(struct["hnn_p"]) if struct.get("hnn_p") else None
        strip = tuple(parse_scalar(x) for x in struct["hnn_strip"].split()) if struct.get("hnn_strip") else None
        certs = json.loads(struct.get("certificates", "{}"))
    except (ValueError, json.JSONDecodeError) as e:
        raise FormatError(f"[structure]: {e}") from None
    return CombinedGroup(tuple(blocks), tuple(heights), c, p, strip, certs,
                         struct.get("name", "Gamma"))


def read_group(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise FormatError(str(e)) from None
    return parse_group_text(text)


def _group_lines(G):
    lines = [f"name = {G.label}", f"genus = {G.genus}", f"kind = {G.claimed_kind}"]
    for n, g in zip(G.names, G.generators):
        vals = []
        for x in g.entries():
            if isinstance(x, QQi):
                vals += [format_scalar(x.re), format_scalar(x.im)]
            else:
                vals += [repr(float(x.real)), repr(float(x.imag))]
        lines.append(f"generator {n} = " + " ".join(vals))
    lines.append(f"boundary = {format_word(G.boundary_word)}")
    return lines


def _cert_json(certs):
    out = {}
    for k, v in certs.items():
        out[k] = v.to_dict() if hasattr(v, "to_dict") else v
    return json.dumps(out, sort_keys=True)


def format_group(G):
    if not hasattr(G, "blocks"):
        return "\n".join(_group_lines(G)) + "\n"
    lines = [f"# {G.describe()}"]
    for i, (B, a) in enumerate(zip(G.blocks, G.heights), start=1):
        lines.append(f"[block {i}]")
        lines.append(f"height = {format_scalar(a) if not isinstance(a, int) else a}")
        lines += _group_lines(B)
    lines.append("[structure]")
    lines.append(f"name = {G.label}")
    lines.append(f"c = {format_scalar(Fraction(G.c)) if not isinstance(G.c, float) else repr(G.c)}")
    if G.hnn_p is not None:
        lines.append(f"hnn_p = {G.hnn_p}")
        lines.append("hnn_strip = " + " ".join(format_scalar(Fraction(x)) for x in G.hnn_strip))
    lines.append(f"certificates = {_cert_json(G.certificates)}")
    return "\n".join(lines) + "\n"


def write_group(G, path):
    from .limitset import _atomic_write

    _atomic_write(path, format_group(G))
