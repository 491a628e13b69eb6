"""Words in free groups: parsing, printing, free reduction."""

import re

_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_.]*)(?:\^\(?(-?\d+)\)?)?$")


def reduce_word(word):
    """Freely reduce a word given as a sequence of ``(generator, exponent)``.

    Adjacent letters on the same generator are merged and zero exponents
    dropped, so the result is the unique reduced form.
    """
    out = []
    for g, e in word:
        if e == 0:
            continue
        if out and out[-1][0] == g:
            e2 = out[-1][1] + e
            out.pop()
            if e2:
                out.append((g, e2))
        else:
            out.append((g, e))
    return tuple(out)


def invert_word(word):
    return tuple((g, -e) for g, e in reversed(word))


def expand_word(word):
    """Unit-exponent letters: ``(g, 3)`` becomes three copies of ``(g, 1)``."""
    out = []
    for g, e in word:
        s = 1 if e > 0 else -1
        out.extend([(g, s)] * abs(e))
    return tuple(out)


def word_length(word):
    return sum(abs(e) for _, e in word)


def parse_word(text):
    """Parse ``"A B A^-1 B^-1"`` (also ``A^(-1)``, ``A^2``)."""
    word = []
    for tok in text.replace("*", " ").split():
        m = _TOKEN.match(tok)
        if not m:
            raise ValueError(f"bad word token {tok!r}")
        word.append((m.group(1), int(m.group(2)) if m.group(2) else 1))
    return reduce_word(word)


def format_word(word):
    parts = []
    for g, e in word:
        parts.append(str(g) if e == 1 else f"{g}^{e}")
    return " ".join(parts)


def power(word, n):
    if n < 0:
        return power(invert_word(word), -n)
    return reduce_word(tuple(word) * n)
